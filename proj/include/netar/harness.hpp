#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "netar/config.hpp"

namespace netar {

struct MethodResult {
    Method method = Method::TMLE;
    bool ok = false;
    std::string error;
    double psi_hat = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double rho_hat0 = 0.0;
    double t_star = 0.0;
    double sigma2_y_part = 0.0;
    double sigma2_x_part = 0.0;
    double runtime_s = 0.0;  // timing; excluded from determinism guarantees
};

struct ReplicationResult {
    int r = 0;
    std::vector<MethodResult> methods;
};

// One Monte Carlo replication: draws a dataset from the stream derived from
// (master_seed, r) and runs every enabled method. Method failures are
// recorded in the result, not thrown.
ReplicationResult run_replication(const ExperimentConfig& config, GraphPtr graph,
                                  int r);

struct MethodMetrics {
    Method method = Method::TMLE;
    int n_ok = 0;
    double bias = 0.0;
    double se_empirical = 0.0;
    double cp = 0.0;
    double mean_se = 0.0;
    double mean_runtime_s = 0.0;
};

struct MetricsTable {
    double psi_true = 0.0;
    double oracle_mc_se = 0.0;
    bool oracle_noise_warning = false;  // oracle MC SE > 10% of empirical SE
    std::vector<MethodMetrics> metrics;
    std::vector<ReplicationResult> replications;
};

// Full study: shared graph (unless regeneration is enabled), oracle truth,
// R replications (optionally across worker threads, results keyed by r),
// and the aggregate metrics. Deterministic given (config, master_seed),
// independent of the worker count.
MetricsTable run_study(const ExperimentConfig& config);

struct IngestResult {
    Dataset dataset;
    int n_dropped_isolated = 0;
};

// Loads `id,y,z,x1..xp` rows plus an `i,j` edge list into a Dataset.
// Isolated nodes are dropped (with a count) and ids remapped to 0..N'-1.
// Optional log1p and standardization apply to the x columns.
IngestResult ingest_dataset(const std::string& data_csv, const std::string& edges_csv,
                            bool log1p_x, bool standardize_x,
                            SummaryMode summary = SummaryMode::Mean);

// Single-dataset estimation (the `estimate` subcommand): every enabled
// method fitted on the given data; no truth, so no bias/CP.
std::vector<MethodResult> estimate_methods(const ExperimentConfig& config,
                                           const Dataset& dataset);

// Reports. JSON nests all results with timing fields segregated under
// "timing" keys; strip_timing removes them for byte-level comparisons.
nlohmann::json study_report_json(const ExperimentConfig& config,
                                 const MetricsTable& table);
nlohmann::json estimate_report_json(const ExperimentConfig& config,
                                    const std::vector<MethodResult>& results,
                                    int n_dropped_isolated);
nlohmann::json strip_timing(nlohmann::json j);

// CSV, one row per method, header `method,bias,se,cp,mean_se,runtime_s`.
std::string metrics_csv(const MetricsTable& table);

void write_text_file(const std::string& path, const std::string& content);

nlohmann::json config_json(const ExperimentConfig& config);

}  // namespace netar

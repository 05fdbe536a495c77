#pragma once

#include <map>
#include <string>
#include <vector>

#include "netar/competitors.hpp"
#include "netar/initfit.hpp"
#include "netar/semgen.hpp"

namespace netar {

// Minimal TOML-style value: number, string, boolean, or flat array.
struct ConfigValue {
    enum class Kind { Number, String, Boolean, Array };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string text;
    bool boolean = false;
    std::vector<ConfigValue> items;
};

// section name -> (key -> value); top-level keys live in section "".
using ConfigTree = std::map<std::string, std::map<std::string, ConfigValue>>;

// Parses the key/value subset of TOML used by this artifact: [section]
// headers, `key = value` lines with numbers, "strings", booleans, and flat
// arrays, plus # comments. Throws std::runtime_error with line context.
ConfigTree parse_config_text(const std::string& text);
ConfigTree parse_config_file(const std::string& path);

enum class Method { TMLE, DE, NDI, ANI };
std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct NetworkSpec {
    std::string type = "block";  // block | powerlaw | file
    int n_nodes = 400;
    int n_blocks = 20;  // 0 -> N/20
    double p_in = 0.3;
    double p_out = -1.0;  // < 0 -> 0.3/N
    int m_attach = 2;
    std::string edges_path;
    bool regenerate_per_replication = false;

    GraphPtr build(std::uint64_t seed) const;
};

struct PolicySpec {
    std::string type = "stochastic";  // stochastic | stochastic_logit |
                                      // deterministic | dynamic_threshold
    double pi = 0.7;
    Eigen::VectorXd alpha;
    double alpha0 = 0.0;
    double value = 1.0;
    int feature = 0;
    double quantile = 0.5;
    double assign = 1.0;
    double other = 0.0;

    InterventionPolicy build() const;
};

struct ExperimentConfig {
    NetworkSpec network;
    SimConfig sim;
    PolicySpec policy;
    KdeConfig kde;
    std::string basis = "correct";
    double lambda = -1.0;  // < 0 -> default_lambda(N)
    std::vector<Method> methods{Method::TMLE, Method::DE, Method::NDI};
    int replications = 200;
    int n_boot = kDefaultBootstrapB;
    int outer_m = kDefaultVarOuterM;
    int inner_b = kDefaultVarInnerB;
    std::uint64_t master_seed = 1;
    int oracle_n_mc = 100000;
    int workers = 1;
    // data-ingestion options (estimate subcommand)
    bool data_log1p = false;
    bool data_standardize = false;
    SummaryMode summary = SummaryMode::Mean;

    double effective_lambda(int n) const {
        return lambda < 0.0 ? default_lambda(n) : lambda;
    }
};

// Builds an ExperimentConfig from a parsed tree; unknown sections or keys
// are rejected with their names.
ExperimentConfig experiment_from_tree(const ConfigTree& tree);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace netar

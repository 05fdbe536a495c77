// netar: TMLE for interventional means under network autoregression.
//
// Subcommands:
//   simulate --config <file> --out <dir>   Monte Carlo study -> report.{json,csv}
//   estimate --data <csv> --edges <csv> --config <file> --out <dir>
//   oracle   --config <file>               print the MC truth for the config
//   selftest                               run the built-in invariant checks
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// failure.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "netar/harness.hpp"
#include "netar/inference.hpp"

namespace {

constexpr int kExitConfig = 1, kExitData = 2, kExitNumerical = 3;

int classify(const std::exception& e) {
    const std::string what = e.what();
    if (what.rfind("data error:", 0) == 0 || what.rfind("cannot open", 0) == 0)
        return kExitData;
    if (what.find("config") != std::string::npos ||
        what.find("unknown") != std::string::npos)
        return kExitConfig;
    return kExitNumerical;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    const netar::ExperimentConfig config = netar::load_experiment_config(config_path);
    const netar::MetricsTable table = netar::run_study(config);
    std::filesystem::create_directories(out_dir);
    netar::write_text_file(out_dir + "/report.json",
                           netar::study_report_json(config, table).dump(2) + "\n");
    netar::write_text_file(out_dir + "/report.csv", netar::metrics_csv(table));
    std::cout << "psi_true " << table.psi_true << " (mc se " << table.oracle_mc_se
              << ")\n";
    for (const auto& m : table.metrics)
        std::cout << netar::method_name(m.method) << ": bias " << m.bias << " se "
                  << m.se_empirical << " cp " << m.cp << " mean_se " << m.mean_se
                  << "\n";
    if (table.oracle_noise_warning)
        std::cerr << "warning: oracle MC SE exceeds 10% of an empirical SE; "
                     "increase oracle_n_mc\n";
    return 0;
}

int cmd_estimate(const std::string& data_path, const std::string& edges_path,
                 const std::string& config_path, const std::string& out_dir) {
    const netar::ExperimentConfig config = netar::load_experiment_config(config_path);
    const netar::IngestResult ingest = netar::ingest_dataset(
        data_path, edges_path, config.data_log1p, config.data_standardize,
        config.summary);
    if (ingest.n_dropped_isolated > 0)
        std::cerr << "warning: dropped " << ingest.n_dropped_isolated
                  << " isolated node(s)\n";
    const auto results = netar::estimate_methods(config, ingest.dataset);
    std::filesystem::create_directories(out_dir);
    netar::write_text_file(
        out_dir + "/estimate.json",
        netar::estimate_report_json(config, results, ingest.n_dropped_isolated).dump(2) +
            "\n");
    for (const auto& r : results) {
        std::cout << netar::method_name(r.method) << ": ";
        if (r.ok)
            std::cout << "psi " << r.psi_hat << " se " << r.se << " ci [" << r.ci_lo
                      << ", " << r.ci_hi << "]\n";
        else
            std::cout << "failed: " << r.error << "\n";
    }
    return 0;
}

int cmd_oracle(const std::string& config_path) {
    const netar::ExperimentConfig config = netar::load_experiment_config(config_path);
    netar::GraphPtr graph =
        config.network.build(netar::derive_seed(config.master_seed, {0, 0}));
    netar::Rng rng(netar::derive_seed(config.master_seed, {4}));
    const netar::OracleResult oracle = netar::oracle_psi(
        config.sim, graph, config.policy.build(), config.oracle_n_mc, rng);
    std::cout << "psi_true " << oracle.psi_true << " mc_se " << oracle.mc_se
              << " n_mc " << oracle.n_mc << "\n";
    return 0;
}

int cmd_selftest() {
    using namespace netar;
    int failures = 0;
    const auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    Rng rng(20260823);
    GraphPtr graph = std::make_shared<const AdjacencyGraph>(
        gen_block(60, 3, 0.3, 0.02, rng));
    RowStochasticW w(graph);
    // row sums of W are exactly 1
    {
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(graph->n_nodes());
        check("W row-stochastic", (w.multiply(ones) - ones).lpNorm<Eigen::Infinity>() <
                                      1e-12);
    }
    // sum omega = N / (1 - rho)
    {
        const Eigen::VectorXd om = omega(w, 0.5);
        check("sum omega identity",
              std::abs(om.sum() - graph->n_nodes() / 0.5) < 1e-8);
    }
    // targeting zeroes the plug-in bias
    {
        SimConfig sim;
        Dataset d = gen_dataset(sim, graph, rng);
        InitialEstimate init =
            profile_rho(d, BasisSpec::correct(), default_lambda(d.n()));
        TargetedModel model =
            make_targeted_model(d, init.rho_hat0, std::make_shared<RidgeGModel>(init));
        check("plug-in bias zero", std::abs(plug_in_bias(model, d)) < 1e-8);
    }
    // determinism of a tiny replication
    {
        ExperimentConfig cfg;
        cfg.network.n_nodes = 60;
        cfg.network.n_blocks = 3;
        cfg.replications = 1;
        cfg.n_boot = 50;
        cfg.outer_m = 5;
        cfg.inner_b = 5;
        cfg.methods = {Method::TMLE};
        GraphPtr g = cfg.network.build(derive_seed(cfg.master_seed, {0, 0}));
        const auto a = run_replication(cfg, g, 0);
        const auto b = run_replication(cfg, g, 0);
        check("replication determinism",
              a.methods[0].psi_hat == b.methods[0].psi_hat &&
                  a.methods[0].se == b.methods[0].se);
    }
    if (failures) std::cout << failures << " selftest failure(s)\n";
    return failures == 0 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TMLE for average interventional outcomes under network "
                 "autoregression"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", data_path, edges_path;

    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo study");
    simulate->add_option("--config", config_path, "TOML config file")->required();
    simulate->add_option("--out", out_dir, "output directory");

    auto* estimate = app.add_subcommand("estimate", "estimate on a CSV dataset");
    estimate->add_option("--data", data_path, "data CSV (id,y,z,x1..xp)")->required();
    estimate->add_option("--edges", edges_path, "edge CSV (i,j)")->required();
    estimate->add_option("--config", config_path, "TOML config file")->required();
    estimate->add_option("--out", out_dir, "output directory");

    auto* oracle = app.add_subcommand("oracle", "print the MC truth for a config");
    oracle->add_option("--config", config_path, "TOML config file")->required();

    app.add_subcommand("selftest", "run built-in invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
        if (estimate->parsed())
            return cmd_estimate(data_path, edges_path, config_path, out_dir);
        if (oracle->parsed()) return cmd_oracle(config_path);
        return cmd_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
}

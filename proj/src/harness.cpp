#include "netar/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace netar {

namespace {

// Seed-stream layout (all via derive_seed from the master seed):
//   {0, r}            graph generation (r = 0 when the graph is shared)
//   {1, r}            dataset draw of replication r
//   {2, r, method_id} point-estimate bootstrap of a method
//   {3, r, method_id} variance bootstrap of a method
//   {4}               the oracle truth
constexpr std::uint64_t kGraphStream = 0, kDataStream = 1, kPsiStream = 2,
                        kVarStream = 3, kOracleStream = 4;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

MethodResult run_method(const ExperimentConfig& config, const Dataset& dataset,
                        Method method, std::uint64_t psi_seed,
                        std::uint64_t var_seed,
                        std::optional<InitialEstimate>& shared_init) {
    MethodResult res;
    res.method = method;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const InterventionPolicy policy = config.policy.build();
        const BasisSpec basis = BasisSpec::from_name(config.basis);
        const double lambda = config.effective_lambda(dataset.n());
        const auto profile_init = [&]() -> const InitialEstimate& {
            if (!shared_init) shared_init = profile_rho(dataset, basis, lambda);
            return *shared_init;
        };
        switch (method) {
            case Method::TMLE: {
                const InitialEstimate& init = profile_init();
                TargetedModel model = make_targeted_model(
                    dataset, init.rho_hat0, std::make_shared<RidgeGModel>(init), true,
                    config.sim.delta_rho);
                const PsiEstimate psi =
                    estimate_psi(model, dataset, policy, config.n_boot, psi_seed);
                const VarianceEstimate var = variance_nested_bootstrap(
                    model, dataset, policy, config.outer_m, config.inner_b, var_seed);
                res.psi_hat = psi.psi_hat;
                res.se = var.se();
                res.rho_hat0 = init.rho_hat0;
                res.t_star = model.t_star;
                res.sigma2_y_part = var.sigma2_y_part;
                res.sigma2_x_part = var.sigma2_x_part;
                break;
            }
            case Method::DE: {
                const InitialEstimate& init = profile_init();
                TargetedModel model = make_targeted_model(
                    dataset, init.rho_hat0, std::make_shared<RidgeGModel>(init), false,
                    config.sim.delta_rho);
                const PsiEstimate psi =
                    estimate_psi(model, dataset, policy, config.n_boot, psi_seed);
                const VarianceEstimate var = variance_nested_bootstrap(
                    model, dataset, policy, config.outer_m, config.inner_b, var_seed);
                res.psi_hat = psi.psi_hat;
                res.se = var.se();
                res.rho_hat0 = init.rho_hat0;
                res.t_star = 0.0;
                res.sigma2_y_part = var.sigma2_y_part;
                res.sigma2_x_part = var.sigma2_x_part;
                break;
            }
            case Method::NDI: {
                const NdiResult ndi =
                    ndi_estimate(dataset, policy, basis, lambda, config.n_boot,
                                 config.outer_m, config.inner_b, psi_seed);
                res.psi_hat = ndi.psi.psi_hat;
                res.se = ndi.variance.se();
                res.rho_hat0 = 0.0;
                res.t_star = ndi.t_star;
                res.sigma2_y_part = ndi.variance.sigma2_y_part;
                res.sigma2_x_part = ndi.variance.sigma2_x_part;
                break;
            }
            case Method::ANI: {
                const AniResult ani =
                    ani_estimate(dataset, policy, config.kde, psi_seed);
                res.psi_hat = ani.psi_hat;
                res.se = ani.se;
                break;
            }
        }
        const double z = normal_quantile(0.975);
        res.ci_lo = res.psi_hat - z * res.se;
        res.ci_hi = res.psi_hat + z * res.se;
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    res.runtime_s = seconds_since(t0);
    return res;
}

}  // namespace

ReplicationResult run_replication(const ExperimentConfig& config, GraphPtr graph,
                                  int r) {
    const auto ur = static_cast<std::uint64_t>(r);
    if (!graph) graph = config.network.build(derive_seed(config.master_seed,
                                                         {kGraphStream, ur}));
    Rng data_rng(derive_seed(config.master_seed, {kDataStream, ur}));
    const Dataset dataset = gen_dataset(config.sim, graph, data_rng);
    ReplicationResult out;
    out.r = r;
    std::optional<InitialEstimate> shared_init;
    for (Method m : config.methods) {
        const auto id = static_cast<std::uint64_t>(m);
        out.methods.push_back(run_method(
            config, dataset, m,
            derive_seed(config.master_seed, {kPsiStream, ur, id}),
            derive_seed(config.master_seed, {kVarStream, ur, id}), shared_init));
    }
    return out;
}

MetricsTable run_study(const ExperimentConfig& config) {
    MetricsTable table;
    GraphPtr shared_graph;
    if (!config.network.regenerate_per_replication)
        shared_graph = config.network.build(
            derive_seed(config.master_seed, {kGraphStream, 0}));
    // Truth once per study; with per-replication regeneration the r = 0
    // graph defines the estimand reported against.
    {
        GraphPtr g = shared_graph
                         ? shared_graph
                         : config.network.build(
                               derive_seed(config.master_seed, {kGraphStream, 0}));
        Rng rng(derive_seed(config.master_seed, {kOracleStream}));
        const OracleResult oracle =
            oracle_psi(config.sim, g, config.policy.build(), config.oracle_n_mc, rng);
        table.psi_true = oracle.psi_true;
        table.oracle_mc_se = oracle.mc_se;
    }

    const int r_total = config.replications;
    table.replications.resize(r_total);
    const int workers = std::max(1, std::min(config.workers, r_total));
    if (workers == 1) {
        for (int r = 0; r < r_total; ++r)
            table.replications[r] = run_replication(config, shared_graph, r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int r = next.fetch_add(1); r < r_total; r = next.fetch_add(1))
                    table.replications[r] = run_replication(config, shared_graph, r);
            });
        for (auto& t : pool) t.join();
    }

    for (Method m : config.methods) {
        MethodMetrics agg;
        agg.method = m;
        std::vector<double> psis;
        double se_sum = 0.0, rt_sum = 0.0;
        int covered = 0;
        for (const auto& rep : table.replications)
            for (const auto& res : rep.methods) {
                if (res.method != m) continue;
                rt_sum += res.runtime_s;
                if (!res.ok) continue;
                psis.push_back(res.psi_hat);
                se_sum += res.se;
                if (res.ci_lo <= table.psi_true && table.psi_true <= res.ci_hi)
                    ++covered;
            }
        agg.n_ok = static_cast<int>(psis.size());
        if (agg.n_ok > 0) {
            double mean = 0.0;
            for (double p : psis) mean += p;
            mean /= agg.n_ok;
            agg.bias = mean - table.psi_true;
            double ss = 0.0;
            for (double p : psis) ss += (p - mean) * (p - mean);
            agg.se_empirical = std::sqrt(ss / agg.n_ok);
            agg.cp = static_cast<double>(covered) / agg.n_ok;
            agg.mean_se = se_sum / agg.n_ok;
        }
        agg.mean_runtime_s = rt_sum / r_total;
        if (table.oracle_mc_se > 0.1 * agg.se_empirical && agg.n_ok > 1)
            table.oracle_noise_warning = true;
        table.metrics.push_back(agg);
    }
    return table;
}

namespace {

[[noreturn]] void data_error(const std::string& what) {
    throw std::runtime_error("data error: " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
            field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    return out;
}

double parse_cell(const std::string& s, int row, const std::string& col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        data_error("non-numeric cell '" + s + "' at row " + std::to_string(row) +
                   ", column " + col);
    }
}

}  // namespace

IngestResult ingest_dataset(const std::string& data_csv, const std::string& edges_csv,
                            bool log1p_x, bool standardize_x, SummaryMode summary) {
    std::ifstream in(data_csv);
    if (!in) data_error("cannot open data file: " + data_csv);
    std::string line;
    if (!std::getline(in, line)) data_error("empty data file: " + data_csv);
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "id" || header[1] != "y" || header[2] != "z")
        data_error("data header must be id,y,z,x1,...,xp (got '" + line + "')");
    const int p = static_cast<int>(header.size()) - 3;
    for (int d = 0; d < p; ++d)
        if (header[3 + d] != "x" + std::to_string(d + 1))
            data_error("missing column x" + std::to_string(d + 1) + " (got '" +
                       header[3 + d] + "')");

    std::map<long long, std::vector<double>> rows;  // id -> (y, z, x...)
    int row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            data_error("row " + std::to_string(row_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
        const auto id =
            static_cast<long long>(parse_cell(cells[0], row_no, "id"));
        if (rows.count(id))
            data_error("duplicate id " + std::to_string(id) + " at row " +
                       std::to_string(row_no));
        std::vector<double> vals;
        for (std::size_t k = 1; k < cells.size(); ++k)
            vals.push_back(parse_cell(cells[k], row_no, header[k]));
        rows[id] = std::move(vals);
    }
    if (rows.empty()) data_error("no data rows in " + data_csv);

    const auto pairs = read_edge_csv(edges_csv);
    std::map<long long, int> degree;
    for (const auto& [a, b] : pairs) {
        if (!rows.count(a) || !rows.count(b))
            data_error("edge (" + std::to_string(a) + "," + std::to_string(b) +
                       ") references an id absent from the data file");
        ++degree[a];
        ++degree[b];
    }

    // keep only nodes with at least one edge, remapped in ascending id order
    std::map<long long, int> remap;
    IngestResult out;
    for (const auto& [id, vals] : rows) {
        if (degree.count(id))
            remap[id] = static_cast<int>(remap.size());
        else
            ++out.n_dropped_isolated;
    }
    if (remap.empty()) data_error("all nodes are isolated");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(pairs.size());
    for (const auto& [a, b] : pairs) edges.emplace_back(remap.at(a), remap.at(b));
    const int n = static_cast<int>(remap.size());

    Dataset d;
    d.graph = std::make_shared<const AdjacencyGraph>(AdjacencyGraph::build(edges, n));
    d.y.resize(n);
    d.z.resize(n);
    d.x.resize(n, p);
    for (const auto& [id, idx] : remap) {
        const std::vector<double>& vals = rows.at(id);
        d.y[idx] = vals[0];
        d.z[idx] = vals[1];
        for (int k = 0; k < p; ++k) d.x(idx, k) = vals[2 + k];
    }
    if (log1p_x) {
        if ((d.x.array() <= -1.0).any())
            data_error("log1p transform requires all x > -1");
        d.x = d.x.array().log1p();
    }
    if (standardize_x) {
        for (int k = 0; k < p; ++k) {
            const double mean = d.x.col(k).mean();
            double sd = std::sqrt((d.x.col(k).array() - mean).square().sum() /
                                  std::max(1, n - 1));
            if (sd <= 0.0) sd = 1.0;
            d.x.col(k) = (d.x.col(k).array() - mean) / sd;
        }
    }
    d.summary = summary;
    d.refresh_summaries();
    out.dataset = std::move(d);
    return out;
}

std::vector<MethodResult> estimate_methods(const ExperimentConfig& config,
                                           const Dataset& dataset) {
    std::vector<MethodResult> out;
    std::optional<InitialEstimate> shared_init;
    for (Method m : config.methods) {
        const auto id = static_cast<std::uint64_t>(m);
        out.push_back(run_method(
            config, dataset, m,
            derive_seed(config.master_seed, {kPsiStream, 0, id}),
            derive_seed(config.master_seed, {kVarStream, 0, id}), shared_init));
    }
    return out;
}

nlohmann::json config_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["network"] = {{"type", c.network.type},
                    {"n_nodes", c.network.n_nodes},
                    {"n_blocks", c.network.n_blocks},
                    {"p_in", c.network.p_in},
                    {"p_out", c.network.p_out},
                    {"m_attach", c.network.m_attach},
                    {"edges_path", c.network.edges_path},
                    {"regenerate_per_replication",
                     c.network.regenerate_per_replication}};
    j["sim"] = {{"rho0", c.sim.rho0},
                {"noise_sd", c.sim.noise_sd},
                {"noise_kind",
                 c.sim.noise_kind == NoiseKind::Gaussian ? "gaussian" : "uniform"},
                {"treat_alpha0", c.sim.treat_alpha0},
                {"delta_rho", c.sim.delta_rho}};
    j["sim"]["treat_alpha"] = std::vector<double>(
        c.sim.treat_alpha.data(), c.sim.treat_alpha.data() + c.sim.treat_alpha.size());
    j["g"] = {{"intercept", c.sim.g.intercept}, {"z_own", c.sim.g.z_own},
              {"z_nbr", c.sim.g.z_nbr},         {"gamma1", c.sim.g.gamma1},
              {"gamma2", c.sim.g.gamma2},       {"gamma3", c.sim.g.gamma3},
              {"gamma4", c.sim.g.gamma4}};
    j["g"]["x_own"] = {c.sim.g.x_own[0], c.sim.g.x_own[1]};
    j["g"]["x_nbr"] = {c.sim.g.x_nbr[0], c.sim.g.x_nbr[1]};
    j["policy"] = {{"type", c.policy.type},       {"pi", c.policy.pi},
                   {"alpha0", c.policy.alpha0},   {"value", c.policy.value},
                   {"feature", c.policy.feature}, {"quantile", c.policy.quantile},
                   {"assign", c.policy.assign},   {"other", c.policy.other}};
    j["policy"]["alpha"] = std::vector<double>(
        c.policy.alpha.data(), c.policy.alpha.data() + c.policy.alpha.size());
    j["study"] = {{"basis", c.basis},
                  {"lambda", c.lambda},
                  {"replications", c.replications},
                  {"n_boot", c.n_boot},
                  {"outer_m", c.outer_m},
                  {"inner_b", c.inner_b},
                  {"seed", c.master_seed},
                  {"oracle_n_mc", c.oracle_n_mc}};
    j["study"]["methods"] = nlohmann::json::array();
    for (Method m : c.methods) j["study"]["methods"].push_back(method_name(m));
    j["kde"] = {{"bandwidth_multiplier", c.kde.bandwidth_multiplier},
                {"kappa_clip", c.kde.kappa_clip},
                {"n_star_draws", c.kde.n_star_draws}};
    j["data"] = {{"log1p", c.data_log1p},
                 {"standardize", c.data_standardize},
                 {"summary", c.summary == SummaryMode::Mean ? "mean" : "sum"}};
    return j;
}

namespace {

nlohmann::json method_result_json(const MethodResult& r) {
    nlohmann::json j;
    j["method"] = method_name(r.method);
    j["ok"] = r.ok;
    if (!r.ok) {
        j["error"] = r.error;
    } else {
        j["psi_hat"] = r.psi_hat;
        j["se"] = r.se;
        j["ci"] = {r.ci_lo, r.ci_hi};
        j["rho_hat0"] = r.rho_hat0;
        j["t_star"] = r.t_star;
        j["sigma2_y_part"] = r.sigma2_y_part;
        j["sigma2_x_part"] = r.sigma2_x_part;
    }
    j["timing"] = {{"runtime_s", r.runtime_s}};
    return j;
}

}  // namespace

nlohmann::json study_report_json(const ExperimentConfig& config,
                                 const MetricsTable& table) {
    nlohmann::json j;
    j["artifact"] = "netar";
    j["config"] = config_json(config);
    // execution detail that cannot affect results; segregated like timing
    j["timing"] = {{"workers", config.workers}};
    j["psi_true"] = table.psi_true;
    j["oracle_mc_se"] = table.oracle_mc_se;
    j["oracle_noise_warning"] = table.oracle_noise_warning;
    j["metrics"] = nlohmann::json::array();
    for (const auto& m : table.metrics) {
        nlohmann::json row;
        row["method"] = method_name(m.method);
        row["n_ok"] = m.n_ok;
        row["bias"] = m.bias;
        row["se"] = m.se_empirical;
        row["cp"] = m.cp;
        row["mean_se"] = m.mean_se;
        row["timing"] = {{"mean_runtime_s", m.mean_runtime_s}};
        j["metrics"].push_back(row);
    }
    j["replications"] = nlohmann::json::array();
    for (const auto& rep : table.replications) {
        nlohmann::json row;
        row["r"] = rep.r;
        row["methods"] = nlohmann::json::array();
        for (const auto& m : rep.methods) row["methods"].push_back(method_result_json(m));
        j["replications"].push_back(row);
    }
    return j;
}

nlohmann::json estimate_report_json(const ExperimentConfig& config,
                                    const std::vector<MethodResult>& results,
                                    int n_dropped_isolated) {
    nlohmann::json j;
    j["artifact"] = "netar";
    j["config"] = config_json(config);
    j["n_dropped_isolated"] = n_dropped_isolated;
    j["methods"] = nlohmann::json::array();
    for (const auto& r : results) j["methods"].push_back(method_result_json(r));
    return j;
}

nlohmann::json strip_timing(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("timing");
        for (auto& [key, value] : j.items()) value = strip_timing(value);
    } else if (j.is_array()) {
        for (auto& value : j) value = strip_timing(value);
    }
    return j;
}

std::string metrics_csv(const MetricsTable& table) {
    std::ostringstream out;
    out << "method,bias,se,cp,mean_se,runtime_s\n";
    out.precision(10);
    for (const auto& m : table.metrics)
        out << method_name(m.method) << ',' << m.bias << ',' << m.se_empirical << ','
            << m.cp << ',' << m.mean_se << ',' << m.mean_runtime_s << '\n';
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace netar

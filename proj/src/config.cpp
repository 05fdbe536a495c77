#include "netar/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace netar {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line) + ": " + what);
}

ConfigValue parse_scalar(const std::string& tok, int line) {
    ConfigValue v;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.kind = ConfigValue::Kind::String;
        v.text = tok.substr(1, tok.size() - 2);
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.kind = ConfigValue::Kind::Boolean;
        v.boolean = tok == "true";
        return v;
    }
    try {
        std::size_t pos = 0;
        v.number = std::stod(tok, &pos);
        if (pos != tok.size()) fail(line, "trailing characters in number '" + tok + "'");
    } catch (const std::invalid_argument&) {
        fail(line, "unparseable value '" + tok + "'");
    }
    return v;
}

ConfigValue parse_value(const std::string& raw, int line) {
    const std::string tok = trim(raw);
    if (tok.empty()) fail(line, "missing value");
    if (tok.front() == '[') {
        if (tok.back() != ']') fail(line, "unterminated array");
        ConfigValue v;
        v.kind = ConfigValue::Kind::Array;
        std::string inner = tok.substr(1, tok.size() - 2);
        std::string item;
        std::stringstream ss(inner);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail(line, "empty array element");
            v.items.push_back(parse_scalar(item, line));
        }
        return v;
    }
    return parse_scalar(tok, line);
}

// strips an unquoted # comment
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

}  // namespace

ConfigTree parse_config_text(const std::string& text) {
    ConfigTree tree;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail(line_no, "empty section name");
            tree[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail(line_no, "empty key");
        if (tree[section].count(key))
            fail(line_no, "duplicate key '" + key + "' in section [" + section + "]");
        tree[section][key] = parse_value(line.substr(eq + 1), line_no);
    }
    return tree;
}

ConfigTree parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string method_name(Method m) {
    switch (m) {
        case Method::TMLE: return "TMLE";
        case Method::DE: return "DE";
        case Method::NDI: return "NDI";
        case Method::ANI: return "ANI";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "TMLE") return Method::TMLE;
    if (name == "DE") return Method::DE;
    if (name == "NDI") return Method::NDI;
    if (name == "ANI") return Method::ANI;
    throw std::runtime_error("unknown method '" + name + "'");
}

GraphPtr NetworkSpec::build(std::uint64_t seed) const {
    Rng rng(seed);
    if (type == "block") {
        const int k = n_blocks > 0 ? n_blocks : std::max(1, n_nodes / 20);
        const double po = p_out >= 0.0 ? p_out : 0.3 / n_nodes;
        return std::make_shared<const AdjacencyGraph>(
            gen_block(n_nodes, k, p_in, po, rng));
    }
    if (type == "powerlaw")
        return std::make_shared<const AdjacencyGraph>(gen_powerlaw(n_nodes, m_attach, rng));
    if (type == "file") {
        if (edges_path.empty())
            throw std::runtime_error("network type 'file' requires edges_path");
        const auto pairs = read_edge_csv(edges_path);
        int n = 0;
        for (const auto& [a, b] : pairs) n = std::max({n, a + 1, b + 1});
        return std::make_shared<const AdjacencyGraph>(AdjacencyGraph::build(pairs, n));
    }
    throw std::runtime_error("unknown network type '" + type + "'");
}

InterventionPolicy PolicySpec::build() const {
    if (type == "stochastic") return InterventionPolicy::stochastic(pi);
    if (type == "stochastic_logit")
        return InterventionPolicy::stochastic_logit(alpha, alpha0);
    if (type == "deterministic") return InterventionPolicy::deterministic(value);
    if (type == "dynamic_threshold")
        return InterventionPolicy::dynamic_threshold(feature, quantile, assign, other);
    throw std::runtime_error("unknown policy type '" + type + "'");
}

namespace {

class SectionReader {
  public:
    SectionReader(const ConfigTree& tree, const std::string& name) : name_(name) {
        auto it = tree.find(name);
        if (it != tree.end()) kv_ = &it->second;
    }
    ~SectionReader() = default;

    bool present() const { return kv_ != nullptr; }

    const ConfigValue* find(const std::string& key) {
        seen_.insert(key);
        if (!kv_) return nullptr;
        auto it = kv_->find(key);
        return it == kv_->end() ? nullptr : &it->second;
    }

    double number(const std::string& key, double fallback) {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Number) bad_type(key, "number");
        return v->number;
    }
    int integer(const std::string& key, int fallback) {
        const double d = number(key, fallback);
        const int i = static_cast<int>(d);
        if (static_cast<double>(i) != d)
            throw std::runtime_error("config key [" + name_ + "] " + key +
                                     ": expected an integer");
        return i;
    }
    std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Number || v->number < 0) bad_type(key, "seed");
        return static_cast<std::uint64_t>(v->number);
    }
    std::string text(const std::string& key, const std::string& fallback) {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::String) bad_type(key, "string");
        return v->text;
    }
    bool flag(const std::string& key, bool fallback) {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Boolean) bad_type(key, "boolean");
        return v->boolean;
    }
    Eigen::VectorXd vec(const std::string& key, const Eigen::VectorXd& fallback) {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Array) bad_type(key, "array");
        Eigen::VectorXd out(static_cast<int>(v->items.size()));
        for (int i = 0; i < out.size(); ++i) {
            if (v->items[i].kind != ConfigValue::Kind::Number) bad_type(key, "number array");
            out[i] = v->items[i].number;
        }
        return out;
    }
    std::vector<std::string> strings(const std::string& key,
                                     std::vector<std::string> fallback) {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Array) bad_type(key, "array");
        std::vector<std::string> out;
        for (const auto& item : v->items) {
            if (item.kind != ConfigValue::Kind::String) bad_type(key, "string array");
            out.push_back(item.text);
        }
        return out;
    }

    void finish() const {
        if (!kv_) return;
        for (const auto& [key, value] : *kv_)
            if (!seen_.count(key))
                throw std::runtime_error("unknown config key '" + key +
                                         "' in section [" + name_ + "]");
    }

  private:
    [[noreturn]] void bad_type(const std::string& key, const std::string& want) {
        throw std::runtime_error("config key [" + name_ + "] " + key + ": expected " +
                                 want);
    }
    std::string name_;
    const std::map<std::string, ConfigValue>* kv_ = nullptr;
    std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig experiment_from_tree(const ConfigTree& tree) {
    const std::set<std::string> known_sections{"",       "network", "sim", "g",
                                              "policy", "study",   "kde", "data"};
    for (const auto& [name, kv] : tree) {
        if (!known_sections.count(name))
            throw std::runtime_error("unknown config section [" + name + "]");
        if (name.empty() && !kv.empty())
            throw std::runtime_error("top-level key '" + kv.begin()->first +
                                     "' outside any section");
    }
    ExperimentConfig cfg;

    SectionReader net(tree, "network");
    cfg.network.type = net.text("type", cfg.network.type);
    cfg.network.n_nodes = net.integer("n_nodes", cfg.network.n_nodes);
    cfg.network.n_blocks = net.integer("n_blocks", cfg.network.n_blocks);
    cfg.network.p_in = net.number("p_in", cfg.network.p_in);
    cfg.network.p_out = net.number("p_out", cfg.network.p_out);
    cfg.network.m_attach = net.integer("m_attach", cfg.network.m_attach);
    cfg.network.edges_path = net.text("edges_path", cfg.network.edges_path);
    cfg.network.regenerate_per_replication =
        net.flag("regenerate_per_replication", false);
    net.finish();

    SectionReader sim(tree, "sim");
    cfg.sim.rho0 = sim.number("rho0", cfg.sim.rho0);
    cfg.sim.noise_sd = sim.number("noise_sd", cfg.sim.noise_sd);
    const std::string nk = sim.text("noise_kind", "gaussian");
    if (nk == "gaussian")
        cfg.sim.noise_kind = NoiseKind::Gaussian;
    else if (nk == "uniform")
        cfg.sim.noise_kind = NoiseKind::Uniform;
    else
        throw std::runtime_error("unknown noise_kind '" + nk + "'");
    cfg.sim.treat_alpha0 = sim.number("treat_alpha0", cfg.sim.treat_alpha0);
    cfg.sim.treat_alpha = sim.vec("treat_alpha", cfg.sim.treat_alpha);
    cfg.sim.delta_rho = sim.number("delta_rho", cfg.sim.delta_rho);
    sim.finish();

    SectionReader g(tree, "g");
    cfg.sim.g.intercept = g.number("intercept", cfg.sim.g.intercept);
    cfg.sim.g.z_own = g.number("z_own", cfg.sim.g.z_own);
    cfg.sim.g.z_nbr = g.number("z_nbr", cfg.sim.g.z_nbr);
    const Eigen::VectorXd x_own = g.vec("x_own", cfg.sim.g.x_own);
    const Eigen::VectorXd x_nbr = g.vec("x_nbr", cfg.sim.g.x_nbr);
    if (x_own.size() != 2 || x_nbr.size() != 2)
        throw std::runtime_error("config [g] x_own/x_nbr must have 2 entries");
    cfg.sim.g.x_own = x_own;
    cfg.sim.g.x_nbr = x_nbr;
    cfg.sim.g.gamma1 = g.number("gamma1", cfg.sim.g.gamma1);
    cfg.sim.g.gamma2 = g.number("gamma2", cfg.sim.g.gamma2);
    cfg.sim.g.gamma3 = g.number("gamma3", cfg.sim.g.gamma3);
    cfg.sim.g.gamma4 = g.number("gamma4", cfg.sim.g.gamma4);
    g.finish();

    SectionReader pol(tree, "policy");
    cfg.policy.type = pol.text("type", cfg.policy.type);
    cfg.policy.pi = pol.number("pi", cfg.policy.pi);
    cfg.policy.alpha = pol.vec("alpha", cfg.policy.alpha);
    cfg.policy.alpha0 = pol.number("alpha0", cfg.policy.alpha0);
    cfg.policy.value = pol.number("value", cfg.policy.value);
    cfg.policy.feature = pol.integer("feature", cfg.policy.feature);
    cfg.policy.quantile = pol.number("quantile", cfg.policy.quantile);
    cfg.policy.assign = pol.number("assign", cfg.policy.assign);
    cfg.policy.other = pol.number("other", cfg.policy.other);
    pol.finish();

    SectionReader study(tree, "study");
    {
        std::vector<std::string> names;
        for (Method m : cfg.methods) names.push_back(method_name(m));
        names = study.strings("methods", names);
        cfg.methods.clear();
        for (const std::string& n : names) cfg.methods.push_back(method_from_name(n));
    }
    cfg.basis = study.text("basis", cfg.basis);
    (void)BasisSpec::from_name(cfg.basis);  // validate now
    cfg.lambda = study.number("lambda", cfg.lambda);
    cfg.replications = study.integer("replications", cfg.replications);
    cfg.n_boot = study.integer("n_boot", cfg.n_boot);
    cfg.outer_m = study.integer("outer_m", cfg.outer_m);
    cfg.inner_b = study.integer("inner_b", cfg.inner_b);
    cfg.master_seed = study.u64("seed", cfg.master_seed);
    cfg.oracle_n_mc = study.integer("oracle_n_mc", cfg.oracle_n_mc);
    cfg.workers = study.integer("workers", cfg.workers);
    study.finish();

    SectionReader kde(tree, "kde");
    cfg.kde.bandwidth_multiplier =
        kde.number("bandwidth_multiplier", cfg.kde.bandwidth_multiplier);
    cfg.kde.kappa_clip = kde.number("kappa_clip", cfg.kde.kappa_clip);
    cfg.kde.n_star_draws = kde.integer("n_star_draws", cfg.kde.n_star_draws);
    kde.finish();

    SectionReader data(tree, "data");
    cfg.data_log1p = data.flag("log1p", cfg.data_log1p);
    cfg.data_standardize = data.flag("standardize", cfg.data_standardize);
    const std::string sm = data.text("summary", "mean");
    if (sm == "mean")
        cfg.summary = SummaryMode::Mean;
    else if (sm == "sum")
        cfg.summary = SummaryMode::Sum;
    else
        throw std::runtime_error("unknown summary mode '" + sm + "'");
    data.finish();

    if (cfg.replications < 1)
        throw std::runtime_error("config: replications must be >= 1");
    if (cfg.n_boot < 1) throw std::runtime_error("config: n_boot must be >= 1");
    cfg.sim.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_from_tree(parse_config_file(path));
}

}  // namespace netar

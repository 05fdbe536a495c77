#include "netar/semgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace netar {

void SimConfig::validate() const {
    check_rho(rho0, delta_rho);
    if (!(noise_sd >= 0.0))
        throw std::invalid_argument("SimConfig: noise_sd must be >= 0");
    if (treat_alpha.size() != 2 * x_dim)
        throw std::invalid_argument("SimConfig: treat_alpha must have 2p entries");
}

double true_g(const Eigen::Ref<const Eigen::RowVectorXd>& v,
              const Eigen::Ref<const Eigen::RowVectorXd>& c,
              const GCoefficients& k) {
    const double z = v[0], x1 = c[0], x2 = c[1];
    return k.intercept + k.z_own * z + k.z_nbr * v[1] + k.x_own[0] * x1 +
           k.x_own[1] * x2 + k.x_nbr[0] * c[2] + k.x_nbr[1] * c[3] +
           k.gamma1 * z * x1 + k.gamma2 * x1 * x1 + k.gamma3 * x2 * x2 +
           k.gamma4 * x2 * x2 * x2;
}

Eigen::MatrixXd summarize_z(const Eigen::VectorXd& z, const AdjacencyGraph& graph,
                            SummaryMode mode) {
    const int n = graph.n_nodes();
    if (z.size() != n) throw std::invalid_argument("summarize_z: dimension mismatch");
    Eigen::MatrixXd v(n, 2);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j : graph.neighbors(i)) s += z[j];
        if (mode == SummaryMode::Mean) s /= graph.degree(i);
        v(i, 0) = z[i];
        v(i, 1) = s;
    }
    return v;
}

Eigen::MatrixXd summarize_x(const Eigen::MatrixXd& x, const AdjacencyGraph& graph,
                            SummaryMode mode) {
    const int n = graph.n_nodes();
    const int p = static_cast<int>(x.cols());
    if (x.rows() != n) throw std::invalid_argument("summarize_x: dimension mismatch");
    Eigen::MatrixXd c(n, 2 * p);
    for (int i = 0; i < n; ++i) {
        c.row(i).head(p) = x.row(i);
        Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(p);
        for (int j : graph.neighbors(i)) s += x.row(j);
        if (mode == SummaryMode::Mean) s /= graph.degree(i);
        c.row(i).tail(p) = s;
    }
    return c;
}

void Dataset::refresh_summaries() {
    v = summarize_z(z, *graph, summary);
    c = summarize_x(x, *graph, summary);
}

InterventionPolicy InterventionPolicy::stochastic(double pi) {
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("stochastic policy: need 0 < pi < 1 (positivity)");
    InterventionPolicy p;
    p.kind_ = Kind::Stochastic;
    p.pi_ = pi;
    return p;
}

InterventionPolicy InterventionPolicy::stochastic_logit(Eigen::VectorXd alpha,
                                                        double alpha0) {
    InterventionPolicy p;
    p.kind_ = Kind::Stochastic;
    p.logit_ = true;
    p.alpha_ = std::move(alpha);
    p.alpha0_ = alpha0;
    return p;
}

InterventionPolicy InterventionPolicy::deterministic(double value) {
    InterventionPolicy p;
    p.kind_ = Kind::Deterministic;
    p.det_value_ = value;
    return p;
}

InterventionPolicy InterventionPolicy::dynamic_threshold(int feature, double quantile,
                                                         double assign, double other) {
    if (!(quantile > 0.0 && quantile < 1.0))
        throw std::invalid_argument("dynamic_threshold policy: need 0 < quantile < 1");
    InterventionPolicy p;
    p.kind_ = Kind::DynamicThreshold;
    p.feature_ = feature;
    p.quantile_ = quantile;
    p.assign_ = assign;
    p.other_ = other;
    return p;
}

double InterventionPolicy::prob_treat(const Eigen::Ref<const Eigen::RowVectorXd>& c_i) const {
    if (kind_ != Kind::Stochastic)
        throw std::logic_error("prob_treat: policy is not stochastic");
    if (!logit_) return pi_;
    if (alpha_.size() != c_i.size())
        throw std::invalid_argument("stochastic_logit policy: alpha/c dimension mismatch");
    return logistic(alpha0_ + c_i * alpha_);
}

double InterventionPolicy::density(double z, const Eigen::Ref<const Eigen::RowVectorXd>& c_i) const {
    const double p = prob_treat(c_i);
    return z > 0.5 ? p : 1.0 - p;
}

Eigen::VectorXd InterventionPolicy::sample(const Eigen::MatrixXd& c, Rng& rng) const {
    const int n = static_cast<int>(c.rows());
    Eigen::VectorXd z(n);
    switch (kind_) {
        case Kind::Stochastic:
            for (int i = 0; i < n; ++i)
                z[i] = rng.bernoulli(prob_treat(c.row(i))) ? 1.0 : 0.0;
            break;
        case Kind::Deterministic:
            z.setConstant(det_value_);
            break;
        case Kind::DynamicThreshold: {
            if (feature_ < 0 || feature_ >= c.cols())
                throw std::invalid_argument("dynamic_threshold policy: feature out of range");
            std::vector<double> vals(n);
            for (int i = 0; i < n; ++i) vals[i] = c(i, feature_);
            std::vector<double> sorted = vals;
            std::sort(sorted.begin(), sorted.end());
            const int idx = std::min(n - 1, static_cast<int>(quantile_ * n));
            const double thr = sorted[idx];
            for (int i = 0; i < n; ++i) z[i] = vals[i] >= thr ? assign_ : other_;
            break;
        }
    }
    return z;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> sample_intervention(
    const InterventionPolicy& policy, const Eigen::MatrixXd& c,
    const AdjacencyGraph& graph, Rng& rng, SummaryMode mode) {
    Eigen::VectorXd z_star = policy.sample(c, rng);
    return {z_star, summarize_z(z_star, graph, mode)};
}

namespace {

Eigen::MatrixXd draw_x(int n, int p, Rng& rng) {
    Eigen::MatrixXd x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
    return x;
}

double draw_noise(const SimConfig& cfg, Rng& rng) {
    if (cfg.noise_kind == NoiseKind::Gaussian) return cfg.noise_sd * rng.normal();
    // uniform with matching sd
    return cfg.noise_sd * std::sqrt(3.0) * rng.uniform(-1.0, 1.0);
}

}  // namespace

Dataset gen_dataset(const SimConfig& config, GraphPtr graph, Rng& rng) {
    config.validate();
    const int n = graph->n_nodes();
    Dataset d;
    d.graph = graph;
    d.x = draw_x(n, SimConfig::x_dim, rng);
    d.c = summarize_x(d.x, *graph, SummaryMode::Mean);
    d.z.resize(n);
    for (int i = 0; i < n; ++i) {
        const double eta = config.treat_alpha0 + d.c.row(i) * config.treat_alpha;
        d.z[i] = rng.bernoulli(logistic(eta)) ? 1.0 : 0.0;
    }
    d.v = summarize_z(d.z, *graph, SummaryMode::Mean);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i)
        r[i] = true_g(d.v.row(i), d.c.row(i), config.g) + draw_noise(config, rng);
    RowStochasticW w(graph);
    d.y = solve_sar(w, config.rho0, r, config.delta_rho);
    return d;
}

OracleResult oracle_psi(const SimConfig& config, GraphPtr graph,
                        const InterventionPolicy& policy, int n_mc, Rng& rng) {
    config.validate();
    if (n_mc < 1000) throw std::invalid_argument("oracle_psi: n_mc must be >= 1000");
    const int n = graph->n_nodes();
    RowStochasticW w(graph);
    double sum = 0.0, sumsq = 0.0;
    Eigen::VectorXd r(n);
    for (int t = 0; t < n_mc; ++t) {
        Eigen::MatrixXd x = draw_x(n, SimConfig::x_dim, rng);
        Eigen::MatrixXd c = summarize_x(x, *graph, SummaryMode::Mean);
        auto [z_star, v_star] = sample_intervention(policy, c, *graph, rng);
        for (int i = 0; i < n; ++i)
            r[i] = true_g(v_star.row(i), c.row(i), config.g) + draw_noise(config, rng);
        const double ybar = solve_sar(w, config.rho0, r, config.delta_rho).mean();
        sum += ybar;
        sumsq += ybar * ybar;
    }
    OracleResult out;
    out.n_mc = n_mc;
    out.psi_true = sum / n_mc;
    const double var = std::max(0.0, sumsq / n_mc - out.psi_true * out.psi_true);
    out.mc_se = std::sqrt(var / n_mc);
    return out;
}

}  // namespace netar

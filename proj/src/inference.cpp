#include "netar/inference.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace netar {

std::pair<double, double> sigma_y_hat(const TargetedModel& model,
                                      const Dataset& dataset) {
    const int n = dataset.n();
    const Eigen::VectorXd r0 = residualize(dataset, model.rho_hat0);
    Eigen::VectorXd g0_values;
    model.g_hat0->evaluate_batch(dataset.v, dataset.c, g0_values);
    const Eigen::VectorXd resid =
        r0 - g0_values - model.t_star * model.omega_hat;
    const double sigma2_y = resid.squaredNorm() / n;
    const double part = model.omega_hat.squaredNorm() * sigma2_y /
                        (static_cast<double>(n) * n);
    return {part, sigma2_y};
}

double sigma_x_bootstrap(const TargetedModel& model, const Dataset& dataset,
                         const InterventionPolicy& policy, int outer_m,
                         int inner_b, std::uint64_t seed) {
    if (outer_m < 2 || inner_b < 1)
        throw std::invalid_argument("sigma_x_bootstrap: need M >= 2 and B >= 1");
    const int n = dataset.n();
    std::vector<double> outer_means(outer_m);
    for (int m = 0; m < outer_m; ++m) {
        Rng outer_rng(derive_seed(seed, {static_cast<std::uint64_t>(m), 0}));
        Eigen::MatrixXd x_m(n, dataset.x.cols());
        for (int i = 0; i < n; ++i) x_m.row(i) = dataset.x.row(outer_rng.uniform_int(n));
        double acc = 0.0;
        for (int b = 0; b < inner_b; ++b) {
            Rng inner_rng(derive_seed(
                seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(b) + 1}));
            acc += psi_replicate(model, x_m, *dataset.graph, dataset.summary, policy,
                                 inner_rng);
        }
        outer_means[m] = acc / inner_b;
    }
    double mean = 0.0;
    for (double v : outer_means) mean += v;
    mean /= outer_m;
    double ss = 0.0;
    for (double v : outer_means) ss += (v - mean) * (v - mean);
    return ss / outer_m;
}

VarianceEstimate variance_nested_bootstrap(const TargetedModel& model,
                                           const Dataset& dataset,
                                           const InterventionPolicy& policy,
                                           int outer_m, int inner_b,
                                           std::uint64_t seed) {
    VarianceEstimate v;
    v.method = "nested-bootstrap";
    v.outer_m = outer_m;
    v.inner_b = inner_b;
    v.sigma2_y_part = sigma_y_hat(model, dataset).first;
    v.sigma2_x_part = sigma_x_bootstrap(model, dataset, policy, outer_m, inner_b, seed);
    return v;
}

namespace {

// row-major so that row(j).data() is contiguous over the p covariates
using RowMajorXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Scalar evaluation of f_i: given covariate rows for every node in D_i,
// draw z* over the closed neighborhood from per-node uniforms and evaluate
// the outcome model at node i. `x_at(j)` must be valid for all j in D_i.
template <typename XAt>
double f_eval_node(int i, const AdjacencyGraph& graph,
                   const std::vector<int>& closed_i, XAt&& x_at,
                   const double* z_uniforms, const InterventionPolicy& policy,
                   const GModel* g, const GCoefficients* g_true, int p,
                   Eigen::RowVectorXd& cbuf, Eigen::RowVectorXd& cbuf_i,
                   Eigen::RowVectorXd& vbuf) {
    double z_i = 0.0, z_nbr_sum = 0.0;
    const int deg_i = graph.degree(i);
    for (std::size_t a = 0; a < closed_i.size(); ++a) {
        const int j = closed_i[a];
        // c_j from x over the closed neighborhood of j (all inside D_i)
        for (int d = 0; d < p; ++d) cbuf[d] = x_at(j)[d];
        for (int d = 0; d < p; ++d) cbuf[p + d] = 0.0;
        for (int r : graph.neighbors(j))
            for (int d = 0; d < p; ++d) cbuf[p + d] += x_at(r)[d];
        const double inv = 1.0 / graph.degree(j);
        for (int d = 0; d < p; ++d) cbuf[p + d] *= inv;
        double zj;
        if (policy.is_deterministic_rule())
            zj = policy.deterministic_value();
        else
            zj = z_uniforms[a] < policy.prob_treat(cbuf) ? 1.0 : 0.0;
        if (j == i) {
            z_i = zj;
            cbuf_i = cbuf;
        } else {
            z_nbr_sum += zj;
        }
    }
    vbuf[0] = z_i;
    vbuf[1] = z_nbr_sum / deg_i;
    if (g_true) return true_g(vbuf, cbuf_i, *g_true);
    return g->evaluate(vbuf, cbuf_i);
}

}  // namespace

double sigma_x_projection_oracle(const TargetedModel& model, const Dataset& dataset,
                                 const InterventionPolicy& policy, int n_mc,
                                 std::uint64_t seed) {
    const int n = dataset.n();
    if (n > 100)
        throw std::invalid_argument(
            "sigma_x_projection_oracle: N > 100; use sigma_x_bootstrap instead");
    if (n_mc < 1000)
        throw std::invalid_argument("sigma_x_projection_oracle: need n_mc >= 1000");
    if (policy.kind() == InterventionPolicy::Kind::DynamicThreshold)
        throw std::invalid_argument(
            "sigma_x_projection_oracle: dynamic-threshold policies are not supported");
    const AdjacencyGraph& graph = *dataset.graph;
    const NeighborhoodIndex idx = neighborhoods(graph);
    const int p = dataset.p();

    RowMajorXd xa = dataset.x;  // scratch covariates, rows overwritten on D_i
    Eigen::RowVectorXd cbuf(2 * p), cbuf_i(2 * p), vbuf(2);
    Eigen::VectorXd h_hat = Eigen::VectorXd::Zero(n);
    const auto x_at = [&](int j) { return xa.row(j).data(); };

    for (int i = 0; i < n; ++i) {
        const auto& d_i = idx.two_hop[i];
        const auto& closed_i = idx.closed[i];
        std::vector<double> uz(closed_i.size());
        const double w_i = model.omega_hat[i];
        for (std::size_t kk = 0; kk < d_i.size(); ++kk) {
            const int k = d_i[kk];
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(i),
                                       static_cast<std::uint64_t>(k)}));
            for (int t = 0; t < n_mc; ++t) {
                for (int j : d_i)
                    if (j != k) xa.row(j) = dataset.x.row(rng.uniform_int(n));
                for (auto& u : uz) u = rng.uniform();
                // common draws across all candidate values of X_k
                for (int l = 0; l < n; ++l) {
                    xa.row(k) = dataset.x.row(l);
                    const double f =
                        f_eval_node(i, graph, closed_i, x_at, uz.data(), policy,
                                    model.g_hat0.get(), nullptr, p, cbuf, cbuf_i, vbuf) +
                        model.t_star * w_i;
                    h_hat[l] += w_i * f;
                }
            }
            // restore the scratch rows
            for (int j : d_i) xa.row(j) = dataset.x.row(j);
        }
    }
    h_hat /= static_cast<double>(n_mc) * n;  // the N^{-1} in h plus the MC average
    const double mean = h_hat.mean();
    return (h_hat.array() - mean).square().sum() / (static_cast<double>(n) * n);
}

std::pair<double, double> confidence_interval(double psi_hat,
                                              const VarianceEstimate& variance,
                                              double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence_interval: need 0 < level < 1");
    const double z = normal_quantile(0.5 + level / 2.0);
    const double half = z * variance.se();
    return {psi_hat - half, psi_hat + half};
}

// Acklam's rational approximation of the inverse normal CDF, |error| < 1.2e-9.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: need 0 < p < 1");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

HGVariances hg_efficiency_oracle(const SimConfig& config, GraphPtr graph,
                                 const InterventionPolicy& policy, int n_reps,
                                 std::uint64_t seed, int n_mc_inner) {
    config.validate();
    const int n = graph->n_nodes();
    if (n > 60) throw std::invalid_argument("hg_efficiency_oracle: small N (<= 60) only");
    if (n_reps < 500)
        throw std::invalid_argument("hg_efficiency_oracle: need n_reps >= 500");
    if (policy.kind() == InterventionPolicy::Kind::DynamicThreshold)
        throw std::invalid_argument(
            "hg_efficiency_oracle: dynamic-threshold policies are not supported");
    const AdjacencyGraph& g = *graph;
    const NeighborhoodIndex idx = neighborhoods(g);
    constexpr int p = SimConfig::x_dim;
    RowStochasticW w(graph);
    const Eigen::VectorXd omega0 = omega(w, config.rho0, config.delta_rho);

    // Common random numbers, fixed across replications: per node a table of
    // treatment uniforms, and per node a table of covariate draws covering
    // its two-hop set (used by the conditional expectations inside h).
    Rng crn_rng(derive_seed(seed, {0xC0FFEE}));
    std::vector<RowMajorXd> uz(n), xt(n);
    for (int i = 0; i < n; ++i) {
        uz[i].resize(n_mc_inner, static_cast<int>(idx.closed[i].size()));
        for (int t = 0; t < n_mc_inner; ++t)
            for (int a = 0; a < uz[i].cols(); ++a) uz[i](t, a) = crn_rng.uniform();
        xt[i].resize(n_mc_inner, static_cast<int>(idx.two_hop[i].size()) * p);
        for (int t = 0; t < n_mc_inner; ++t)
            for (int a = 0; a < xt[i].cols(); ++a) xt[i](t, a) = crn_rng.normal();
    }
    // map global node -> slot within D_i
    std::vector<std::vector<int>> slot(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i)
        for (std::size_t a = 0; a < idx.two_hop[i].size(); ++a)
            slot[i][idx.two_hop[i][a]] = static_cast<int>(a);

    Eigen::RowVectorXd cbuf(2 * p), cbuf_i(2 * p), vbuf(2);

    Rng rep_rng(derive_seed(seed, {1}));
    std::vector<double> g_stat(n_reps), h_stat(n_reps);
    RowMajorXd x(n, p);
    for (int rep = 0; rep < n_reps; ++rep) {
        for (int i = 0; i < n; ++i)
            for (int d = 0; d < p; ++d) x(i, d) = rep_rng.normal();

        // raw statistic: G = N^{-1} sum_i omega_i f_i(x_{D_i})
        double acc_g = 0.0;
        for (int i = 0; i < n; ++i) {
            double f = 0.0;
            for (int t = 0; t < n_mc_inner; ++t)
                f += f_eval_node(
                    i, g, idx.closed[i], [&](int j) { return x.row(j).data(); },
                    uz[i].row(t).data(), policy, nullptr, &config.g, p, cbuf, cbuf_i,
                    vbuf);
            acc_g += omega0[i] * f / n_mc_inner;
        }
        g_stat[rep] = acc_g / n;

        // Hajek projection: H = N^{-1} sum_l h(x_l) with
        // h(xi) = N^{-1} sum_i sum_{k in D_i} omega_i E[f_i | X_k = xi]
        double acc_h = 0.0;
        for (int l = 0; l < n; ++l) {
            const double* xi = x.row(l).data();
            double h_val = 0.0;
            for (int i = 0; i < n; ++i) {
                const auto& d_i = idx.two_hop[i];
                for (int k : d_i) {
                    const int k_slot = slot[i][k];
                    double f = 0.0;
                    for (int t = 0; t < n_mc_inner; ++t) {
                        const double* row = xt[i].row(t).data();
                        f += f_eval_node(
                            i, g, idx.closed[i],
                            [&](int j) {
                                const int s = slot[i][j];
                                return s == k_slot ? xi : row + s * p;
                            },
                            uz[i].row(t).data(), policy, nullptr, &config.g, p, cbuf,
                            cbuf_i, vbuf);
                    }
                    h_val += omega0[i] * f / n_mc_inner;
                }
            }
            acc_h += h_val / n;
        }
        h_stat[rep] = acc_h / n;
    }

    const auto empirical_var = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double s : v) mean += s;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double s : v) ss += (s - mean) * (s - mean);
        return ss / (static_cast<double>(v.size()) - 1.0);
    };
    return {empirical_var(h_stat), empirical_var(g_stat)};
}

}  // namespace netar

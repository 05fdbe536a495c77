#include "netar/tmle.hpp"

#include <cmath>
#include <stdexcept>

namespace netar {

double GModel::evaluate_node(const Eigen::Ref<const Eigen::RowVectorXd>& v,
                             const Eigen::Ref<const Eigen::RowVectorXd>& c) const {
    Eigen::MatrixXd vm = v, cm = c;
    Eigen::VectorXd out(1);
    evaluate_batch(vm, cm, out);
    return out[0];
}

double RidgeGModel::evaluate_node(const Eigen::Ref<const Eigen::RowVectorXd>& v,
                                  const Eigen::Ref<const Eigen::RowVectorXd>& c) const {
    const int p = static_cast<int>(c.size()) / 2;
    const BasisSpec& b = est_.basis;
    const Eigen::VectorXd& beta = est_.beta;
    int k = 0;
    double s = beta[k++];
    if (b.v_linear) {
        s += beta[k] * v[0] + beta[k + 1] * v[1];
        k += 2;
    }
    if (b.c_linear)
        for (int j = 0; j < 2 * p; ++j) s += beta[k++] * c[j];
    const double x1 = c[0], x2 = c[1];
    if (b.zx_interaction) s += beta[k++] * v[0] * x1;
    if (b.x1_sq) s += beta[k++] * x1 * x1;
    if (b.x2_sq) s += beta[k++] * x2 * x2;
    if (b.x2_cube) s += beta[k++] * x2 * x2 * x2;
    return s;
}

void RidgeGModel::evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                                 Eigen::VectorXd& out) const {
    const int n = static_cast<int>(v.rows());
    const int p = static_cast<int>(c.cols()) / 2;
    const BasisSpec& b = est_.basis;
    const Eigen::VectorXd& beta = est_.beta;
    out.resize(n);
    for (int i = 0; i < n; ++i) {
        int k = 0;
        double s = beta[k++];
        if (b.v_linear) {
            s += beta[k] * v(i, 0) + beta[k + 1] * v(i, 1);
            k += 2;
        }
        if (b.c_linear)
            for (int j = 0; j < 2 * p; ++j) s += beta[k++] * c(i, j);
        const double x1 = c(i, 0), x2 = c(i, 1);
        if (b.zx_interaction) s += beta[k++] * v(i, 0) * x1;
        if (b.x1_sq) s += beta[k++] * x1 * x1;
        if (b.x2_sq) s += beta[k++] * x2 * x2;
        if (b.x2_cube) s += beta[k++] * x2 * x2 * x2;
        out[i] = s;
    }
}

void TrueGModel::evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                                Eigen::VectorXd& out) const {
    const int n = static_cast<int>(v.rows());
    const GCoefficients& k = coeffs_;
    out.resize(n);
    for (int i = 0; i < n; ++i) {
        const double z = v(i, 0), x1 = c(i, 0), x2 = c(i, 1);
        out[i] = k.intercept + k.z_own * z + k.z_nbr * v(i, 1) + k.x_own[0] * x1 +
                 k.x_own[1] * x2 + k.x_nbr[0] * c(i, 2) + k.x_nbr[1] * c(i, 3) +
                 k.gamma1 * z * x1 + k.gamma2 * x1 * x1 + k.gamma3 * x2 * x2 +
                 k.gamma4 * x2 * x2 * x2;
    }
}

void FunctionGModel::evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                                    Eigen::VectorXd& out) const {
    const int n = static_cast<int>(v.rows());
    out.resize(n);
    for (int i = 0; i < n; ++i) out[i] = fn_(v.row(i), c.row(i));
}

Eigen::VectorXd residualize(const Dataset& dataset, double rho_hat0, double delta_rho) {
    check_rho(rho_hat0, delta_rho);
    RowStochasticW w(dataset.graph);
    return dataset.y - rho_hat0 * w.multiply(dataset.y);
}

double target_step(const Eigen::VectorXd& r_hat0, const Eigen::VectorXd& g0_values,
                   const Eigen::VectorXd& omega_hat) {
    const double denom = omega_hat.squaredNorm();
    if (!(denom > 0.0)) throw std::invalid_argument("target_step: omega must be nonzero");
    return omega_hat.dot(r_hat0 - g0_values) / denom;
}

TargetedModel make_targeted_model(const Dataset& dataset, double rho_hat0,
                                  GModelPtr g_hat0, bool target, double delta_rho) {
    TargetedModel m;
    m.rho_hat0 = rho_hat0;
    m.g_hat0 = std::move(g_hat0);
    RowStochasticW w(dataset.graph);
    m.omega_hat = omega(w, rho_hat0, delta_rho);
    if (target) {
        Eigen::VectorXd g0_values;
        m.g_hat0->evaluate_batch(dataset.v, dataset.c, g0_values);
        m.t_star = target_step(residualize(dataset, rho_hat0, delta_rho), g0_values,
                               m.omega_hat);
    }
    return m;
}

double plug_in_bias(const TargetedModel& model, const Dataset& dataset,
                    double delta_rho) {
    const Eigen::VectorXd r0 = residualize(dataset, model.rho_hat0, delta_rho);
    Eigen::VectorXd g0_values;
    model.g_hat0->evaluate_batch(dataset.v, dataset.c, g0_values);
    const Eigen::VectorXd gt = g0_values + model.t_star * model.omega_hat;
    return model.omega_hat.dot(r0 - gt) / model.n();
}

double PsiEstimate::replicate_sd() const {
    const auto b = static_cast<double>(replicates.size());
    if (b < 2) return 0.0;
    double mean = 0.0;
    for (double r : replicates) mean += r;
    mean /= b;
    double ss = 0.0;
    for (double r : replicates) ss += (r - mean) * (r - mean);
    return std::sqrt(ss / (b - 1.0));
}

double PsiEstimate::mc_se() const {
    if (replicates.empty()) return 0.0;
    return replicate_sd() / std::sqrt(static_cast<double>(replicates.size()));
}

double psi_replicate(const TargetedModel& model, const Eigen::MatrixXd& x_source,
                     const AdjacencyGraph& graph, SummaryMode mode,
                     const InterventionPolicy& policy, Rng& rng,
                     Eigen::MatrixXd* x_out) {
    const int n = graph.n_nodes();
    const int pool = static_cast<int>(x_source.rows());
    Eigen::MatrixXd xb(n, x_source.cols());
    for (int i = 0; i < n; ++i) xb.row(i) = x_source.row(rng.uniform_int(pool));
    const Eigen::MatrixXd cb = summarize_x(xb, graph, mode);
    const Eigen::VectorXd z_star = policy.sample(cb, rng);
    const Eigen::MatrixXd v_star = summarize_z(z_star, graph, mode);
    Eigen::VectorXd g_values;
    model.g_hat0->evaluate_batch(v_star, cb, g_values);
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += model.omega_hat[i] * (g_values[i] + model.t_star * model.omega_hat[i]);
    if (x_out) *x_out = std::move(xb);
    return acc / n;
}

PsiEstimate estimate_psi(const TargetedModel& model, const Dataset& dataset,
                         const InterventionPolicy& policy, int n_boot,
                         std::uint64_t seed) {
    if (n_boot < 1) throw std::invalid_argument("estimate_psi: need B >= 1");
    PsiEstimate est;
    est.replicates.resize(n_boot);
    double acc = 0.0;
    for (int b = 0; b < n_boot; ++b) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
        const double psi_b = psi_replicate(model, dataset.x, *dataset.graph,
                                           dataset.summary, policy, rng);
        est.replicates[b] = psi_b;
        acc += psi_b;
    }
    est.psi_hat = acc / n_boot;
    return est;
}

PsiEstimate estimate_psi_de(const InitialEstimate& initial, const Dataset& dataset,
                            const InterventionPolicy& policy, int n_boot,
                            std::uint64_t seed) {
    TargetedModel m = make_targeted_model(dataset, initial.rho_hat0,
                                          std::make_shared<RidgeGModel>(initial),
                                          /*target=*/false);
    return estimate_psi(m, dataset, policy, n_boot, seed);
}

}  // namespace netar

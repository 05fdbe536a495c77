#include "netar/competitors.hpp"

#include <cmath>
#include <stdexcept>

namespace netar {

void KdeConfig::validate() const {
    if (!(bandwidth_multiplier > 0.0))
        throw std::invalid_argument("KdeConfig: bandwidth_multiplier must be > 0");
    if (!(kappa_clip >= 1.0))
        throw std::invalid_argument("KdeConfig: kappa_clip must be >= 1");
    if (n_star_draws < 0)
        throw std::invalid_argument("KdeConfig: n_star_draws must be >= 0");
}

Eigen::VectorXd silverman_bandwidths(const Eigen::MatrixXd& samples,
                                     double multiplier) {
    const auto n = static_cast<double>(samples.rows());
    if (n < 2) throw std::invalid_argument("silverman_bandwidths: need >= 2 samples");
    Eigen::VectorXd h(samples.cols());
    const double scale = 1.06 * std::pow(n, -0.2) * multiplier;
    for (int d = 0; d < samples.cols(); ++d) {
        const double mean = samples.col(d).mean();
        const double sd =
            std::sqrt((samples.col(d).array() - mean).square().sum() / (n - 1.0));
        h[d] = std::max(scale * sd, KdeConfig::kBandwidthFloor);
    }
    return h;
}

namespace {

// Gaussian product-kernel density with precomputed bandwidths. Evaluates the
// joint over [v c] and the marginal over c in one pass so both share kernels.
struct JointKde {
    Eigen::MatrixXd v, c;          // samples
    Eigen::VectorXd hv, hc;        // per-dimension bandwidths
    double joint_norm, marg_norm;  // (2 pi)^{-d/2} / (n prod h)

    JointKde(Eigen::MatrixXd v_in, Eigen::MatrixXd c_in, const KdeConfig& cfg)
        : v(std::move(v_in)), c(std::move(c_in)) {
        const auto n = static_cast<double>(v.rows());
        hv = silverman_bandwidths(v, cfg.bandwidth_multiplier);
        hc = silverman_bandwidths(c, cfg.bandwidth_multiplier);
        const double dim = static_cast<double>(v.cols() + c.cols());
        joint_norm = std::pow(2.0 * M_PI, -dim / 2.0) /
                     (n * hv.prod() * hc.prod());
        marg_norm = std::pow(2.0 * M_PI, -static_cast<double>(c.cols()) / 2.0) /
                    (n * hc.prod());
    }

    // returns (joint KDE at (vq, cq), marginal KDE at cq)
    std::pair<double, double> evaluate(
        const Eigen::Ref<const Eigen::RowVectorXd>& vq,
        const Eigen::Ref<const Eigen::RowVectorXd>& cq) const {
        const int n = static_cast<int>(v.rows());
        double joint = 0.0, marg = 0.0;
        for (int s = 0; s < n; ++s) {
            double qc = 0.0;
            for (int d = 0; d < c.cols(); ++d) {
                const double u = (cq[d] - c(s, d)) / hc[d];
                qc += u * u;
            }
            const double kc = std::exp(-0.5 * qc);
            marg += kc;
            double qv = 0.0;
            for (int d = 0; d < v.cols(); ++d) {
                const double u = (vq[d] - v(s, d)) / hv[d];
                qv += u * u;
            }
            joint += kc * std::exp(-0.5 * qv);
        }
        return {joint * joint_norm, marg * marg_norm};
    }
};

double conditional_from(const JointKde& kde,
                        const Eigen::Ref<const Eigen::RowVectorXd>& vq,
                        const Eigen::Ref<const Eigen::RowVectorXd>& cq,
                        bool* floored) {
    const auto [joint, marg] = kde.evaluate(vq, cq);
    if (marg <= KdeConfig::kDensityFloor)
        throw std::domain_error(
            "conditional_density_kde: marginal density at query is below the floor");
    const double ratio = joint / marg;
    if (ratio <= KdeConfig::kDensityFloor) {
        if (floored) *floored = true;
        return KdeConfig::kDensityFloor;
    }
    return ratio;
}

}  // namespace

double conditional_density_kde(const Eigen::MatrixXd& v_samples,
                               const Eigen::MatrixXd& c_samples,
                               const Eigen::Ref<const Eigen::RowVectorXd>& v_query,
                               const Eigen::Ref<const Eigen::RowVectorXd>& c_query,
                               const KdeConfig& config) {
    config.validate();
    if (v_samples.rows() != c_samples.rows())
        throw std::invalid_argument("conditional_density_kde: sample count mismatch");
    if (v_samples.rows() < 20)
        throw std::invalid_argument("conditional_density_kde: need >= 20 samples");
    JointKde kde(v_samples, c_samples, config);
    return conditional_from(kde, v_query, c_query, nullptr);
}

AniResult ani_estimate(const Dataset& dataset, const InterventionPolicy& policy,
                       const KdeConfig& kde, std::uint64_t seed) {
    kde.validate();
    if (!policy.is_stochastic())
        throw std::invalid_argument(
            "ani_estimate: requires a stochastic policy (deterministic rules give a "
            "degenerate interventional density)");
    const int n = dataset.n();
    if (n < 20) throw std::invalid_argument("ani_estimate: need N >= 20");

    // observational conditional density from the observed pairs
    JointKde obs_kde(dataset.v, dataset.c, kde);

    // interventional pairs: draw z* ~ policy given the observed C until the
    // pool holds >= n_star (default 10 N) rows, pooling all nodes per draw
    const int n_star = kde.n_star_draws > 0 ? kde.n_star_draws : 10 * n;
    const int n_vecs = (n_star + n - 1) / n;
    Eigen::MatrixXd v_star(n_vecs * n, 2), c_star(n_vecs * n, dataset.c.cols());
    Rng rng(derive_seed(seed, {0}));
    for (int t = 0; t < n_vecs; ++t) {
        auto [z_star, vs] =
            sample_intervention(policy, dataset.c, *dataset.graph, rng, dataset.summary);
        v_star.middleRows(t * n, n) = vs;
        c_star.middleRows(t * n, n) = dataset.c;
    }
    JointKde star_kde(std::move(v_star), std::move(c_star), kde);

    AniResult out;
    double acc = 0.0;
    Eigen::VectorXd weighted(n);
    for (int i = 0; i < n; ++i) {
        bool floored = false;
        const double p_obs =
            conditional_from(obs_kde, dataset.v.row(i), dataset.c.row(i), &floored);
        const double p_star =
            conditional_from(star_kde, dataset.v.row(i), dataset.c.row(i), &floored);
        if (floored) ++out.n_floored;
        double w = p_star / p_obs;
        const double lo = 1.0 / kde.kappa_clip, hi = kde.kappa_clip;
        if (w < lo || w > hi) {
            w = std::clamp(w, lo, hi);
            ++out.n_clipped;
        }
        weighted[i] = w * dataset.y[i];
        acc += weighted[i];
    }
    out.psi_hat = acc / n;
    out.se = std::sqrt((weighted.array() - out.psi_hat).square().sum()) / n;
    out.positivity_warning = out.n_floored > n / 10;
    return out;
}

NdiResult ndi_estimate(const Dataset& dataset, const InterventionPolicy& policy,
                       const BasisSpec& basis, double lambda, int n_boot,
                       int outer_m, int inner_b, std::uint64_t seed) {
    InitialEstimate init = fit_rho_zero(dataset, basis, lambda);
    TargetedModel model = make_targeted_model(
        dataset, 0.0, std::make_shared<RidgeGModel>(init), /*target=*/true);
    NdiResult out;
    out.t_star = model.t_star;
    out.beta = init.beta;
    out.psi = estimate_psi(model, dataset, policy, n_boot, derive_seed(seed, {0}));
    out.variance = variance_nested_bootstrap(model, dataset, policy, outer_m, inner_b,
                                             derive_seed(seed, {1}));
    return out;
}

}  // namespace netar

#include <doctest.h>

#include <cmath>

#include "netar/competitors.hpp"

using namespace netar;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

GraphPtr ring(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return std::make_shared<const AdjacencyGraph>(AdjacencyGraph::build(edges, n));
}

Dataset sim_dataset(GraphPtr g, double rho0, std::uint64_t seed) {
    SimConfig cfg;
    cfg.rho0 = rho0;
    Rng rng(seed);
    return gen_dataset(cfg, g, rng);
}

}  // namespace

TEST_CASE("silverman bandwidths match the hand formula") {
    MatrixXd s(25, 2);
    Rng rng(3);
    for (int i = 0; i < 25; ++i) {
        s(i, 0) = rng.normal();
        s(i, 1) = rng.uniform(0.0, 4.0);
    }
    const VectorXd h = silverman_bandwidths(s, 1.0);
    for (int d = 0; d < 2; ++d) {
        const double mean = s.col(d).mean();
        const double sd = std::sqrt((s.col(d).array() - mean).square().sum() / 24.0);
        CHECK(h[d] == doctest::Approx(1.06 * sd * std::pow(25.0, -0.2)));
    }
    const VectorXd h2 = silverman_bandwidths(s, 2.0);
    CHECK(h2[0] == doctest::Approx(2.0 * h[0]));
    // degenerate column hits the positive floor
    MatrixXd flat = MatrixXd::Zero(25, 1);
    CHECK(silverman_bandwidths(flat, 1.0)[0] ==
          doctest::Approx(KdeConfig::kBandwidthFloor));
}

TEST_CASE("conditional KDE: coincident samples give the normalization ratio") {
    // all samples equal to the query: joint/marginal reduces to the product
    // of the v-dimension kernel normalizations at zero offset
    MatrixXd v = MatrixXd::Constant(30, 1, 0.5);
    MatrixXd c = MatrixXd::Constant(30, 2, -1.0);
    KdeConfig cfg;
    RowVectorXd vq(1), cq(2);
    vq << 0.5;
    cq << -1.0, -1.0;
    const double hv = KdeConfig::kBandwidthFloor;  // sd = 0 everywhere
    const double expect = 1.0 / (std::sqrt(2.0 * M_PI) * hv);
    CHECK(conditional_density_kde(v, c, vq, cq, cfg) ==
          doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("conditional KDE: tail floor and far-query rejection") {
    Rng rng(5);
    MatrixXd v(50, 1), c(50, 1);
    for (int i = 0; i < 50; ++i) {
        v(i, 0) = rng.normal();
        c(i, 0) = rng.normal();
    }
    KdeConfig cfg;
    RowVectorXd vq(1), cq(1);
    // v far from all samples but c central: ratio hits the 1e-12 floor
    vq << 1e4;
    cq << 0.0;
    CHECK(conditional_density_kde(v, c, vq, cq, cfg) ==
          doctest::Approx(KdeConfig::kDensityFloor));
    // c far from all samples: marginal below floor -> reject
    cq << 1e6;
    CHECK_THROWS(conditional_density_kde(v, c, vq, cq, cfg));
    // too few samples
    CHECK_THROWS(conditional_density_kde(v.topRows(5), c.topRows(5), vq, cq, cfg));
}

TEST_CASE("conditional KDE: standard normal density and unit integral") {
    Rng rng(7);
    const int n = 10000;
    MatrixXd v(n, 1), c(n, 0);
    for (int i = 0; i < n; ++i) v(i, 0) = rng.normal();
    KdeConfig cfg;
    RowVectorXd vq(1), cq(0);
    vq << 0.0;
    CHECK(conditional_density_kde(v, c, vq, cq, cfg) ==
          doctest::Approx(0.3989).epsilon(0.05));
    // density integrates to ~1 over a fine grid
    double integral = 0.0;
    const double step = 0.02;
    for (double t = -6.0; t <= 6.0; t += step) {
        vq << t;
        integral += step * conditional_density_kde(v, c, vq, cq, cfg);
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("ani_estimate: clip-to-one identity and constant-shift invariance") {
    const auto g = ring(40);
    Dataset d = sim_dataset(g, 0.0, 9);
    KdeConfig cfg;
    cfg.kappa_clip = 1.0;  // all weights forced to 1
    const auto policy = InterventionPolicy::stochastic(0.6);
    const AniResult unit = ani_estimate(d, policy, cfg, 21);
    CHECK(unit.psi_hat == doctest::Approx(d.y.mean()).epsilon(1e-12));

    // with free weights, adding a constant to y shifts psi by that constant
    // times the mean weight (weights depend only on (v, c))
    KdeConfig free;
    const AniResult base = ani_estimate(d, policy, free, 22);
    Dataset shifted = d;
    shifted.y = d.y.array() + 5.0;
    const AniResult moved = ani_estimate(shifted, policy, free, 22);
    // recover the mean weight from the unshifted run via a zero-y dataset
    Dataset zero = d;
    zero.y.setZero();
    Dataset ones = d;
    ones.y.setOnes();
    const double mean_w = ani_estimate(ones, policy, free, 22).psi_hat;
    CHECK(moved.psi_hat - base.psi_hat ==
          doctest::Approx(5.0 * mean_w).epsilon(1e-9));

    // deterministic policies are rejected
    CHECK_THROWS(
        ani_estimate(d, InterventionPolicy::deterministic(1.0), free, 23));
}

TEST_CASE("ani_estimate: observational policy keeps weights near one") {
    const auto g = ring(200);
    SimConfig sim;
    Rng rng(31);
    Dataset d = gen_dataset(sim, g, rng);
    // intervention equal to the true propensity mechanism
    const auto policy =
        InterventionPolicy::stochastic_logit(sim.treat_alpha, sim.treat_alpha0);
    KdeConfig cfg;
    cfg.n_star_draws = 4000;
    const AniResult res = ani_estimate(d, policy, cfg, 41);
    Dataset ones = d;
    ones.y.setOnes();
    const double mean_w = ani_estimate(ones, policy, cfg, 41).psi_hat;
    CHECK(mean_w == doctest::Approx(1.0).epsilon(0.15));
    CHECK(res.psi_hat ==
          doctest::Approx(d.y.mean()).epsilon(0.25 * std::abs(d.y.mean()) + 0.2));
}

TEST_CASE("ndi_estimate: constant data and bit-equality with the rho=0 pipeline") {
    const auto g = ring(30);
    SimConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.rho0 = 0.0;
    cfg.g.intercept = 2.7;
    cfg.g.z_own = cfg.g.z_nbr = 0.0;
    cfg.g.x_own.setZero();
    cfg.g.x_nbr.setZero();
    cfg.g.gamma1 = cfg.g.gamma2 = cfg.g.gamma3 = cfg.g.gamma4 = 0.0;
    Rng rng(51);
    const Dataset dc = gen_dataset(cfg, g, rng);
    const auto policy = InterventionPolicy::stochastic(0.6);
    const NdiResult nc =
        ndi_estimate(dc, policy, BasisSpec::correct(), 1.0, 100, 20, 20, 61);
    CHECK(nc.psi.psi_hat == doctest::Approx(2.7).epsilon(1e-8));

    // identical to running the TMLE machinery with rho fixed at zero
    const Dataset d = sim_dataset(g, 0.3, 53);
    const std::uint64_t seed = 71;
    const NdiResult ndi =
        ndi_estimate(d, policy, BasisSpec::correct(), 1.0, 100, 20, 20, seed);
    const InitialEstimate init = fit_rho_zero(d, BasisSpec::correct(), 1.0);
    const TargetedModel model =
        make_targeted_model(d, 0.0, std::make_shared<RidgeGModel>(init));
    const PsiEstimate psi =
        estimate_psi(model, d, policy, 100, derive_seed(seed, {0}));
    const VarianceEstimate var = variance_nested_bootstrap(
        model, d, policy, 20, 20, derive_seed(seed, {1}));
    CHECK(ndi.psi.psi_hat == psi.psi_hat);
    CHECK(ndi.psi.replicates == psi.replicates);
    CHECK(ndi.variance.sigma2_x_part == var.sigma2_x_part);
    CHECK(ndi.variance.sigma2_y_part == var.sigma2_y_part);
    CHECK((model.omega_hat - VectorXd::Ones(30)).lpNorm<Eigen::Infinity>() == 0.0);
}

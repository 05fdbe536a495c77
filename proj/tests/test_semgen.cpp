#include <doctest.h>

#include <cmath>

#include "netar/semgen.hpp"

using namespace netar;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

namespace {

GraphPtr make(const std::vector<std::pair<int, int>>& edges, int n) {
    return std::make_shared<const AdjacencyGraph>(AdjacencyGraph::build(edges, n));
}

GraphPtr ring(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    return make(edges, n);
}

GCoefficients zero_g() {
    GCoefficients g;
    g.intercept = g.z_own = g.z_nbr = 0.0;
    g.x_own.setZero();
    g.x_nbr.setZero();
    g.gamma1 = g.gamma2 = g.gamma3 = g.gamma4 = 0.0;
    return g;
}

GCoefficients const_g(double c) {
    GCoefficients g = zero_g();
    g.intercept = c;
    return g;
}

}  // namespace

TEST_CASE("summarize_x: identical rows, path means, ring brute force") {
    const auto path = make({{0, 1}, {1, 2}}, 3);
    MatrixXd x(3, 1);
    x << 0, 3, 6;
    const MatrixXd c = summarize_x(x, *path);
    CHECK(c(1, 0) == doctest::Approx(3.0));
    CHECK(c(1, 1) == doctest::Approx(3.0));  // mean of {0, 6}

    MatrixXd same = MatrixXd::Constant(3, 2, 1.7);
    const MatrixXd cs = summarize_x(same, *path);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) CHECK(cs(i, j) == doctest::Approx(1.7));

    const auto r8 = ring(8);
    Rng rng(61);
    MatrixXd xr(8, 2);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 2; ++j) xr(i, j) = rng.normal();
    const MatrixXd cr = summarize_x(xr, *r8);
    for (int i = 0; i < 8; ++i)
        for (int d = 0; d < 2; ++d) {
            CHECK(cr(i, d) == doctest::Approx(xr(i, d)));
            const double mean =
                0.5 * (xr((i + 1) % 8, d) + xr((i + 7) % 8, d));
            CHECK(cr(i, 2 + d) == doctest::Approx(mean));
        }

    // sum mode
    const MatrixXd csum = summarize_x(xr, *r8, SummaryMode::Sum);
    CHECK(csum(0, 2) == doctest::Approx(xr(1, 0) + xr(7, 0)));

    CHECK_THROWS(summarize_x(MatrixXd::Zero(5, 2), *path));
}

TEST_CASE("summarize_z: all-ones, star pattern, brute force") {
    const auto star = make({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 5);
    const MatrixXd v1 = summarize_z(VectorXd::Ones(5), *star);
    for (int i = 0; i < 5; ++i) {
        CHECK(v1(i, 0) == doctest::Approx(1.0));
        CHECK(v1(i, 1) == doctest::Approx(1.0));
    }
    VectorXd z = VectorXd::Zero(5);
    z[0] = 1.0;  // center treated only
    const MatrixXd v = summarize_z(z, *star);
    CHECK(v(0, 0) == doctest::Approx(1.0));
    CHECK(v(0, 1) == doctest::Approx(0.0));
    for (int l = 1; l <= 4; ++l) {
        CHECK(v(l, 0) == doctest::Approx(0.0));
        CHECK(v(l, 1) == doctest::Approx(1.0));
    }
}

TEST_CASE("true_g: zero set, intercept only, pinned hand evaluation") {
    RowVectorXd v(2), c(4);
    v << 1.0, 0.5;
    c << 0.3, -0.2, 0.1, 0.4;
    CHECK(true_g(v, c, zero_g()) == doctest::Approx(0.0));
    CHECK(true_g(v, c, const_g(1.0)) == doctest::Approx(1.0));
    // defaults, evaluated by hand:
    // 0.5 + 1*1 + 0.8*0.5 + 0.6*0.3 + (-0.4)(-0.2) + 0.3*0.1 + 0.3*0.4
    //   + 0.5*1*0.3 + 0.3*0.09 + (-0.3)*0.04 + 0.2*(-0.008) = 2.4734
    CHECK(true_g(v, c, GCoefficients{}) == doctest::Approx(2.4734).epsilon(1e-12));
}

TEST_CASE("gen_dataset: noiseless constants and the eigenvector case") {
    const auto r8 = ring(8);
    Rng rng(7);
    SimConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.rho0 = 0.0;
    cfg.g = const_g(3.25);
    const Dataset d0 = gen_dataset(cfg, r8, rng);
    CHECK((d0.y - VectorXd::Constant(8, 3.25)).lpNorm<Eigen::Infinity>() < 1e-12);

    cfg.rho0 = 0.5;
    cfg.g = const_g(1.0);
    const Dataset d1 = gen_dataset(cfg, r8, rng);
    CHECK((d1.y - VectorXd::Constant(8, 2.0)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("gen_dataset: noiseless rho=0 reproduces g exactly") {
    const auto r8 = ring(8);
    Rng rng(17);
    SimConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.rho0 = 0.0;
    const Dataset d = gen_dataset(cfg, r8, rng);
    for (int i = 0; i < 8; ++i)
        CHECK(d.y[i] == doctest::Approx(true_g(d.v.row(i), d.c.row(i), cfg.g)));
}

TEST_CASE("gen_dataset: X moments and determinism") {
    Rng rng(23);
    std::vector<std::pair<int, int>> edges;
    const int n = 100000;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    const auto chain = make(edges, n);
    SimConfig cfg;
    const Dataset d = gen_dataset(cfg, chain, rng);
    const double mean = d.x.col(0).mean();
    const double var = (d.x.col(0).array() - mean).square().sum() / n;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));

    Rng a(123), b(123);
    const auto r8 = ring(8);
    const Dataset da = gen_dataset(cfg, r8, a);
    const Dataset db = gen_dataset(cfg, r8, b);
    CHECK(da.y == db.y);
    CHECK(da.z == db.z);
    CHECK(da.x == db.x);
}

TEST_CASE("intervention policies: sampling behavior and positivity") {
    const auto r8 = ring(8);
    Rng rng(9);
    const MatrixXd c = MatrixXd::Zero(8, 4);

    const auto all_treat = InterventionPolicy::deterministic(1.0);
    auto [z1, v1] = sample_intervention(all_treat, c, *r8, rng);
    CHECK((z1 - VectorXd::Ones(8)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((v1 - MatrixXd::Ones(8, 2)).lpNorm<Eigen::Infinity>() == 0.0);

    CHECK_THROWS(InterventionPolicy::stochastic(0.0));
    CHECK_THROWS(InterventionPolicy::stochastic(1.0));

    const auto p6 = InterventionPolicy::stochastic(0.6);
    const int n = 10000;
    const MatrixXd big_c = MatrixXd::Zero(n, 4);
    double mean = p6.sample(big_c, rng).mean();
    CHECK(std::abs(mean - 0.6) < 3.0 * std::sqrt(0.6 * 0.4 / n));

    // logit policy matches the logistic of the linear index
    Eigen::VectorXd alpha(4);
    alpha << 0.5, -0.2, 0.1, 0.0;
    const auto logit = InterventionPolicy::stochastic_logit(alpha, 0.3);
    RowVectorXd ci(4);
    ci << 1.0, 2.0, -1.0, 0.5;
    CHECK(logit.prob_treat(ci) ==
          doctest::Approx(logistic(0.3 + 0.5 - 0.4 - 0.1)));
    CHECK(logit.density(1.0, ci) + logit.density(0.0, ci) == doctest::Approx(1.0));

    // dynamic threshold: top half by feature 0 treated
    MatrixXd cd(4, 1);
    cd << 1, 4, 2, 3;
    const auto dyn = InterventionPolicy::dynamic_threshold(0, 0.5, 1.0, 0.0);
    const VectorXd zd = dyn.sample(cd, rng);
    CHECK(zd[0] == 0.0);
    CHECK(zd[1] == 1.0);
    CHECK(zd[2] == 0.0);
    CHECK(zd[3] == 1.0);
}

TEST_CASE("oracle_psi: exact constants and self-consistency") {
    const auto r8 = ring(8);
    SimConfig cfg;
    cfg.g = const_g(2.5);
    cfg.rho0 = 0.0;
    const auto policy = InterventionPolicy::stochastic(0.7);
    Rng rng(31);
    const OracleResult o1 = oracle_psi(cfg, r8, policy, 2000, rng);
    CHECK(o1.psi_true == doctest::Approx(2.5).epsilon(3.0 * o1.mc_se / 2.5 + 1e-9));

    cfg.g = const_g(1.0);
    cfg.rho0 = 0.5;
    const OracleResult o2 = oracle_psi(cfg, r8, policy, 2000, rng);
    CHECK(std::abs(o2.psi_true - 2.0) < 3.0 * o2.mc_se + 1e-9);

    // beta0-only analytic value beta0 / (1 - rho0)
    cfg.g = const_g(0.8);
    cfg.rho0 = 0.4;
    const OracleResult o3 = oracle_psi(cfg, r8, policy, 2000, rng);
    CHECK(std::abs(o3.psi_true - 0.8 / 0.6) < 3.0 * o3.mc_se + 1e-9);

    // default config: two independent runs agree
    SimConfig full;
    Rng ra(1), rb(2);
    const OracleResult a = oracle_psi(full, r8, policy, 5000, ra);
    const OracleResult b = oracle_psi(full, r8, policy, 5000, rb);
    CHECK(std::abs(a.psi_true - b.psi_true) <
          3.0 * std::sqrt(a.mc_se * a.mc_se + b.mc_se * b.mc_se));

    CHECK_THROWS(oracle_psi(full, r8, policy, 10, rng));  // n_mc too small
}

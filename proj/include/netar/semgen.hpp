#pragma once

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "netar/graph.hpp"
#include "netar/rng.hpp"

namespace netar {

enum class SummaryMode { Mean, Sum };

// Coefficients of the true outcome function
//   g0(v, c) = b0 + bz_own v0 + bz_nbr v1 + bx_own.(c0,c1) + bx_nbr.(c2,c3)
//            + gamma1 v0 c0 + gamma2 c0^2 + gamma3 c1^2 + gamma4 c1^3
// where v = (own z, neighbor-mean z) and c = (own x, neighbor-mean x).
struct GCoefficients {
    double intercept = 0.5;
    double z_own = 1.0;
    double z_nbr = 0.8;
    Eigen::Vector2d x_own{0.6, -0.4};
    Eigen::Vector2d x_nbr{0.3, 0.3};
    double gamma1 = 0.5;   // z * x1 interaction
    double gamma2 = 0.3;   // x1^2
    double gamma3 = -0.3;  // x2^2
    double gamma4 = 0.2;   // x2^3
};

enum class NoiseKind { Gaussian, Uniform };

struct SimConfig {
    double rho0 = 0.4;
    GCoefficients g;
    // treatment logit: P(Z=1|C) = logistic(alpha0 + alpha . C_i)
    Eigen::VectorXd treat_alpha = Eigen::VectorXd::Constant(4, 0.2);
    double treat_alpha0 = 0.0;
    double noise_sd = 1.0;
    NoiseKind noise_kind = NoiseKind::Gaussian;
    double delta_rho = kDefaultDeltaRho;
    static constexpr int x_dim = 2;

    void validate() const;
};

double true_g(const Eigen::Ref<const Eigen::RowVectorXd>& v,
              const Eigen::Ref<const Eigen::RowVectorXd>& c,
              const GCoefficients& coeffs);

// Per-node treatment summaries V_i = (z_i, aggregate of z over N_i).
Eigen::MatrixXd summarize_z(const Eigen::VectorXd& z, const AdjacencyGraph& graph,
                            SummaryMode mode = SummaryMode::Mean);

// Per-node covariate summaries C_i = (x_i, aggregate of x over N_i), N x 2p.
Eigen::MatrixXd summarize_x(const Eigen::MatrixXd& x, const AdjacencyGraph& graph,
                            SummaryMode mode = SummaryMode::Mean);

struct Dataset {
    GraphPtr graph;
    Eigen::VectorXd y;
    Eigen::VectorXd z;
    Eigen::MatrixXd x;  // N x p
    Eigen::MatrixXd v;  // N x 2
    Eigen::MatrixXd c;  // N x 2p
    SummaryMode summary = SummaryMode::Mean;

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(x.cols()); }

    // rebuilds v and c from (z, x, graph)
    void refresh_summaries();
};

// Known conditional intervention law P*(Z*|C).
class InterventionPolicy {
  public:
    enum class Kind { Stochastic, Deterministic, DynamicThreshold };

    // constant treatment probability pi in (0, 1)
    static InterventionPolicy stochastic(double pi);
    // pi(c) = logistic(alpha0 + alpha . c); every entry strictly in (0,1)
    static InterventionPolicy stochastic_logit(Eigen::VectorXd alpha, double alpha0);
    // fixed assignment rule z* = value for every node
    static InterventionPolicy deterministic(double value);
    // nodes with c(feature) >= empirical q-quantile receive `assign`,
    // the rest receive `other`
    static InterventionPolicy dynamic_threshold(int feature, double quantile,
                                                double assign, double other = 0.0);

    Kind kind() const { return kind_; }
    bool is_stochastic() const { return kind_ == Kind::Stochastic; }

    // draws z*_i independently per node given c_i
    Eigen::VectorXd sample(const Eigen::MatrixXd& c, Rng& rng) const;

    // stochastic kind only: P*(z|c_i) for z in {0,1}
    double density(double z, const Eigen::Ref<const Eigen::RowVectorXd>& c_i) const;
    double prob_treat(const Eigen::Ref<const Eigen::RowVectorXd>& c_i) const;
    bool is_deterministic_rule() const { return kind_ == Kind::Deterministic; }
    double deterministic_value() const { return det_value_; }

  private:
    InterventionPolicy() = default;
    Kind kind_ = Kind::Deterministic;
    double pi_ = 0.5;
    bool logit_ = false;
    Eigen::VectorXd alpha_;
    double alpha0_ = 0.0;
    double det_value_ = 1.0;
    int feature_ = 0;
    double quantile_ = 0.5;
    double assign_ = 1.0;
    double other_ = 0.0;
};

// Draws z* from the policy and returns (z*, summarize_z(z*)).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sample_intervention(
    const InterventionPolicy& policy, const Eigen::MatrixXd& c,
    const AdjacencyGraph& graph, Rng& rng, SummaryMode mode = SummaryMode::Mean);

// One draw from the structural equation model:
//   X iid N(0,1), Z ~ Bernoulli(logistic(alpha0 + alpha.C)),
//   Y = (I - rho0 W)^{-1} { g0(V, C) + eps }.
Dataset gen_dataset(const SimConfig& config, GraphPtr graph, Rng& rng);

struct OracleResult {
    double psi_true = 0.0;
    double mc_se = 0.0;
    int n_mc = 0;
};

// Ground-truth estimand E[Ybar_N(Z*)] by Monte Carlo over fresh draws of
// (X, Z*, eps) under the true SEM with the intervention applied.
OracleResult oracle_psi(const SimConfig& config, GraphPtr graph,
                        const InterventionPolicy& policy, int n_mc, Rng& rng);

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace netar

#pragma once

#include "netar/inference.hpp"
#include "netar/tmle.hpp"

namespace netar {

// Kernel-density settings for the ANI weighting estimator.
struct KdeConfig {
    double bandwidth_multiplier = 1.0;  // scales the Silverman rule per dimension
    double kappa_clip = 20.0;           // weight ratios clipped to [1/k, k]
    int n_star_draws = 0;               // pooled (v*, c) sample pairs; 0 -> 10 N
    static constexpr double kDensityFloor = 1e-12;
    static constexpr double kBandwidthFloor = 1e-6;

    void validate() const;
};

// Silverman per-dimension bandwidths 1.06 sd n^{-1/5} (times the multiplier),
// floored at kBandwidthFloor.
Eigen::VectorXd silverman_bandwidths(const Eigen::MatrixXd& samples,
                                     double multiplier = 1.0);

// Conditional density p_hat(v | c) = joint KDE at (v, c) / marginal KDE at c
// with a Gaussian product kernel; the returned value is floored at 1e-12.
// Throws if the marginal at the query is itself at or below the floor.
double conditional_density_kde(const Eigen::MatrixXd& v_samples,
                               const Eigen::MatrixXd& c_samples,
                               const Eigen::Ref<const Eigen::RowVectorXd>& v_query,
                               const Eigen::Ref<const Eigen::RowVectorXd>& c_query,
                               const KdeConfig& config);

struct AniResult {
    double psi_hat = 0.0;
    double se = 0.0;
    int n_clipped = 0;   // nodes whose weight ratio hit the clip bound
    int n_floored = 0;   // nodes where either density hit the 1e-12 floor
    bool positivity_warning = false;  // floor triggered for > 10% of nodes
};

// Approximate-neighborhood-interference IPW estimator
//   Psi = N^{-1} sum_i y_i p_hat*(v_i | c_i) / p_hat(v_i | c_i),
// with p_hat fitted on the observed (v, c) pairs and p_hat* on pairs pooled
// from interventional draws z* ~ policy given the observed C.
AniResult ani_estimate(const Dataset& dataset, const InterventionPolicy& policy,
                       const KdeConfig& kde, std::uint64_t seed);

struct NdiResult {
    PsiEstimate psi;
    VarianceEstimate variance;
    double t_star = 0.0;
    Eigen::VectorXd beta;
};

// Network-direct-interference baseline: the full TMLE pipeline with the
// autoregressive term removed (rho fixed at 0, so omega = 1_N and r = y).
NdiResult ndi_estimate(const Dataset& dataset, const InterventionPolicy& policy,
                       const BasisSpec& basis, double lambda, int n_boot,
                       int outer_m, int inner_b, std::uint64_t seed);

}  // namespace netar

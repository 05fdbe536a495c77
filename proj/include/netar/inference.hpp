#pragma once

#include <string>
#include <utility>

#include "netar/tmle.hpp"

namespace netar {

struct VarianceEstimate {
    double sigma2_y_part = 0.0;
    double sigma2_x_part = 0.0;
    std::string method;  // "nested-bootstrap" | "projection-oracle"
    int outer_m = 0;
    int inner_b = 0;

    double total() const { return sigma2_y_part + sigma2_x_part; }
    double se() const { return std::sqrt(total()); }
};

// Plug-in y-part: N^{-2} sum_i omega_i^2 sigma2_y with
// sigma2_y = ||y - rho W y - g^(t)(v, c)||^2 / N.
// Returns (variance part, sigma2_y).
std::pair<double, double> sigma_y_hat(const TargetedModel& model,
                                      const Dataset& dataset);

// Nested bootstrap for the covariate part: M outer resamples x^(m) of the
// empirical covariates, B inner resamples from each x^(m); the returned
// value is the variance of the outer means of the inner Psi replicates.
double sigma_x_bootstrap(const TargetedModel& model, const Dataset& dataset,
                         const InterventionPolicy& policy, int outer_m,
                         int inner_b, std::uint64_t seed);

// Test-scale estimator of the Hajek-projection variance: computes
// h_hat(x_l) for every observed covariate row by Monte Carlo over the
// two-hop sets and returns N^{-2} sum_l (h_hat(x_l) - mean)^2. Cost grows
// with sum_i |D_i|, so it is restricted to N <= 100.
double sigma_x_projection_oracle(const TargetedModel& model, const Dataset& dataset,
                                 const InterventionPolicy& policy, int n_mc,
                                 std::uint64_t seed);

VarianceEstimate variance_nested_bootstrap(const TargetedModel& model,
                                           const Dataset& dataset,
                                           const InterventionPolicy& policy,
                                           int outer_m, int inner_b,
                                           std::uint64_t seed);

// Normal-quantile interval psi_hat +/- z_level * sqrt(total variance).
std::pair<double, double> confidence_interval(double psi_hat,
                                              const VarianceEstimate& variance,
                                              double level);

double normal_quantile(double p);  // inverse standard normal CDF

struct HGVariances {
    double var_h = 0.0;
    double var_g = 0.0;
};

// Empirical check of the efficiency inequality var{H(x)} <= var{G(x)}:
// simulates n_reps iid covariate draws under the true SEM and evaluates the
// raw statistic G and its Hajek projection H per draw with common random
// numbers for the inner integrals. Small-N only.
HGVariances hg_efficiency_oracle(const SimConfig& config, GraphPtr graph,
                                 const InterventionPolicy& policy, int n_reps,
                                 std::uint64_t seed, int n_mc_inner = 40);

inline constexpr int kDefaultVarOuterM = 200;
inline constexpr int kDefaultVarInnerB = 200;

}  // namespace netar

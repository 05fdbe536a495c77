#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "netar/initfit.hpp"
#include "netar/semgen.hpp"

namespace netar {

// Outcome-regression function usable on arbitrary (v, c) summaries. The
// batch interface is the hot path of the bootstrap loops.
class GModel {
  public:
    virtual ~GModel() = default;
    virtual void evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                                Eigen::VectorXd& out) const = 0;
    // allocation-free single-node path used by the oracle hot loops
    virtual double evaluate_node(const Eigen::Ref<const Eigen::RowVectorXd>& v,
                                 const Eigen::Ref<const Eigen::RowVectorXd>& c) const;
    double evaluate(const Eigen::RowVectorXd& v, const Eigen::RowVectorXd& c) const {
        return evaluate_node(v, c);
    }
};

using GModelPtr = std::shared_ptr<const GModel>;

class RidgeGModel final : public GModel {
  public:
    explicit RidgeGModel(InitialEstimate est) : est_(std::move(est)) {}
    void evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                        Eigen::VectorXd& out) const override;
    double evaluate_node(const Eigen::Ref<const Eigen::RowVectorXd>& v,
                         const Eigen::Ref<const Eigen::RowVectorXd>& c) const override;
    const InitialEstimate& initial() const { return est_; }

  private:
    InitialEstimate est_;
};

class TrueGModel final : public GModel {
  public:
    explicit TrueGModel(GCoefficients coeffs) : coeffs_(coeffs) {}
    void evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                        Eigen::VectorXd& out) const override;
    double evaluate_node(const Eigen::Ref<const Eigen::RowVectorXd>& v,
                         const Eigen::Ref<const Eigen::RowVectorXd>& c) const override {
        return true_g(v, c, coeffs_);
    }

  private:
    GCoefficients coeffs_;
};

class FunctionGModel final : public GModel {
  public:
    using Fn = std::function<double(const Eigen::RowVectorXd&, const Eigen::RowVectorXd&)>;
    explicit FunctionGModel(Fn fn) : fn_(std::move(fn)) {}
    void evaluate_batch(const Eigen::MatrixXd& v, const Eigen::MatrixXd& c,
                        Eigen::VectorXd& out) const override;

  private:
    Fn fn_;
};

// The targeted outcome model (rho_hat0, g_hat0, omega_hat, t*):
//   g^(t)_i(v, c) = g_hat0(v, c) + t* omega_hat_i.
struct TargetedModel {
    double rho_hat0 = 0.0;
    GModelPtr g_hat0;
    Eigen::VectorXd omega_hat;
    double t_star = 0.0;

    int n() const { return static_cast<int>(omega_hat.size()); }
    double evaluate_i(int i, const Eigen::RowVectorXd& v,
                      const Eigen::RowVectorXd& c) const {
        return g_hat0->evaluate(v, c) + t_star * omega_hat[i];
    }
};

// r_hat0 = (I - rho_hat0 W) y
Eigen::VectorXd residualize(const Dataset& dataset, double rho_hat0,
                            double delta_rho = kDefaultDeltaRho);

// Closed-form fluctuation coefficient
//   t* = (omega'omega)^{-1} omega'(r_hat0 - g0_values),
// the minimizer of L(t) = 0.5 ||r_hat0 - g0_values - t omega||^2.
double target_step(const Eigen::VectorXd& r_hat0, const Eigen::VectorXd& g0_values,
                   const Eigen::VectorXd& omega_hat);

// Assembles the model on a dataset; when `target` is set, runs the
// targeting step, otherwise leaves t = 0 (the DE variant).
TargetedModel make_targeted_model(const Dataset& dataset, double rho_hat0,
                                  GModelPtr g_hat0, bool target = true,
                                  double delta_rho = kDefaultDeltaRho);

// Empirical influence-function value at the fitted model,
//   N^{-1} omega_hat' { r_hat0 - g^(t)(v, c) };
// zero (to numerical precision) exactly when the targeting step was applied.
double plug_in_bias(const TargetedModel& model, const Dataset& dataset,
                    double delta_rho = kDefaultDeltaRho);

struct PsiEstimate {
    double psi_hat = 0.0;
    std::vector<double> replicates;

    double replicate_sd() const;
    // Monte Carlo standard error of the bootstrap mean
    double mc_se() const;
};

// Bootstrap TMLE point estimate: per replicate b, node covariates are
// resampled with replacement from the empirical set onto the fixed graph,
// summaries recomputed, z* drawn from the policy, and
//   Psi_b = N^{-1} sum_i omega_i g^(t)(v*_i, c_i).
// Replicate b uses the stream derived from (seed, b).
PsiEstimate estimate_psi(const TargetedModel& model, const Dataset& dataset,
                         const InterventionPolicy& policy, int n_boot,
                         std::uint64_t seed);

// Direct (untargeted) estimate: identical pipeline with t forced to 0.
PsiEstimate estimate_psi_de(const InitialEstimate& initial, const Dataset& dataset,
                            const InterventionPolicy& policy, int n_boot,
                            std::uint64_t seed);

// One bootstrap replicate of Psi given a source pool of covariate rows;
// shared with the nested variance bootstrap.
double psi_replicate(const TargetedModel& model, const Eigen::MatrixXd& x_source,
                     const AdjacencyGraph& graph, SummaryMode mode,
                     const InterventionPolicy& policy, Rng& rng,
                     Eigen::MatrixXd* x_out = nullptr);

inline constexpr int kDefaultBootstrapB = 2000;

}  // namespace netar

#pragma once

#include <string>

#include <Eigen/Dense>

#include "netar/semgen.hpp"

namespace netar {

// Feature groups entering the basis expansion phi(V_i, C_i). Column order of
// the design matrix is fixed as
//   [1, v0, v1, c0, ..., c_{2p-1}, v0*c0, c0^2, c1^2, c1^3]
// with the last four present only when the nonlinear flags are on.
struct BasisSpec {
    bool v_linear = true;
    bool c_linear = true;
    bool zx_interaction = true;  // v0 * c0
    bool x1_sq = true;           // c0^2
    bool x2_sq = true;           // c1^2
    bool x2_cube = true;         // c1^3

    static BasisSpec correct();       // all feature groups
    static BasisSpec misspecified();  // drops the four nonlinear terms
    static BasisSpec from_name(const std::string& name);
    std::string name() const;

    int n_columns(int p) const;
};

Eigen::MatrixXd design_matrix(const Dataset& dataset, const BasisSpec& basis);

// Feature row for a single node; used when evaluating a fitted g.
Eigen::RowVectorXd basis_row(const Eigen::RowVectorXd& v, const Eigen::RowVectorXd& c,
                             const BasisSpec& basis);

// Closed-form ridge solution of ||target - phi beta||^2 + lambda ||beta_-1||^2
// with an unpenalized intercept (column 0). Non-intercept columns are
// standardized internally; coefficients are returned on the original scale.
Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target,
                          double lambda);

struct InitialEstimate {
    double rho_hat0 = 0.0;
    Eigen::VectorXd beta;
    BasisSpec basis;
    double lambda = 0.0;
    bool flat_profile = false;  // RSS(rho) was flat; midpoint returned

    double evaluate(const Eigen::RowVectorXd& v, const Eigen::RowVectorXd& c) const {
        return basis_row(v, c, basis) * beta;
    }
};

// Ridge RSS of the residual (I - rho W) y regressed on the basis.
double profile_rss(const Dataset& dataset, const Eigen::MatrixXd& phi, double rho,
                   double lambda);

// Profile penalized least squares: golden-section search of RSS(rho) over
// [-1+delta_rho, 1-delta_rho], refined to 1e-6, then the associated ridge fit.
InitialEstimate profile_rho(const Dataset& dataset, const BasisSpec& basis,
                            double lambda, double delta_rho = kDefaultDeltaRho);

// Ridge fit of y itself on the basis (the rho = 0 pipeline used by NDI).
InitialEstimate fit_rho_zero(const Dataset& dataset, const BasisSpec& basis,
                             double lambda);

inline double default_lambda(int n) { return 1e-3 * n; }

}  // namespace netar

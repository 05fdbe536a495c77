#include "netar/initfit.hpp"

#include <cmath>
#include <stdexcept>

namespace netar {

BasisSpec BasisSpec::correct() { return BasisSpec{}; }

BasisSpec BasisSpec::misspecified() {
    BasisSpec b;
    b.zx_interaction = b.x1_sq = b.x2_sq = b.x2_cube = false;
    return b;
}

BasisSpec BasisSpec::from_name(const std::string& name) {
    if (name == "correct") return correct();
    if (name == "misspecified") return misspecified();
    throw std::invalid_argument("unknown basis preset: " + name);
}

std::string BasisSpec::name() const {
    if (zx_interaction || x1_sq || x2_sq || x2_cube) return "correct";
    return "misspecified";
}

int BasisSpec::n_columns(int p) const {
    int q = 1;
    if (v_linear) q += 2;
    if (c_linear) q += 2 * p;
    q += static_cast<int>(zx_interaction) + static_cast<int>(x1_sq) +
         static_cast<int>(x2_sq) + static_cast<int>(x2_cube);
    return q;
}

Eigen::RowVectorXd basis_row(const Eigen::RowVectorXd& v, const Eigen::RowVectorXd& c,
                             const BasisSpec& basis) {
    const int p = static_cast<int>(c.size()) / 2;
    const bool nonlinear = basis.zx_interaction || basis.x1_sq || basis.x2_sq ||
                           basis.x2_cube;
    if (nonlinear && p < 2)
        throw std::invalid_argument("basis requests x terms absent from dataset (p < 2)");
    Eigen::RowVectorXd row(basis.n_columns(p));
    int k = 0;
    row[k++] = 1.0;
    if (basis.v_linear) {
        row[k++] = v[0];
        row[k++] = v[1];
    }
    if (basis.c_linear)
        for (int j = 0; j < 2 * p; ++j) row[k++] = c[j];
    if (basis.zx_interaction) row[k++] = v[0] * c[0];
    if (basis.x1_sq) row[k++] = c[0] * c[0];
    if (basis.x2_sq) row[k++] = c[1] * c[1];
    if (basis.x2_cube) row[k++] = c[1] * c[1] * c[1];
    return row;
}

Eigen::MatrixXd design_matrix(const Dataset& dataset, const BasisSpec& basis) {
    const int n = dataset.n();
    Eigen::MatrixXd phi(n, basis.n_columns(dataset.p()));
    for (int i = 0; i < n; ++i)
        phi.row(i) = basis_row(dataset.v.row(i), dataset.c.row(i), basis);
    return phi;
}

namespace {

// Standardized view of the non-intercept columns, shared by ridge_fit and
// the rho profile. Penalty applies on the standardized scale.
struct RidgeWorkspace {
    int n = 0, q = 0;
    Eigen::MatrixXd xs;       // standardized columns 1..q-1
    Eigen::VectorXd mean, sd;  // per non-intercept column
    double lambda = 0.0;
    Eigen::LDLT<Eigen::MatrixXd> chol;  // Xs'Xs + lambda I

    RidgeWorkspace(const Eigen::MatrixXd& phi, double lambda_in) {
        n = static_cast<int>(phi.rows());
        q = static_cast<int>(phi.cols());
        lambda = lambda_in;
        if ((phi.col(0).array() != 1.0).any())
            throw std::invalid_argument("ridge_fit: column 0 must be the intercept");
        const int m = q - 1;
        xs = phi.rightCols(m);
        mean.resize(m);
        sd.resize(m);
        for (int j = 0; j < m; ++j) {
            mean[j] = xs.col(j).mean();
            xs.col(j).array() -= mean[j];
            const double s = std::sqrt(xs.col(j).squaredNorm() / n);
            sd[j] = s > 1e-12 ? s : 1.0;
            xs.col(j) /= sd[j];
        }
        Eigen::MatrixXd a = xs.transpose() * xs;
        a.diagonal().array() += lambda;
        if (lambda == 0.0) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
            if (qr.rank() < m)
                throw std::runtime_error("ridge_fit: singular design with lambda = 0");
        }
        chol.compute(a);
    }

    // standardized-scale coefficients (a, b) for a target vector
    std::pair<double, Eigen::VectorXd> solve(const Eigen::VectorXd& target) const {
        const double a = target.mean();
        Eigen::VectorXd b = chol.solve(xs.transpose() * (target.array() - a).matrix());
        return {a, b};
    }

    double penalized_rss(const Eigen::VectorXd& target) const {
        auto [a, b] = solve(target);
        const Eigen::VectorXd resid = (target.array() - a).matrix() - xs * b;
        return resid.squaredNorm() + lambda * b.squaredNorm();
    }

    Eigen::VectorXd original_scale(double a, const Eigen::VectorXd& b) const {
        Eigen::VectorXd beta(q);
        double intercept = a;
        for (int j = 0; j < q - 1; ++j) {
            beta[j + 1] = b[j] / sd[j];
            intercept -= beta[j + 1] * mean[j];
        }
        beta[0] = intercept;
        return beta;
    }
};

}  // namespace

Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& phi, const Eigen::VectorXd& target,
                          double lambda) {
    if (phi.rows() != target.size())
        throw std::invalid_argument("ridge_fit: dimension mismatch");
    if (lambda < 0.0) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
    if (phi.rows() < phi.cols() && lambda == 0.0)
        throw std::invalid_argument("ridge_fit: need N >= q or lambda > 0");
    RidgeWorkspace ws(phi, lambda);
    auto [a, b] = ws.solve(target);
    return ws.original_scale(a, b);
}

double profile_rss(const Dataset& dataset, const Eigen::MatrixXd& phi, double rho,
                   double lambda) {
    RowStochasticW w(dataset.graph);
    const Eigen::VectorXd wy = w.multiply(dataset.y);
    RidgeWorkspace ws(phi, lambda);
    return ws.penalized_rss(dataset.y - rho * wy);
}

InitialEstimate profile_rho(const Dataset& dataset, const BasisSpec& basis,
                            double lambda, double delta_rho) {
    const Eigen::MatrixXd phi = design_matrix(dataset, basis);
    if (dataset.n() <= phi.cols())
        throw std::invalid_argument("profile_rho: need N > q");
    RidgeWorkspace ws(phi, lambda);
    RowStochasticW w(dataset.graph);
    const Eigen::VectorXd wy = w.multiply(dataset.y);

    const auto rss = [&](double rho) {
        return ws.penalized_rss(dataset.y - rho * wy);
    };

    double lo = -1.0 + delta_rho, hi = 1.0 - delta_rho;
    const double rss_lo = rss(lo), rss_mid = rss(0.5 * (lo + hi)), rss_hi = rss(hi);
    const double spread = std::max({rss_lo, rss_mid, rss_hi}) -
                          std::min({rss_lo, rss_mid, rss_hi});
    InitialEstimate est;
    est.basis = basis;
    est.lambda = lambda;
    if (spread < 1e-12) {
        est.flat_profile = true;
        est.rho_hat0 = 0.5 * (lo + hi);
    } else {
        // golden-section search; RSS(rho) is quadratic in rho, hence unimodal
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = rss(x1), f2 = rss(x2);
        while (b - a > 1e-6) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = rss(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = rss(x2);
            }
        }
        est.rho_hat0 = 0.5 * (a + b);
    }
    auto [ic, b] = ws.solve(dataset.y - est.rho_hat0 * wy);
    est.beta = ws.original_scale(ic, b);
    return est;
}

InitialEstimate fit_rho_zero(const Dataset& dataset, const BasisSpec& basis,
                             double lambda) {
    InitialEstimate est;
    est.basis = basis;
    est.lambda = lambda;
    est.rho_hat0 = 0.0;
    est.beta = ridge_fit(design_matrix(dataset, basis), dataset.y, lambda);
    return est;
}

}  // namespace netar

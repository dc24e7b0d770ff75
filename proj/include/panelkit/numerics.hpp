#pragma once

#include <Eigen/Dense>

#include <vector>

namespace panelkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LeastSquaresSolution {
    Vector coefficients;
    Vector residuals;
    double rss = 0.0;
    // (X'X)^-1 at full rank; pseudo-inverse restricted to the identified
    // subspace when columns are dependent.
    Matrix xtx_inverse;
    Eigen::Index rank = 0;
};

// Minimum-norm least squares through a rank-revealing orthogonal
// decomposition. Pivots below 1e-10 times the largest are treated as zero,
// so dummy-trap detection is deterministic.
LeastSquaresSolution solve_least_squares(const Matrix& X, const Vector& y);

// 0-based indices of columns a rank-revealing decomposition rejects as
// linearly dependent on the columns it kept; empty at full column rank.
std::vector<Eigen::Index> dependent_columns(const Matrix& X);

// P(T <= x) for Student's t. Absolute accuracy 1e-8.
double t_cdf(double x, int dof);

// P(F <= x) for Fisher's F.
double f_cdf(double x, int dof1, int dof2);

// P(X <= x) for chi-square.
double chi2_cdf(double x, int dof);

// Two-sided p-value of a t statistic.
double t_two_sided_p(double t, int dof);

// Inverse of t_cdf in its first argument (bisection; used for confidence
// intervals).
double t_quantile(double probability, int dof);

// Regularized incomplete beta and gamma functions, exposed for the
// distribution helpers above. The upper gamma keeps full precision in the
// far tail, where 1 - incomplete_gamma_lower would round to zero.
double incomplete_beta(double a, double b, double x);
double incomplete_gamma_lower(double a, double x);
double incomplete_gamma_upper(double a, double x);

}  // namespace panelkit

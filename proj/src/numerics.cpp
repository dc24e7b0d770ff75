#include "panelkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace panelkit {

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kConvergenceEps = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 500;

void check_design(const Matrix& X, const Vector& y) {
    if (X.rows() < 1 || X.cols() < 1) {
        throw std::invalid_argument("least squares needs a non-empty design matrix");
    }
    if (X.rows() != y.size()) {
        std::ostringstream msg;
        msg << "design has " << X.rows() << " rows but the response has " << y.size();
        throw std::invalid_argument(msg.str());
    }
    if (X.rows() < X.cols()) {
        std::ostringstream msg;
        msg << "underdetermined system: " << X.rows() << " observations for " << X.cols()
            << " columns";
        throw std::invalid_argument(msg.str());
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw std::invalid_argument("least squares input contains non-finite values");
    }
}

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kConvergenceEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

// Series for the regularized lower gamma, valid for x < a + 1.
double gamma_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIterations; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kConvergenceEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("incomplete gamma series did not converge");
}

// Continued fraction for the regularized upper gamma, valid for x >= a + 1.
double gamma_continued_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kConvergenceEps) {
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("incomplete gamma continued fraction did not converge");
}

void check_probability_input(double x, const char* what) {
    if (std::isnan(x)) {
        throw std::invalid_argument(std::string(what) + " received NaN");
    }
}

}  // namespace

LeastSquaresSolution solve_least_squares(const Matrix& X, const Vector& y) {
    check_design(X, y);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    cod.setThreshold(kRankTolerance);
    cod.compute(X);

    LeastSquaresSolution out;
    out.coefficients = cod.solve(y);
    out.residuals = y - X * out.coefficients;
    out.rss = out.residuals.squaredNorm();
    const Matrix pinv = cod.pseudoInverse();
    out.xtx_inverse = pinv * pinv.transpose();
    out.xtx_inverse = (0.5 * (out.xtx_inverse + out.xtx_inverse.transpose())).eval();
    out.rank = cod.rank();
    return out;
}

std::vector<Eigen::Index> dependent_columns(const Matrix& X) {
    Eigen::ColPivHouseholderQR<Matrix> qr;
    qr.setThreshold(kRankTolerance);
    qr.compute(X);
    const auto& perm = qr.colsPermutation().indices();
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = qr.rank(); i < X.cols(); ++i) {
        out.push_back(perm.coeff(i));
    }
    std::sort(out.begin(), out.end());
    return out;
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("incomplete beta needs positive shape parameters");
    }
    check_probability_input(x, "incomplete beta");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double incomplete_gamma_lower(double a, double x) {
    if (!(a > 0.0)) {
        throw std::invalid_argument("incomplete gamma needs a positive shape parameter");
    }
    check_probability_input(x, "incomplete gamma");
    if (x < 0.0) {
        throw std::invalid_argument("incomplete gamma needs a nonnegative argument");
    }
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_series(a, x);
    return 1.0 - gamma_continued_fraction(a, x);
}

double incomplete_gamma_upper(double a, double x) {
    if (!(a > 0.0)) {
        throw std::invalid_argument("incomplete gamma needs a positive shape parameter");
    }
    check_probability_input(x, "incomplete gamma");
    if (x < 0.0) {
        throw std::invalid_argument("incomplete gamma needs a nonnegative argument");
    }
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_series(a, x);
    return gamma_continued_fraction(a, x);
}

double t_cdf(double x, int dof) {
    if (dof < 1) {
        throw std::invalid_argument("t distribution needs at least one degree of freedom");
    }
    check_probability_input(x, "t_cdf");
    if (std::isinf(x)) return x > 0.0 ? 1.0 : 0.0;
    const double nu = static_cast<double>(dof);
    const double tail = incomplete_beta(0.5 * nu, 0.5, nu / (nu + x * x));
    return x >= 0.0 ? 1.0 - 0.5 * tail : 0.5 * tail;
}

double f_cdf(double x, int dof1, int dof2) {
    if (dof1 < 1 || dof2 < 1) {
        throw std::invalid_argument("F distribution needs positive degrees of freedom");
    }
    check_probability_input(x, "f_cdf");
    if (x < 0.0) {
        throw std::invalid_argument("F statistic must be nonnegative");
    }
    if (std::isinf(x)) return 1.0;
    const double d1 = static_cast<double>(dof1);
    const double d2 = static_cast<double>(dof2);
    return incomplete_beta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

double chi2_cdf(double x, int dof) {
    if (dof < 1) {
        throw std::invalid_argument("chi-square distribution needs a positive dof");
    }
    check_probability_input(x, "chi2_cdf");
    if (x < 0.0) {
        throw std::invalid_argument("chi-square statistic must be nonnegative");
    }
    if (std::isinf(x)) return 1.0;
    return incomplete_gamma_lower(0.5 * dof, 0.5 * x);
}

double t_two_sided_p(double t, int dof) {
    if (dof < 1) {
        throw std::invalid_argument("t distribution needs at least one degree of freedom");
    }
    check_probability_input(t, "t_two_sided_p");
    if (std::isinf(t)) return 0.0;
    const double nu = static_cast<double>(dof);
    // Equals 2 * (1 - t_cdf(|t|)) but keeps full precision in the far tail.
    return incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

double t_quantile(double probability, int dof) {
    if (dof < 1) {
        throw std::invalid_argument("t distribution needs at least one degree of freedom");
    }
    if (!(probability > 0.0) || !(probability < 1.0)) {
        throw std::invalid_argument("t_quantile needs a probability strictly inside (0, 1)");
    }
    if (probability == 0.5) return 0.0;
    const double p = probability > 0.5 ? probability : 1.0 - probability;
    double hi = 1.0;
    while (t_cdf(hi, dof) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("t_quantile bracket expansion failed");
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (t_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double q = 0.5 * (lo + hi);
    return probability > 0.5 ? q : -q;
}

}  // namespace panelkit

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <panelkit/numerics.hpp>

#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using panelkit::Matrix;
using panelkit::Vector;

namespace {

Matrix random_matrix(int rows, int cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix X(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) X(i, j) = normal(rng);
    return X;
}

Vector random_vector(int rows, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector y(rows);
    for (int i = 0; i < rows; ++i) y(i) = normal(rng);
    return y;
}

std::vector<std::vector<double>> to_rows(const Matrix& X) {
    std::vector<std::vector<double>> rows(X.rows(), std::vector<double>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) rows[i][j] = X(i, j);
    return rows;
}

std::vector<double> to_std(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

TEST_CASE("exact linear data is reproduced with zero residuals") {
    Matrix X(3, 2);
    X << 1, 1, 1, 2, 1, 3;
    Vector y(3);
    y << 2, 4, 6;
    auto sol = panelkit::solve_least_squares(X, y);
    CHECK(std::abs(sol.coefficients(0)) < 1e-12);
    CHECK(sol.coefficients(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.residuals.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(sol.rss < 1e-12);
    CHECK(sol.rank == 2);
}

TEST_CASE("intercept-only fit returns the mean") {
    Matrix X = Matrix::Ones(3, 1);
    Vector y(3);
    y << 1, 2, 3;
    auto sol = panelkit::solve_least_squares(X, y);
    CHECK(sol.coefficients(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sol.rss == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("random instances match the explicit normal-equations reference") {
    for (unsigned seed = 1; seed <= 20; ++seed) {
        Matrix X = random_matrix(30, 4, seed);
        Vector y = random_vector(30, seed + 1000);
        auto sol = panelkit::solve_least_squares(X, y);
        auto ref = oracle::normal_equations(to_rows(X), to_std(y));
        REQUIRE(sol.rank == 4);
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(sol.coefficients(j) - ref[(size_t)j]) < 1e-8);
    }
}

TEST_CASE("residuals are orthogonal to the design columns") {
    for (unsigned seed = 30; seed <= 40; ++seed) {
        Matrix X = random_matrix(25, 3, seed);
        Vector y = random_vector(25, seed + 500);
        auto sol = panelkit::solve_least_squares(X, y);
        double gap = (X.transpose() * sol.residuals).cwiseAbs().maxCoeff();
        CHECK(gap < 1e-8 * y.norm());
    }
}

TEST_CASE("a duplicated column lowers the rank but not the fitted values") {
    Matrix X = random_matrix(20, 3, 7);
    Vector y = random_vector(20, 8);
    auto base = panelkit::solve_least_squares(X, y);

    Matrix X2(20, 4);
    X2.leftCols(3) = X;
    X2.col(3) = X.col(1);
    auto dup = panelkit::solve_least_squares(X2, y);

    CHECK(dup.rank == 3);
    Vector fitted_base = y - base.residuals;
    Vector fitted_dup = y - dup.residuals;
    CHECK((fitted_base - fitted_dup).cwiseAbs().maxCoeff() < 1e-8);

    auto dependent = panelkit::dependent_columns(X2);
    REQUIRE(dependent.size() == 1);
    bool flagged_copy = dependent[0] == 1 || dependent[0] == 3;
    CHECK(flagged_copy);
}

TEST_CASE("solution bookkeeping: rss, symmetry of the inverse") {
    Matrix X = random_matrix(40, 5, 11);
    Vector y = random_vector(40, 12);
    auto sol = panelkit::solve_least_squares(X, y);
    CHECK(std::abs(sol.rss - sol.residuals.squaredNorm()) <= 1e-10 * std::max(1.0, sol.rss));
    CHECK((sol.xtx_inverse - sol.xtx_inverse.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Matrix xtx = X.transpose() * X;
    CHECK((xtx * sol.xtx_inverse - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("an ill-conditioned design is solved to 1e-4 coefficient accuracy") {
    // Singular values spanning eight orders of magnitude, known coefficients.
    Matrix G = random_matrix(40, 4, 21);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ() * Matrix::Identity(40, 4);
    Vector scales(4);
    scales << 1.0, 1e-2, 1e-5, 1e-8;
    Matrix X = Q * scales.asDiagonal();
    Vector truth(4);
    truth << 1.5, -2.0, 3.0, 0.5;
    Vector y = X * truth;
    auto sol = panelkit::solve_least_squares(X, y);
    REQUIRE(sol.rank == 4);
    CHECK((sol.coefficients - truth).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("least squares input validation") {
    Matrix X = Matrix::Ones(3, 1);
    Vector y(2);
    y << 1, 2;
    CHECK_THROWS_AS(panelkit::solve_least_squares(X, y), std::invalid_argument);

    Vector y3(3);
    y3 << 1, 2, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(panelkit::solve_least_squares(X, y3), std::invalid_argument);

    Matrix wide = Matrix::Ones(2, 3);
    Vector y2(2);
    y2 << 1, 2;
    CHECK_THROWS_AS(panelkit::solve_least_squares(wide, y2), std::invalid_argument);

    Matrix empty(0, 0);
    Vector none(0);
    CHECK_THROWS_AS(panelkit::solve_least_squares(empty, none), std::invalid_argument);
}

TEST_CASE("t distribution: symmetry point and published two-sided values") {
    for (int dof : {1, 2, 5, 27, 296}) CHECK(panelkit::t_cdf(0.0, dof) == doctest::Approx(0.5).epsilon(1e-14));

    CHECK(std::abs(panelkit::t_two_sided_p(3.708, 27) - 0.001) < 0.0005);
    CHECK(std::abs(panelkit::t_two_sided_p(-3.708, 27) - 0.001) < 0.0005);
    CHECK(std::abs(panelkit::t_two_sided_p(1.862, 296) - 0.064) < 0.002);
}

TEST_CASE("t distribution handles extreme arguments") {
    CHECK(panelkit::t_cdf(std::numeric_limits<double>::infinity(), 5) == 1.0);
    CHECK(panelkit::t_cdf(-std::numeric_limits<double>::infinity(), 5) == 0.0);
    CHECK(panelkit::t_two_sided_p(0.0, 10) == doctest::Approx(1.0).epsilon(1e-14));
    // Far-tail probabilities stay positive instead of rounding to zero.
    double far = panelkit::t_two_sided_p(25.0, 296);
    CHECK(far > 0.0);
    CHECK(far < 1e-50);
}

TEST_CASE("F distribution: bounds, far tail, and the t-squared identity") {
    CHECK(panelkit::f_cdf(0.0, 27, 308) == 0.0);
    CHECK(1.0 - panelkit::f_cdf(16.6, 27, 10000) < 0.0005);

    for (int k : {3, 10, 27, 296}) {
        for (double t : {0.3, 1.0, 2.5, 3.708}) {
            double via_f = 1.0 - panelkit::f_cdf(t * t, 1, k);
            double via_t = panelkit::t_two_sided_p(t, k);
            CHECK(std::abs(via_f - via_t) < 1e-9);
        }
    }
}

TEST_CASE("chi-square distribution: bounds, far tail, closed form at dof 2") {
    CHECK(panelkit::chi2_cdf(0.0, 11) == 0.0);
    CHECK(1.0 - panelkit::chi2_cdf(147.6, 11) < 1e-6);
    for (double x = 0.0; x <= 50.0; x += 0.5) {
        double closed = 1.0 - std::exp(-x / 2.0);
        CHECK(std::abs(panelkit::chi2_cdf(x, 2) - closed) < 1e-10);
    }
}

TEST_CASE("all CDFs are monotone and bounded") {
    auto check_monotone = [](auto f) {
        double prev = -1.0;
        for (double x = 0.0; x <= 60.0; x += 0.25) {
            double p = f(x);
            CHECK(p >= prev);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            prev = p;
        }
    };
    check_monotone([](double x) { return panelkit::t_cdf(x - 30.0, 7); });
    check_monotone([](double x) { return panelkit::f_cdf(x, 4, 19); });
    check_monotone([](double x) { return panelkit::chi2_cdf(x, 11); });
}

TEST_CASE("CDF spot values agree with the quadrature reference") {
    for (int dof : {1, 2, 5, 27, 120, 296}) {
        for (double x : {-3.708, -1.2, -0.3, 0.4, 1.862, 2.9}) {
            CHECK(std::abs(panelkit::t_cdf(x, dof) - oracle::t_cdf(x, dof)) < 1e-8);
        }
    }
    int f_pairs[][2] = {{1, 1}, {1, 27}, {2, 9}, {3, 7}, {11, 296}, {27, 27}};
    for (auto& pair : f_pairs) {
        for (double x : {0.05, 0.4, 1.0, 2.7, 16.6}) {
            CHECK(std::abs(panelkit::f_cdf(x, pair[0], pair[1]) - oracle::f_cdf(x, pair[0], pair[1])) < 1e-8);
        }
    }
    for (int dof : {1, 2, 3, 11, 40}) {
        for (double x : {0.05, 0.9, 4.2, 11.0, 30.0}) {
            CHECK(std::abs(panelkit::chi2_cdf(x, dof) - oracle::chi2_cdf(x, dof)) < 1e-8);
        }
    }
}

TEST_CASE("distribution argument validation") {
    CHECK_THROWS_AS(panelkit::t_cdf(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::f_cdf(1.0, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::f_cdf(1.0, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::f_cdf(-0.5, 5, 5), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::chi2_cdf(1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::chi2_cdf(-1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::t_cdf(std::numeric_limits<double>::quiet_NaN(), 3), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::t_quantile(0.0, 5), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::t_quantile(1.0, 5), std::invalid_argument);
}

TEST_CASE("t_quantile inverts t_cdf") {
    for (int dof : {1, 5, 27, 296}) {
        for (double p : {0.025, 0.3, 0.5, 0.8, 0.975}) {
            double q = panelkit::t_quantile(p, dof);
            CHECK(std::abs(panelkit::t_cdf(q, dof) - p) < 1e-9);
        }
    }
    CHECK(std::abs(panelkit::t_quantile(0.5, 9)) < 1e-9);
    CHECK(panelkit::t_quantile(0.975, 27) == doctest::Approx(2.0518).epsilon(5e-4));
}

TEST_CASE("incomplete beta and gamma endpoints and complements") {
    CHECK(panelkit::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(panelkit::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    for (double x : {0.3, 2.0, 9.0}) {
        double lower = panelkit::incomplete_gamma_lower(2.5, x);
        double upper = panelkit::incomplete_gamma_upper(2.5, x);
        CHECK(std::abs(lower + upper - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(panelkit::incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::incomplete_gamma_lower(-1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::incomplete_gamma_upper(1.0, -0.5), std::invalid_argument);
}

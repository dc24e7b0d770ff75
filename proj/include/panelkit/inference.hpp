#pragma once

#include "panelkit/estimators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace panelkit {

enum class Distribution { student_t, f, chi_square };
enum class WaldForm { f, chi_square };

std::string to_string(Distribution d);

struct TestResult {
    std::string name;
    double statistic = 0.0;
    Distribution distribution = Distribution::student_t;
    int dof1 = 0;
    std::optional<int> dof2;
    double p_value = 1.0;
    std::string detail;
};

// s^2 (X'X)^-1 with s^2 = RSS / dof_residual.
Matrix classical_covariance(const FitResult& fit);

// Entity-clustered sandwich, robust to arbitrary within-cluster serial
// correlation and heteroskedasticity. `cluster` assigns one cluster id per
// design row. The small-sample factor is G/(G-1) * (n-1)/(n-p) with p the
// full parameter count, absorbed effects included.
Matrix cluster_robust_covariance(const FitResult& fit, const std::vector<int>& cluster,
                                 bool small_sample = true);

// Raw sandwich building block (exposed for cross-checks).
Matrix cluster_sandwich(const Matrix& X, const Vector& residuals, const Matrix& xtx_inverse,
                        const std::vector<int>& cluster, double small_sample_factor);

// statistic = coefficient / sqrt(covariance diagonal); two-sided p at `dof`.
TestResult t_test(const FitResult& fit, const std::string& coefficient,
                  const Matrix& covariance, int dof);

// W = b' V^-1 b on the selected coefficients. The chi-square form reports W
// with dof = restriction count; the f form reports W/q with
// dof (q, denominator_dof) — pass the denominator convention explicitly
// (cluster count minus one for cluster-robust covariances).
TestResult joint_wald_test(const FitResult& fit, const std::vector<std::string>& coefficients,
                           const Matrix& covariance, WaldForm form, int denominator_dof = 0);

// H = d' (V_FE - V_RE)^- d over the shared slope coefficients (intercept and
// dummies excluded), chi-square with dof = comparison-set size. When the
// variance difference is not positive definite the statistic uses a
// generalized inverse on its positive eigenspace, dof drops to that rank,
// and a warning is appended to `detail`. Uses the covariances stored in the
// fits, so feed it classically-estimated ones.
TestResult hausman_test(const FitResult& fe, const FitResult& re);

}  // namespace panelkit

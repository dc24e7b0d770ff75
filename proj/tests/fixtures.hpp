#pragma once

// Hand-assembled fits exercising the report renderer across its formatting
// rules: mixed coefficient magnitudes, robust headers, and both joint dummy
// tests. The rendered outputs are pinned byte-for-byte in tests/golden/.

#include <panelkit/numerics.hpp>
#include <panelkit/report.hpp>

#include <string>
#include <vector>

namespace fixtures {

struct RenderedFixture {
    panelkit::FitResult fit;
    panelkit::ReportTests tests;
};

inline panelkit::TestResult t_result(const std::string& name, double statistic, int dof) {
    panelkit::TestResult out;
    out.name = name;
    out.statistic = statistic;
    out.distribution = panelkit::Distribution::student_t;
    out.dof1 = dof;
    out.p_value = panelkit::t_two_sided_p(statistic, dof);
    return out;
}

inline panelkit::FitResult table_fit(std::vector<std::string> regressors,
                                     std::vector<double> coefficients,
                                     std::vector<double> standard_errors,
                                     double r_squared) {
    panelkit::FitResult fit;
    fit.spec.dependent = "PRP";
    fit.spec.regressors = std::move(regressors);
    fit.spec.effects = panelkit::Effects::twoway;
    fit.spec.covariance = panelkit::CovarianceType::cluster_entity;
    fit.spec.intercept = true;
    fit.estimator_kind = panelkit::EstimatorKind::fe_lsdv;

    fit.coefficient_names.push_back("const");
    for (const auto& name : fit.spec.regressors) fit.coefficient_names.push_back(name);
    const auto k = static_cast<Eigen::Index>(fit.coefficient_names.size());
    fit.coefficients = Eigen::Map<const panelkit::Vector>(coefficients.data(), k);
    fit.covariance = panelkit::Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        fit.covariance(i, i) = standard_errors[(size_t)i] * standard_errors[(size_t)i];
    }

    fit.r_squared_overall = r_squared;
    fit.n_obs = 336;
    fit.n_params = static_cast<int>(k) + 27 + 11;
    fit.dof_residual = fit.n_obs - fit.n_params;
    fit.design.dummy_blocks = {{"DR", static_cast<int>(k), 27},
                               {"DT", static_cast<int>(k) + 27, 11}};
    return fit;
}

inline panelkit::TestResult regional_f(double statistic) {
    panelkit::TestResult out;
    out.name = "joint";
    out.statistic = statistic;
    out.distribution = panelkit::Distribution::f;
    out.dof1 = 27;
    out.dof2 = 27;
    out.p_value = 1.0 - panelkit::f_cdf(statistic, 27, 27);
    return out;
}

inline panelkit::TestResult time_chi(double statistic) {
    panelkit::TestResult out;
    out.name = "joint";
    out.statistic = statistic;
    out.distribution = panelkit::Distribution::chi_square;
    out.dof1 = 11;
    out.p_value = 1.0 - panelkit::chi2_cdf(statistic, 11);
    return out;
}

// Bivariate layout: one slope, cluster-count t dof.
inline RenderedFixture bivariate_table() {
    RenderedFixture out;
    out.fit = table_fit({"Empl"}, {196.417, -0.787}, {25.286, 0.212}, 0.51);
    out.tests.coefficient_tests = {t_result("const", 7.768, 27), t_result("Empl", -3.708, 27)};
    out.tests.regional_joint = regional_f(16.6);
    out.tests.time_joint = time_chi(147.6);
    return out;
}

// Multivariate layout: four slopes spanning the small-magnitude formatting
// branches, residual-style t dof.
inline RenderedFixture multivariate_table() {
    RenderedFixture out;
    out.fit = table_fit({"Empl", "TFA", "RB", "DNR1"},
                        {13.955, -1.010, -0.000024, 0.00108, 0.00283},
                        {131.203, 0.205, 0.000004, 0.00058, 0.00167}, 0.65);
    out.tests.coefficient_tests = {
        t_result("const", 0.106, 296),  t_result("Empl", -4.930, 296),
        t_result("TFA", -5.649, 296),   t_result("RB", 1.862, 296),
        t_result("DNR1", 1.695, 296)};
    out.tests.regional_joint = regional_f(14.4);
    out.tests.time_joint = time_chi(332.6);
    return out;
}

}  // namespace fixtures

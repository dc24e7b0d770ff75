#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <panelkit/estimators.hpp>
#include <panelkit/inference.hpp>
#include <panelkit/synthetic.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using panelkit::CovarianceType;
using panelkit::Effects;
using panelkit::FeMethod;
using panelkit::FitResult;
using panelkit::Matrix;
using panelkit::ModelSpec;
using panelkit::PanelBuilder;
using panelkit::PanelDataset;
using panelkit::SyntheticPanelConfig;
using panelkit::Vector;

namespace {

PanelDataset dense_panel(int n_entities, int n_periods,
                         const std::vector<std::string>& variables,
                         const std::function<double(int, int, int)>& f) {
    PanelBuilder builder(variables);
    for (int e = 0; e < n_entities; ++e) {
        for (int t = 0; t < n_periods; ++t) {
            std::vector<std::optional<double>> row;
            for (size_t v = 0; v < variables.size(); ++v)
                row.push_back(f(e, t, static_cast<int>(v)));
            builder.add_row("E" + std::to_string(10 + e), std::to_string(1 + t),
                            std::move(row));
        }
    }
    return builder.build();
}

ModelSpec spec_of(std::string dep, std::vector<std::string> regressors, Effects effects,
                  CovarianceType cov = CovarianceType::classical) {
    return ModelSpec{std::move(dep), std::move(regressors), effects, cov, true};
}

// Minimal fit carrying externally chosen coefficients and a diagonal
// covariance, for exercising the test statistics in isolation.
FitResult fixture_fit(const std::vector<std::string>& names, const std::vector<double>& values,
                      const std::vector<double>& standard_errors) {
    FitResult fit;
    fit.coefficient_names = names;
    fit.coefficients = Eigen::Map<const Vector>(values.data(), (Eigen::Index)values.size());
    fit.covariance = Matrix::Zero((Eigen::Index)names.size(), (Eigen::Index)names.size());
    for (size_t i = 0; i < standard_errors.size(); ++i) {
        fit.covariance((Eigen::Index)i, (Eigen::Index)i) =
            standard_errors[i] * standard_errors[i];
    }
    return fit;
}

}  // namespace

TEST_CASE("classical covariance vanishes on an exact fit") {
    PanelDataset data = dense_panel(4, 4, {"y", "x"}, [](int e, int t, int v) {
        double x = 0.5 * e - t;
        return v == 0 ? 2.0 + 3.0 * x : x;
    });
    auto fit = panelkit::fit_pooled(data, spec_of("y", {"x"}, Effects::none));
    Matrix cov = panelkit::classical_covariance(fit);
    CHECK(cov.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("classical covariance equals the explicit formula") {
    std::mt19937_64 rng(301);
    std::normal_distribution<double> normal;
    PanelDataset data = dense_panel(10, 5, {"y", "x1", "x2"},
                                    [&](int, int, int) { return normal(rng); });
    auto fit = panelkit::fit_pooled(data, spec_of("y", {"x1", "x2"}, Effects::none));

    Matrix X(50, 3);
    Vector y(50);
    for (int r = 0; r < 50; ++r) {
        X(r, 0) = 1.0;
        X(r, 1) = *data.value(r, 1);
        X(r, 2) = *data.value(r, 2);
        y(r) = *data.value(r, 0);
    }
    Vector beta = fit.coefficients;
    Vector u = y - X * beta;
    double s2 = u.squaredNorm() / (50 - 3);
    Matrix reference = s2 * (X.transpose() * X).inverse();
    CHECK((panelkit::classical_covariance(fit) - reference).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("duplicating every observation shrinks classical variance by the exact dof ratio") {
    std::mt19937_64 rng(302);
    std::normal_distribution<double> normal;
    PanelDataset data = dense_panel(6, 4, {"y", "x"},
                                    [&](int, int, int) { return normal(rng); });
    PanelBuilder dup_builder({"y", "x"});
    for (int r = 0; r < data.n_rows(); ++r) {
        const std::string& e = data.entities[(size_t)data.row_entity[r]];
        const std::string& t = data.periods[(size_t)data.row_period[r]];
        dup_builder.add_row(e, t, {*data.value(r, 0), *data.value(r, 1)});
        dup_builder.add_row(e + "_copy", t, {*data.value(r, 0), *data.value(r, 1)});
    }
    PanelDataset doubled = dup_builder.build();

    auto fit = panelkit::fit_pooled(data, spec_of("y", {"x"}, Effects::none));
    auto fit2 = panelkit::fit_pooled(doubled, spec_of("y", {"x"}, Effects::none));
    CHECK((fit.coefficients - fit2.coefficients).cwiseAbs().maxCoeff() < 1e-10);

    const double n = data.n_rows(), p = 2;
    Matrix expected = panelkit::classical_covariance(fit) * (n - p) / (2 * n - p);
    CHECK((panelkit::classical_covariance(fit2) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("singleton clusters without the small-sample factor give the plain sandwich") {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> normal;
    const int n = 40;
    Matrix X(n, 3);
    Vector y(n);
    for (int r = 0; r < n; ++r) {
        X(r, 0) = 1.0;
        X(r, 1) = normal(rng);
        X(r, 2) = normal(rng);
        y(r) = 1.0 + X(r, 1) - 2.0 * X(r, 2) + normal(rng) * (1.0 + 0.5 * std::abs(X(r, 1)));
    }
    auto sol = panelkit::solve_least_squares(X, y);
    std::vector<int> own_cluster(n);
    std::iota(own_cluster.begin(), own_cluster.end(), 0);
    Matrix clustered =
        panelkit::cluster_sandwich(X, sol.residuals, sol.xtx_inverse, own_cluster, 1.0);

    Matrix meat = Matrix::Zero(3, 3);
    for (int r = 0; r < n; ++r) {
        Vector xr = X.row(r).transpose();
        meat += sol.residuals(r) * sol.residuals(r) * xr * xr.transpose();
    }
    Matrix hc0 = sol.xtx_inverse * meat * sol.xtx_inverse;
    CHECK((clustered - hc0).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("robust and classical standard errors agree under homoskedastic independence") {
    SyntheticPanelConfig config;
    config.n_entities = 28;
    config.n_periods = 12;
    config.slopes = {{"x", 1.0}};
    config.noise_sd = 1.0;

    auto spec = spec_of("y", {"x"}, Effects::none);
    double ratio_sum = 0.0;
    const int reps = 1000;
    for (int rep = 0; rep < reps; ++rep) {
        config.seed = panelkit::derive_seed(31337, (std::uint64_t)rep);
        PanelDataset data = panelkit::generate_panel(config);
        auto fit = panelkit::fit_pooled(data, spec);
        int i = fit.coefficient_index("x");
        Matrix classical = panelkit::classical_covariance(fit);
        Matrix robust = panelkit::cluster_robust_covariance(fit, fit.design.entity_index);
        ratio_sum += std::sqrt(robust(i, i)) / std::sqrt(classical(i, i));
    }
    CHECK(std::abs(ratio_sum / reps - 1.0) < 0.1);
}

TEST_CASE("serially correlated errors break classical coverage but not clustered coverage") {
    SyntheticPanelConfig config;
    config.n_entities = 28;
    config.n_periods = 12;
    config.slopes = {{"x", -0.787}};
    config.entity_effect_sd = 3.0;
    config.time_effect_sd = 1.0;
    config.noise_sd = 2.0;
    config.within_entity_ar1 = 0.7;
    config.regressor_ar1 = 0.7;

    auto spec = spec_of("y", {"x"}, Effects::twoway, CovarianceType::cluster_entity);
    int classical_hits = 0, robust_hits = 0;
    const int reps = 400;
    const double t_cluster = panelkit::t_quantile(0.975, 27);
    for (int rep = 0; rep < reps; ++rep) {
        config.seed = panelkit::derive_seed(5150, (std::uint64_t)rep);
        PanelDataset data = panelkit::generate_panel(config);
        auto fit = panelkit::fit_fixed_effects(data, spec, FeMethod::within);
        int i = fit.coefficient_index("x");
        double beta = fit.coefficients(i);
        double se_r = std::sqrt(fit.covariance(i, i));
        Matrix classical = panelkit::classical_covariance(fit);
        double se_c = std::sqrt(classical(i, i));
        double t_classical = panelkit::t_quantile(0.975, fit.dof_residual);
        if (std::abs(beta + 0.787) <= t_classical * se_c) ++classical_hits;
        if (std::abs(beta + 0.787) <= t_cluster * se_r) ++robust_hits;
    }
    double classical_coverage = (double)classical_hits / reps;
    double robust_coverage = (double)robust_hits / reps;
    CHECK(classical_coverage < 0.90);
    CHECK(robust_coverage >= 0.90);
    CHECK(robust_coverage <= 0.99);
    CHECK(robust_coverage > classical_coverage);
}

TEST_CASE("cluster covariance rejects degenerate clusterings") {
    std::mt19937_64 rng(304);
    std::normal_distribution<double> normal;
    PanelDataset data = dense_panel(3, 4, {"y", "x"},
                                    [&](int, int, int) { return normal(rng); });
    auto fit = panelkit::fit_pooled(data, spec_of("y", {"x"}, Effects::none));
    std::vector<int> one_cluster((size_t)fit.n_obs, 0);
    CHECK_THROWS_AS(panelkit::cluster_robust_covariance(fit, one_cluster),
                    std::invalid_argument);
    std::vector<int> short_ids(3, 0);
    CHECK_THROWS_AS(panelkit::cluster_robust_covariance(fit, short_ids), std::invalid_argument);
}

TEST_CASE("t statistics reproduce published ratio examples") {
    auto fit = fixture_fit({"const", "x"}, {196.417, -0.787}, {25.286, 0.212});
    auto test = panelkit::t_test(fit, "x", fit.covariance, 27);
    CHECK(std::abs(test.statistic - (-3.71)) < 0.005);
    CHECK(test.distribution == panelkit::Distribution::student_t);
    CHECK(test.dof1 == 27);
    CHECK(test.p_value == doctest::Approx(panelkit::t_two_sided_p(test.statistic, 27)));

    auto fit2 = fixture_fit({"const", "w"}, {3.0, -1.010}, {1.0, 0.205});
    auto test2 = panelkit::t_test(fit2, "w", fit2.covariance, 296);
    CHECK(std::abs(test2.statistic - (-4.93)) < 0.005);
}

TEST_CASE("a zero coefficient gives t = 0 and p = 1") {
    auto fit = fixture_fit({"x"}, {0.0}, {0.4});
    auto test = panelkit::t_test(fit, "x", fit.covariance, 17);
    CHECK(test.statistic == 0.0);
    CHECK(test.p_value == 1.0);
}

TEST_CASE("t test rejects unknown names and zero standard errors") {
    auto fit = fixture_fit({"x"}, {1.0}, {0.0});
    CHECK_THROWS_AS(panelkit::t_test(fit, "nope", fit.covariance, 10), std::invalid_argument);
    CHECK_THROWS_AS(panelkit::t_test(fit, "x", fit.covariance, 10), std::runtime_error);
    auto ok = fixture_fit({"x"}, {1.0}, {0.5});
    CHECK_THROWS_AS(panelkit::t_test(ok, "x", ok.covariance, 0), std::invalid_argument);
}

TEST_CASE("joint test on exactly-zero coefficients is the null point") {
    auto fit = fixture_fit({"a", "b"}, {0.0, 0.0}, {0.3, 0.7});
    auto test = panelkit::joint_wald_test(fit, {"a", "b"}, fit.covariance,
                                          panelkit::WaldForm::chi_square);
    CHECK(test.statistic == 0.0);
    CHECK(test.p_value == 1.0);
    CHECK(test.dof1 == 2);
}

TEST_CASE("single-restriction chi-square Wald equals the squared t statistic") {
    std::mt19937_64 rng(305);
    std::normal_distribution<double> normal;
    PanelDataset data = dense_panel(8, 5, {"y", "x", "w"},
                                    [&](int, int, int) { return normal(rng); });
    auto fit = panelkit::fit_pooled(data, spec_of("y", {"x", "w"}, Effects::none));
    Matrix cov = panelkit::classical_covariance(fit);
    auto t = panelkit::t_test(fit, "w", cov, fit.dof_residual);
    auto wald = panelkit::joint_wald_test(fit, {"w"}, cov, panelkit::WaldForm::chi_square);
    CHECK(std::abs(wald.statistic - t.statistic * t.statistic) < 1e-10);
}

TEST_CASE("Wald statistic ignores the order of the tested set") {
    std::mt19937_64 rng(306);
    std::normal_distribution<double> normal;
    PanelDataset data = dense_panel(8, 6, {"y", "x1", "x2", "x3"},
                                    [&](int, int, int) { return normal(rng); });
    auto fit = panelkit::fit_pooled(data, spec_of("y", {"x1", "x2", "x3"}, Effects::none));
    Matrix cov = panelkit::classical_covariance(fit);
    auto a = panelkit::joint_wald_test(fit, {"x1", "x2", "x3"}, cov,
                                       panelkit::WaldForm::chi_square);
    auto b = panelkit::joint_wald_test(fit, {"x3", "x1", "x2"}, cov,
                                       panelkit::WaldForm::chi_square);
    CHECK(std::abs(a.statistic - b.statistic) < 1e-12);
    CHECK(a.dof1 == b.dof1);
}

TEST_CASE("the f form divides by the restriction count and carries both dof") {
    auto fit = fixture_fit({"a", "b"}, {1.0, -1.0}, {0.5, 0.5});
    auto chi = panelkit::joint_wald_test(fit, {"a", "b"}, fit.covariance,
                                         panelkit::WaldForm::chi_square);
    auto f = panelkit::joint_wald_test(fit, {"a", "b"}, fit.covariance, panelkit::WaldForm::f,
                                       27);
    CHECK(f.statistic == doctest::Approx(chi.statistic / 2.0).epsilon(1e-12));
    CHECK(f.dof1 == 2);
    REQUIRE(f.dof2.has_value());
    CHECK(*f.dof2 == 27);
    CHECK(f.distribution == panelkit::Distribution::f);
    CHECK_THROWS_AS(panelkit::joint_wald_test(fit, {"a"}, fit.covariance, panelkit::WaldForm::f, 0),
                    std::invalid_argument);
}

TEST_CASE("time-dummy Wald on a two-way fit has one restriction per non-baseline period") {
    SyntheticPanelConfig config;
    config.n_entities = 28;
    config.n_periods = 12;
    config.slopes = {{"x", 1.0}};
    config.entity_effect_sd = 1.0;
    config.time_effect_sd = 4.0;
    config.noise_sd = 1.0;
    config.seed = 67;
    PanelDataset data = panelkit::generate_panel(config);
    auto fit = panelkit::fit_fixed_effects(data, spec_of("y", {"x"}, Effects::twoway),
                                           FeMethod::lsdv);

    std::vector<std::string> time_dummies;
    for (const auto& name : fit.coefficient_names) {
        if (name.rfind("DT_", 0) == 0) time_dummies.push_back(name);
    }
    REQUIRE(time_dummies.size() == 11);
    Matrix cov = panelkit::cluster_robust_covariance(fit, fit.design.entity_index);
    auto wald = panelkit::joint_wald_test(fit, time_dummies, cov,
                                          panelkit::WaldForm::chi_square);
    CHECK(wald.dof1 == 11);
    CHECK(wald.statistic > 0.0);
    CHECK(wald.p_value < 0.05);  // planted strong time effects
}

TEST_CASE("a singular tested covariance is reported with its rank") {
    auto fit = fixture_fit({"a", "b"}, {1.0, 2.0}, {0.5, 0.5});
    Matrix singular(2, 2);
    singular << 0.25, 0.25, 0.25, 0.25;  // rank one
    CHECK_THROWS_WITH_AS(
        panelkit::joint_wald_test(fit, {"a", "b"}, singular, panelkit::WaldForm::chi_square),
        doctest::Contains("rank 1 of 2"), std::runtime_error);
}

TEST_CASE("cluster sandwich is unchanged by row shuffles and cluster relabeling") {
    std::mt19937_64 rng(307);
    std::normal_distribution<double> normal;
    const int n = 30;
    Matrix X(n, 2);
    Vector u(n);
    std::vector<int> cluster(n);
    for (int r = 0; r < n; ++r) {
        X(r, 0) = 1.0;
        X(r, 1) = normal(rng);
        u(r) = normal(rng);
        cluster[(size_t)r] = r % 5;
    }
    Matrix xtx_inv = (X.transpose() * X).inverse();
    Matrix base = panelkit::cluster_sandwich(X, u, xtx_inv, cluster, 1.7);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Matrix Xp(n, 2);
    Vector up(n);
    std::vector<int> clusterp(n);
    for (int r = 0; r < n; ++r) {
        Xp.row(r) = X.row(order[(size_t)r]);
        up(r) = u(order[(size_t)r]);
        clusterp[(size_t)r] = cluster[(size_t)order[(size_t)r]];
    }
    Matrix shuffled = panelkit::cluster_sandwich(Xp, up, xtx_inv, clusterp, 1.7);
    CHECK((base - shuffled).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<int> relabeled(n);
    const int new_name[5] = {40, 7, 19, 3, 25};
    for (int r = 0; r < n; ++r) relabeled[(size_t)r] = new_name[cluster[(size_t)r]];
    Matrix renamed = panelkit::cluster_sandwich(X, u, xtx_inv, relabeled, 1.7);
    CHECK((base - renamed).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariances are symmetric with nonnegative diagonals") {
    std::mt19937_64 rng(308);
    std::normal_distribution<double> normal;
    PanelDataset data = dense_panel(7, 6, {"y", "x1", "x2"},
                                    [&](int, int, int) { return normal(rng); });
    auto fit = panelkit::fit_fixed_effects(
        data, spec_of("y", {"x1", "x2"}, Effects::twoway, CovarianceType::cluster_entity),
        FeMethod::within);
    for (const Matrix& cov : {panelkit::classical_covariance(fit),
                              panelkit::cluster_robust_covariance(fit, fit.design.entity_index)}) {
        CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(cov.diagonal().minCoeff() >= 0.0);
    }
}

TEST_CASE("p-values are invariant to regressor rescaling") {
    std::mt19937_64 rng(309);
    std::normal_distribution<double> normal;
    PanelDataset base = dense_panel(6, 6, {"y", "x"},
                                    [&](int, int, int) { return normal(rng); });
    PanelBuilder builder({"y", "x"});
    for (int r = 0; r < base.n_rows(); ++r) {
        builder.add_row(base.entities[(size_t)base.row_entity[r]],
                        base.periods[(size_t)base.row_period[r]],
                        {*base.value(r, 0), 1000.0 * *base.value(r, 1)});
    }
    PanelDataset scaled = builder.build();

    auto spec = spec_of("y", {"x"}, Effects::twoway, CovarianceType::cluster_entity);
    auto fit_a = panelkit::fit_fixed_effects(base, spec, FeMethod::within);
    auto fit_b = panelkit::fit_fixed_effects(scaled, spec, FeMethod::within);
    auto test_a = panelkit::t_test(fit_a, "x", fit_a.covariance, 5);
    auto test_b = panelkit::t_test(fit_b, "x", fit_b.covariance, 5);
    CHECK(std::abs(test_a.statistic - test_b.statistic) < 1e-10);
    CHECK(std::abs(test_a.p_value - test_b.p_value) < 1e-10);
}

TEST_CASE("identical fixed and random estimates give a null Hausman result") {
    auto fe = fixture_fit({"x", "w"}, {1.3, -0.4}, {0.30, 0.20});
    auto re = fixture_fit({"const", "x", "w"}, {0.2, 1.3, -0.4}, {0.10, 0.25, 0.15});
    fe.spec = spec_of("y", {"x", "w"}, Effects::entity);
    re.spec = spec_of("y", {"x", "w"}, Effects::entity);
    auto test = panelkit::hausman_test(fe, re);
    CHECK(test.statistic == 0.0);
    CHECK(test.p_value == 1.0);
    CHECK(test.dof1 == 2);
    CHECK(test.distribution == panelkit::Distribution::chi_square);
}

TEST_CASE("Hausman comparison requires matching models") {
    auto fe = fixture_fit({"x"}, {1.0}, {0.3});
    fe.spec = spec_of("y", {"x"}, Effects::entity);
    auto re = fixture_fit({"const", "x"}, {0.1, 1.0}, {0.1, 0.2});
    re.spec = spec_of("z", {"x"}, Effects::entity);
    CHECK_THROWS_AS(panelkit::hausman_test(fe, re), std::invalid_argument);

    auto re_disjoint = fixture_fit({"const", "w"}, {0.1, 1.0}, {0.1, 0.2});
    re_disjoint.spec = spec_of("y", {"w"}, Effects::entity);
    CHECK_THROWS_AS(panelkit::hausman_test(fe, re_disjoint), std::invalid_argument);
}

TEST_CASE("Hausman test keeps size under exogeneity and rejects under correlation") {
    SyntheticPanelConfig config;
    config.n_entities = 28;
    config.n_periods = 12;
    config.slopes = {{"x", 1.0}};
    config.entity_effect_sd = 2.0;
    config.noise_sd = 1.0;

    auto run = [&](double corr, int reps) {
        config.effect_regressor_correlation = corr;
        auto fe_spec = spec_of("y", {"x"}, Effects::entity);
        int rejections = 0;
        for (int rep = 0; rep < reps; ++rep) {
            config.seed = panelkit::derive_seed(808, (std::uint64_t)rep);
            PanelDataset data = panelkit::generate_panel(config);
            auto fe = panelkit::fit_fixed_effects(data, fe_spec, FeMethod::within);
            auto re = panelkit::fit_random_effects(data, fe_spec);
            auto test = panelkit::hausman_test(fe, re);
            if (test.p_value < 0.05) ++rejections;
        }
        return (double)rejections / reps;
    };

    CHECK(run(0.0, 200) <= 0.10);
    CHECK(run(0.8, 200) > 0.80);
}

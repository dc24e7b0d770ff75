#include "panelkit/json_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <stdexcept>

namespace panelkit {

using nlohmann::json;

namespace {

std::string csv_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* what) {
    for (const auto& [key, value] : j.items()) {
        bool found = false;
        for (const char* k : known) {
            if (key == k) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument(std::string(what) + " has unknown key '" + key + "'");
        }
    }
}

}  // namespace

json test_to_json(const TestResult& test) {
    json out = {
        {"name", test.name},
        {"statistic", test.statistic},
        {"distribution", to_string(test.distribution)},
        {"dof1", test.dof1},
        {"p_value", test.p_value},
    };
    if (test.dof2) out["dof2"] = *test.dof2;
    if (!test.detail.empty()) out["detail"] = test.detail;
    return out;
}

json spec_to_json(const ModelSpec& spec) {
    return {
        {"dependent", spec.dependent},
        {"regressors", spec.regressors},
        {"effects", to_string(spec.effects)},
        {"covariance", to_string(spec.covariance)},
        {"intercept", spec.intercept},
    };
}

ModelSpec spec_from_json(const json& j) {
    reject_unknown_keys(j, {"dependent", "regressors", "effects", "covariance", "intercept"},
                        "model spec");
    ModelSpec spec;
    spec.dependent = j.at("dependent").get<std::string>();
    if (j.contains("regressors")) {
        spec.regressors = j.at("regressors").get<std::vector<std::string>>();
    }
    if (j.contains("effects")) {
        spec.effects = effects_from_string(j.at("effects").get<std::string>());
    }
    if (j.contains("covariance")) {
        spec.covariance = covariance_from_string(j.at("covariance").get<std::string>());
    }
    if (j.contains("intercept")) {
        spec.intercept = j.at("intercept").get<bool>();
    }
    return spec;
}

json fit_to_json(const FitResult& fit, const ReportTests* tests) {
    json coefficients = json::array();
    for (size_t i = 0; i < fit.coefficient_names.size(); ++i) {
        coefficients.push_back({
            {"name", fit.coefficient_names[i]},
            {"estimate", fit.coefficients[static_cast<Eigen::Index>(i)]},
            {"se", std::sqrt(std::max(
                       0.0, fit.covariance(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(i))))},
        });
    }
    json out = {
        {"estimator", to_string(fit.estimator_kind)},
        {"spec", spec_to_json(fit.spec)},
        {"coefficients", std::move(coefficients)},
        {"covariance", matrix_to_json(fit.covariance)},
        {"n_obs", fit.n_obs},
        {"n_params", fit.n_params},
        {"dof_residual", fit.dof_residual},
        {"rss", fit.rss},
        {"r_squared", fit.r_squared_overall},
        {"n_dropped", fit.design.n_dropped},
        {"balanced", fit.design.balanced},
        {"warnings", fit.warnings},
    };
    if (fit.r_squared_within) out["r_squared_within"] = *fit.r_squared_within;
    if (fit.re_theta) {
        out["random_effects"] = {
            {"theta", *fit.re_theta},
            {"sigma2_entity", *fit.re_sigma2_entity},
            {"sigma2_epsilon", *fit.re_sigma2_epsilon},
        };
    }
    if (tests) {
        json t = json::object();
        json per_coefficient = json::array();
        for (const auto& test : tests->coefficient_tests) {
            per_coefficient.push_back(test_to_json(test));
        }
        t["coefficients"] = std::move(per_coefficient);
        if (tests->regional_joint) t["regional_joint"] = test_to_json(*tests->regional_joint);
        if (tests->time_joint) t["time_joint"] = test_to_json(*tests->time_joint);
        out["tests"] = std::move(t);
    }
    return out;
}

json trace_to_json(const StepwiseTrace& trace) {
    json steps = json::array();
    for (const auto& step : trace.steps) {
        steps.push_back({
            {"action", step.action == StepwiseStep::Action::add ? "add" : "remove"},
            {"variable", step.variable},
            {"p_value", step.p_value},
            {"model_size", step.model_size},
        });
    }
    json skips = json::array();
    for (const auto& skip : trace.skips) {
        skips.push_back({
            {"sweep", skip.sweep},
            {"variable", skip.variable},
            {"reason", skip.reason},
        });
    }
    return {
        {"steps", std::move(steps)},
        {"skips", std::move(skips)},
        {"final_regressors", trace.final_spec.regressors},
        {"candidate_pool", trace.candidate_pool},
        {"p_enter", trace.p_enter},
        {"p_remove", trace.p_remove},
        {"notes", trace.notes},
    };
}

json summary_to_json(const MonteCarloSummary& summary) {
    json coefficients = json::array();
    for (const auto& c : summary.coefficients) {
        coefficients.push_back({
            {"name", c.name},
            {"true_value", c.true_value},
            {"mean_estimate", c.mean_estimate},
            {"bias", c.bias},
            {"rmse", c.rmse},
            {"classical_coverage", c.classical_coverage},
            {"robust_coverage", c.robust_coverage},
            {"mean_classical_se", c.mean_classical_se},
            {"mean_robust_se", c.mean_robust_se},
        });
    }
    json out = {
        {"replications", summary.replications},
        {"failures", summary.failures},
        {"master_seed", summary.master_seed},
        {"coefficients", std::move(coefficients)},
        {"hausman_warnings", summary.hausman_warnings},
    };
    if (summary.hausman_rejection_rate) {
        out["hausman_rejection_rate"] = *summary.hausman_rejection_rate;
    }
    if (summary.mean_re_sigma2_entity) {
        out["mean_re_sigma2_entity"] = *summary.mean_re_sigma2_entity;
        out["mean_re_sigma2_epsilon"] = *summary.mean_re_sigma2_epsilon;
    }
    return out;
}

json comparison_to_json(const RegionalComparison& comparison) {
    json entities = json::array();
    for (const auto& e : comparison.per_entity) {
        entities.push_back({
            {"entity", e.entity},
            {"value_a", e.value_a},
            {"value_b", e.value_b},
            {"change", e.change},
            {"classification", to_string(e.classification)},
        });
    }
    return {
        {"variable", comparison.variable},
        {"period_a", comparison.period_a},
        {"period_b", comparison.period_b},
        {"stable_band", comparison.stable_band},
        {"entities", std::move(entities)},
        {"ranking_a", comparison.ranking_a},
        {"ranking_b", comparison.ranking_b},
        {"only_in_a", comparison.only_in_a},
        {"only_in_b", comparison.only_in_b},
    };
}

std::string comparison_to_csv(const RegionalComparison& comparison) {
    std::string out = "entity," + comparison.period_a + "," + comparison.period_b +
                      ",change,classification\n";
    for (const auto& e : comparison.per_entity) {
        out += e.entity + "," + csv_number(e.value_a) + "," + csv_number(e.value_b) + "," +
               csv_number(e.change) + "," + to_string(e.classification) + "\n";
    }
    return out;
}

json config_to_json(const SyntheticPanelConfig& config) {
    json slopes = json::array();
    for (const auto& [name, beta] : config.slopes) {
        slopes.push_back(json::array({name, beta}));
    }
    return {
        {"n_entities", config.n_entities},
        {"n_periods", config.n_periods},
        {"slopes", std::move(slopes)},
        {"intercept", config.intercept},
        {"entity_effect_sd", config.entity_effect_sd},
        {"time_effect_sd", config.time_effect_sd},
        {"noise_sd", config.noise_sd},
        {"within_entity_ar1", config.within_entity_ar1},
        {"regressor_ar1", config.regressor_ar1},
        {"effect_regressor_correlation", config.effect_regressor_correlation},
        {"shared_factor_variables", config.shared_factor_variables},
        {"shared_factor_weight", config.shared_factor_weight},
        {"seed", config.seed},
        {"dependent", config.dependent},
    };
}

SyntheticPanelConfig config_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"n_entities", "n_periods", "slopes", "intercept", "entity_effect_sd",
                         "time_effect_sd", "noise_sd", "within_entity_ar1", "regressor_ar1",
                         "effect_regressor_correlation", "shared_factor_variables",
                         "shared_factor_weight", "seed", "dependent"},
                        "generator config");
    SyntheticPanelConfig config;
    config.n_entities = j.at("n_entities").get<int>();
    config.n_periods = j.at("n_periods").get<int>();
    for (const auto& entry : j.at("slopes")) {
        if (!entry.is_array() || entry.size() != 2) {
            throw std::invalid_argument("each slope must be a [name, coefficient] pair");
        }
        config.slopes.emplace_back(entry[0].get<std::string>(), entry[1].get<double>());
    }
    if (j.contains("intercept")) config.intercept = j.at("intercept").get<double>();
    if (j.contains("entity_effect_sd")) {
        config.entity_effect_sd = j.at("entity_effect_sd").get<double>();
    }
    if (j.contains("time_effect_sd")) {
        config.time_effect_sd = j.at("time_effect_sd").get<double>();
    }
    if (j.contains("noise_sd")) config.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("within_entity_ar1")) {
        config.within_entity_ar1 = j.at("within_entity_ar1").get<double>();
    }
    if (j.contains("regressor_ar1")) {
        config.regressor_ar1 = j.at("regressor_ar1").get<double>();
    }
    if (j.contains("effect_regressor_correlation")) {
        config.effect_regressor_correlation = j.at("effect_regressor_correlation").get<double>();
    }
    if (j.contains("shared_factor_variables")) {
        config.shared_factor_variables =
            j.at("shared_factor_variables").get<std::vector<std::string>>();
    }
    if (j.contains("shared_factor_weight")) {
        config.shared_factor_weight = j.at("shared_factor_weight").get<double>();
    }
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("dependent")) config.dependent = j.at("dependent").get<std::string>();
    validate_config(config);
    return config;
}

}  // namespace panelkit

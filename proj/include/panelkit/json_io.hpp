#pragma once

#include "panelkit/montecarlo.hpp"
#include "panelkit/report.hpp"

#include <json.hpp>

#include <string>

namespace panelkit {

nlohmann::json fit_to_json(const FitResult& fit, const ReportTests* tests = nullptr);
nlohmann::json test_to_json(const TestResult& test);
nlohmann::json trace_to_json(const StepwiseTrace& trace);
nlohmann::json summary_to_json(const MonteCarloSummary& summary);
nlohmann::json comparison_to_json(const RegionalComparison& comparison);
std::string comparison_to_csv(const RegionalComparison& comparison);

nlohmann::json config_to_json(const SyntheticPanelConfig& config);
SyntheticPanelConfig config_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

}  // namespace panelkit

#pragma once

#include "panelkit/panel.hpp"

#include <string>
#include <vector>

namespace panelkit {

// Classification reads the variable as a poverty-style indicator: a fall
// beyond the stable band is an improvement, a rise is a worsening.
enum class ChangeClass { improved, worsened, stable };

std::string to_string(ChangeClass c);

struct EntityChange {
    std::string entity;
    double value_a = 0.0;
    double value_b = 0.0;
    double change = 0.0;  // value_b - value_a
    ChangeClass classification = ChangeClass::stable;
};

struct RegionalComparison {
    std::string variable;
    std::string period_a;
    std::string period_b;
    std::vector<EntityChange> per_entity;     // entities with values in both periods
    std::vector<std::string> ranking_a;       // descending value within period_a
    std::vector<std::string> ranking_b;
    std::vector<std::string> only_in_a;       // entities lacking the other period
    std::vector<std::string> only_in_b;
    double stable_band = 2.0;
};

RegionalComparison compare_periods(const PanelDataset& data, const std::string& variable,
                                   const std::string& period_a, const std::string& period_b,
                                   double stable_band = 2.0);

}  // namespace panelkit

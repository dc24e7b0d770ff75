#include "panelkit/compare.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panelkit {

std::string to_string(ChangeClass c) {
    switch (c) {
        case ChangeClass::improved: return "improved";
        case ChangeClass::worsened: return "worsened";
        case ChangeClass::stable: return "stable";
    }
    return "stable";
}

RegionalComparison compare_periods(const PanelDataset& data, const std::string& variable,
                                   const std::string& period_a, const std::string& period_b,
                                   double stable_band) {
    const int var = data.variable_index(variable);
    if (var < 0) {
        throw std::invalid_argument("variable '" + variable + "' not in dataset");
    }
    const int pa = data.period_index_of(period_a);
    if (pa < 0) {
        throw std::invalid_argument("period '" + period_a + "' not in dataset");
    }
    const int pb = data.period_index_of(period_b);
    if (pb < 0) {
        throw std::invalid_argument("period '" + period_b + "' not in dataset");
    }
    if (period_a == period_b) {
        throw std::invalid_argument("comparison needs two distinct periods");
    }
    if (!(stable_band >= 0.0) || !std::isfinite(stable_band)) {
        throw std::invalid_argument("stable band must be a nonnegative number");
    }

    RegionalComparison out;
    out.variable = variable;
    out.period_a = period_a;
    out.period_b = period_b;
    out.stable_band = stable_band;

    std::vector<std::pair<double, std::string>> in_a, in_b;
    for (size_t e = 0; e < data.entities.size(); ++e) {
        const int entity = static_cast<int>(e);
        const int row_a = data.row_of(entity, pa);
        const int row_b = data.row_of(entity, pb);
        const std::optional<double> va =
            row_a >= 0 ? data.value(row_a, var) : std::nullopt;
        const std::optional<double> vb =
            row_b >= 0 ? data.value(row_b, var) : std::nullopt;
        if (va) in_a.push_back({*va, data.entities[e]});
        if (vb) in_b.push_back({*vb, data.entities[e]});
        if (va && !vb) out.only_in_a.push_back(data.entities[e]);
        if (!va && vb) out.only_in_b.push_back(data.entities[e]);
        if (!va || !vb) continue;

        EntityChange change;
        change.entity = data.entities[e];
        change.value_a = *va;
        change.value_b = *vb;
        change.change = *vb - *va;
        if (change.change < -stable_band) {
            change.classification = ChangeClass::improved;
        } else if (change.change > stable_band) {
            change.classification = ChangeClass::worsened;
        } else {
            change.classification = ChangeClass::stable;
        }
        out.per_entity.push_back(change);
    }

    auto ranked = [](std::vector<std::pair<double, std::string>>& values) {
        std::stable_sort(values.begin(), values.end(),
                         [](const auto& x, const auto& y) { return x.first > y.first; });
        std::vector<std::string> names;
        names.reserve(values.size());
        for (const auto& [v, name] : values) names.push_back(name);
        return names;
    };
    out.ranking_a = ranked(in_a);
    out.ranking_b = ranked(in_b);
    return out;
}

}  // namespace panelkit

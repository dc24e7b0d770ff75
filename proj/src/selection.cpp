#include "panelkit/selection.hpp"

#include "panelkit/inference.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace panelkit {

namespace {

FitResult fit_with(const PanelDataset& data, const ModelSpec& base,
                   std::vector<std::string> regressors) {
    ModelSpec spec = base;
    spec.regressors = std::move(regressors);
    if (spec.effects == Effects::none) {
        return fit_pooled(data, spec);
    }
    return fit_fixed_effects(data, spec, FeMethod::within);
}

int p_value_dof(const FitResult& fit) {
    if (fit.spec.covariance == CovarianceType::cluster_entity) {
        return static_cast<int>(fit.design.entities.size()) - 1;
    }
    return fit.dof_residual;
}

double coefficient_p(const FitResult& fit, const std::string& name) {
    return t_test(fit, name, fit.covariance, p_value_dof(fit)).p_value;
}

}  // namespace

StepwiseTrace stepwise_select(const PanelDataset& data, const ModelSpec& base_spec,
                              const std::vector<std::string>& candidates, double p_enter,
                              double p_remove, int max_steps) {
    validate_spec(base_spec, /*allow_empty_regressors=*/true);
    if (!(p_enter > 0.0) || !(p_enter < 1.0) || !(p_remove > 0.0) || !(p_remove < 1.0)) {
        throw std::invalid_argument("entry and removal thresholds must lie inside (0, 1)");
    }
    if (!(p_enter < p_remove)) {
        throw std::invalid_argument("p_enter must be below p_remove, or steps can cycle");
    }
    if (max_steps < 1) {
        throw std::invalid_argument("max_steps must be positive");
    }
    std::unordered_set<std::string> seen(base_spec.regressors.begin(),
                                         base_spec.regressors.end());
    for (const auto& c : candidates) {
        if (c.empty()) throw std::invalid_argument("candidate pool contains an empty name");
        if (c == base_spec.dependent) {
            throw std::invalid_argument("candidate '" + c + "' is the dependent variable");
        }
        if (data.variable_index(c) < 0) {
            throw std::invalid_argument("candidate '" + c + "' not in dataset");
        }
        if (!seen.insert(c).second) {
            throw std::invalid_argument("candidate '" + c +
                                        "' duplicates the pool or the base regressors");
        }
    }

    StepwiseTrace trace;
    trace.candidate_pool = candidates;
    trace.p_enter = p_enter;
    trace.p_remove = p_remove;
    if (base_spec.covariance == CovarianceType::cluster_entity) {
        trace.notes.push_back("p-values: cluster-robust t tests, dof = clusters - 1");
    } else {
        trace.notes.push_back("p-values: classical t tests, dof = residual");
    }
    trace.notes.push_back("base regressors are never removed");

    std::vector<std::string> included;
    auto model_regressors = [&](const std::string* extra) {
        std::vector<std::string> regs = base_spec.regressors;
        regs.insert(regs.end(), included.begin(), included.end());
        if (extra) regs.push_back(*extra);
        return regs;
    };
    auto is_included = [&](const std::string& name) {
        return std::find(included.begin(), included.end(), name) != included.end();
    };

    int actions = 0;
    for (int sweep = 1; actions < max_steps; ++sweep) {
        bool changed = false;

        // Forward: candidates scan in pool order, so ties keep the earliest.
        double best_p = std::numeric_limits<double>::infinity();
        const std::string* best = nullptr;
        for (const auto& candidate : candidates) {
            if (is_included(candidate)) continue;
            try {
                const FitResult trial = fit_with(data, base_spec, model_regressors(&candidate));
                const double p = coefficient_p(trial, candidate);
                if (p < best_p) {
                    best_p = p;
                    best = &candidate;
                }
            } catch (const std::exception& e) {
                trace.skips.push_back({sweep, candidate, e.what()});
            }
        }
        if (best && best_p < p_enter) {
            included.push_back(*best);
            trace.steps.push_back({StepwiseStep::Action::add, *best, best_p,
                                   static_cast<int>(base_spec.regressors.size() + included.size())});
            ++actions;
            changed = true;
        }

        // Backward: only variables the forward pass brought in can leave.
        if (!included.empty() && actions < max_steps) {
            const FitResult current = fit_with(data, base_spec, model_regressors(nullptr));
            double worst_p = -std::numeric_limits<double>::infinity();
            const std::string* worst = nullptr;
            for (const auto& candidate : candidates) {
                if (!is_included(candidate)) continue;
                const double p = coefficient_p(current, candidate);
                if (p > worst_p) {
                    worst_p = p;
                    worst = &candidate;
                }
            }
            if (worst && worst_p > p_remove) {
                included.erase(std::find(included.begin(), included.end(), *worst));
                trace.steps.push_back({StepwiseStep::Action::remove, *worst, worst_p,
                                       static_cast<int>(base_spec.regressors.size() + included.size())});
                ++actions;
                changed = true;
            }
        }

        if (!changed) break;
    }

    trace.final_spec = base_spec;
    trace.final_spec.regressors.insert(trace.final_spec.regressors.end(), included.begin(),
                                       included.end());
    return trace;
}

}  // namespace panelkit

#pragma once

#include "panelkit/estimators.hpp"

#include <string>
#include <vector>

namespace panelkit {

struct StepwiseStep {
    enum class Action { add, remove };
    Action action = Action::add;
    std::string variable;
    double p_value = 1.0;
    int model_size = 0;  // regressors in the model after this action
};

struct StepwiseSkip {
    int sweep = 0;
    std::string variable;
    std::string reason;
};

struct StepwiseTrace {
    std::vector<StepwiseStep> steps;
    std::vector<StepwiseSkip> skips;  // candidates whose trial fit failed
    ModelSpec final_spec;
    std::vector<std::string> candidate_pool;
    double p_enter = 0.10;
    double p_remove = 0.15;
    std::vector<std::string> notes;  // conventions in force (covariance, dof)
};

// Forward step: fit base + included + one candidate at a time and add the
// candidate with the smallest p-value when it is below p_enter. Backward
// step: refit the current model and remove the included candidate with the
// largest p-value when it is above p_remove (base regressors are never
// removed). Ties break by candidate-pool order; candidates whose trial fit
// throws (collinearity) are skipped and logged. p-values follow
// base_spec.covariance: cluster-robust uses dof = clusters - 1, classical
// uses the residual dof. Stops when a full sweep changes nothing or after
// max_steps recorded actions.
StepwiseTrace stepwise_select(const PanelDataset& data, const ModelSpec& base_spec,
                              const std::vector<std::string>& candidates,
                              double p_enter = 0.10, double p_remove = 0.15,
                              int max_steps = 100);

}  // namespace panelkit

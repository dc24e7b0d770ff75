#pragma once

#include "panelkit/model_spec.hpp"
#include "panelkit/panel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace panelkit {

enum class EstimatorKind { pooled, fe_lsdv, fe_within, re };
enum class FeMethod { lsdv, within };

std::string to_string(EstimatorKind k);

struct FitResult {
    ModelSpec spec;
    EstimatorKind estimator_kind = EstimatorKind::pooled;
    std::vector<std::string> coefficient_names;
    Vector coefficients;
    // Reporting covariance, per spec.covariance.
    Matrix covariance;
    // Residuals of the rows that entered estimation, on the original scale
    // of the dependent variable.
    Vector residuals;
    double r_squared_overall = 0.0;
    std::optional<double> r_squared_within;
    int n_obs = 0;
    int n_params = 0;  // estimated parameters, absorbed effects included
    int dof_residual = 0;
    double rss = 0.0;
    // Aligned to coefficient_names; for the within method this is the inverse
    // of the demeaned cross-product, which equals the matching block of the
    // LSDV inverse.
    Matrix xtx_inverse;
    DesignBundle design;  // design actually solved (demeaned for `within`)
    std::vector<std::string> warnings;

    // Random-effects extras (Swamy-Arora).
    std::optional<double> re_theta;
    std::optional<double> re_sigma2_epsilon;
    std::optional<double> re_sigma2_entity;

    int coefficient_index(const std::string& name) const;  // -1 when absent
    double coefficient(const std::string& name) const;     // throws when absent
};

// OLS on [intercept | regressors]; requires effects = none.
FitResult fit_pooled(const PanelDataset& data, const ModelSpec& spec);

// Two-way (or one-way) fixed effects. `lsdv` estimates every dummy
// explicitly; `within` demeans and reports slopes only, with the residual
// dof corrected for the absorbed effects so both methods give identical
// standard errors.
FitResult fit_fixed_effects(const PanelDataset& data, const ModelSpec& spec, FeMethod method);

// Swamy-Arora random effects over entity intercepts; balanced panels only.
// sigma2_epsilon comes from the within regression, sigma2_entity from the
// between regression (truncated at zero with a warning when negative), and
// the GLS step runs OLS on quasi-demeaned data.
FitResult fit_random_effects(const PanelDataset& data, const ModelSpec& spec);

}  // namespace panelkit

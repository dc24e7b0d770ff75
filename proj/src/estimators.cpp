#include "panelkit/estimators.hpp"

#include "panelkit/inference.hpp"
#include "panelkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace panelkit {

namespace {

std::vector<int> dense_ids(const std::vector<int>& sparse, int& count) {
    std::set<int> seen(sparse.begin(), sparse.end());
    std::unordered_map<int, int> rank;
    int next = 0;
    for (int v : seen) rank[v] = next++;
    std::vector<int> out(sparse.size());
    for (size_t i = 0; i < sparse.size(); ++i) out[i] = rank[sparse[i]];
    count = next;
    return out;
}

std::string join_columns(const std::vector<std::string>& names,
                         const std::vector<Eigen::Index>& idx) {
    std::string out;
    for (size_t i = 0; i < idx.size(); ++i) {
        if (i) out += ", ";
        out += names[static_cast<size_t>(idx[i])];
    }
    return out;
}

double centered_tss(const Vector& y) {
    const double mean = y.mean();
    return (y.array() - mean).matrix().squaredNorm();
}

double bounded_r_squared(double rss, double tss, std::vector<std::string>* warnings) {
    if (!(tss > 0.0)) return 0.0;
    const double r2 = 1.0 - rss / tss;
    if (r2 < 0.0) {
        if (warnings && r2 < -1e-8) {
            warnings->push_back("R-squared fell below zero and was clamped");
        }
        return 0.0;
    }
    return std::min(r2, 1.0);
}

void require_full_rank(const LeastSquaresSolution& solution, const Matrix& X,
                       const std::vector<std::string>& column_names) {
    if (solution.rank == X.cols()) return;
    const std::vector<Eigen::Index> dependent = dependent_columns(X);
    throw std::invalid_argument("collinear design columns: " +
                                join_columns(column_names, dependent) +
                                " (each linearly dependent on the columns before it)");
}

// Demeans a copy of each regressor column under the effect structure and
// rejects regressors the effects absorb completely.
void require_within_variation(const Matrix& X, int first_regressor, int n_regressors,
                              const std::vector<std::string>& regressors,
                              const std::vector<int>& entity, const std::vector<int>& period,
                              int n_entities, int n_periods, Effects effects) {
    for (int j = 0; j < n_regressors; ++j) {
        Matrix column = X.middleCols(first_regressor + j, 1);
        const double original = column.norm();
        demean_columns(column, entity, period, n_entities, n_periods, effects);
        if (column.norm() <= 1e-8 * std::max(1.0, original)) {
            throw std::invalid_argument("regressor '" + regressors[j] +
                                        "' has no variation left after removing " +
                                        to_string(effects) + " effects");
        }
    }
}

void attach_covariance(FitResult& fit) {
    if (fit.spec.covariance == CovarianceType::cluster_entity) {
        fit.covariance = cluster_robust_covariance(fit, fit.design.entity_index);
        return;
    }
    if (fit.dof_residual <= 0) {
        fit.covariance = Matrix::Zero(fit.xtx_inverse.rows(), fit.xtx_inverse.cols());
        fit.warnings.push_back("no residual degrees of freedom; classical covariance is zero");
        return;
    }
    fit.covariance = (fit.rss / fit.dof_residual) * fit.xtx_inverse;
}

}  // namespace

std::string to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::pooled: return "pooled";
        case EstimatorKind::fe_lsdv: return "fe_lsdv";
        case EstimatorKind::fe_within: return "fe_within";
        case EstimatorKind::re: return "re";
    }
    return "pooled";
}

int FitResult::coefficient_index(const std::string& name) const {
    for (size_t i = 0; i < coefficient_names.size(); ++i) {
        if (coefficient_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

double FitResult::coefficient(const std::string& name) const {
    const int idx = coefficient_index(name);
    if (idx < 0) {
        throw std::invalid_argument("unknown coefficient '" + name + "'");
    }
    return coefficients[idx];
}

// ---------------------------------------------------------------------------
// Pooled OLS

FitResult fit_pooled(const PanelDataset& data, const ModelSpec& spec) {
    if (spec.effects != Effects::none) {
        throw std::invalid_argument("fit_pooled requires effects = none");
    }
    DesignBundle design = build_lsdv_design(data, spec);

    const LeastSquaresSolution solution = solve_least_squares(design.X, design.y);
    require_full_rank(solution, design.X, design.column_names);

    FitResult fit;
    fit.spec = spec;
    fit.estimator_kind = EstimatorKind::pooled;
    fit.coefficient_names = design.column_names;
    fit.coefficients = solution.coefficients;
    fit.residuals = solution.residuals;
    fit.rss = solution.rss;
    fit.xtx_inverse = solution.xtx_inverse;
    fit.n_obs = static_cast<int>(design.X.rows());
    fit.n_params = static_cast<int>(design.X.cols());
    fit.dof_residual = fit.n_obs - fit.n_params;
    const double tss = spec.intercept ? centered_tss(design.y) : design.y.squaredNorm();
    fit.r_squared_overall = bounded_r_squared(fit.rss, tss, &fit.warnings);
    fit.design = std::move(design);
    attach_covariance(fit);
    return fit;
}

// ---------------------------------------------------------------------------
// Fixed effects

FitResult fit_fixed_effects(const PanelDataset& data, const ModelSpec& spec, FeMethod method) {
    if (spec.effects == Effects::none) {
        throw std::invalid_argument("fit_fixed_effects requires entity, time, or twoway effects");
    }
    if (!spec.intercept) {
        throw std::invalid_argument("fixed effects models include an intercept");
    }
    DesignBundle design = build_lsdv_design(data, spec);

    const int n = static_cast<int>(design.X.rows());
    const int k = static_cast<int>(spec.regressors.size());
    const int first_regressor = 1;  // intercept occupies column 0
    int n_entities = 0, n_periods = 0;
    const std::vector<int> entity = dense_ids(design.entity_index, n_entities);
    const std::vector<int> period = dense_ids(design.period_index, n_periods);

    require_within_variation(design.X, first_regressor, k, spec.regressors, entity, period,
                             n_entities, n_periods, spec.effects);

    const double tss_overall = centered_tss(design.y);

    FitResult fit;
    fit.spec = spec;
    fit.n_obs = n;
    fit.n_params = static_cast<int>(design.X.cols());
    fit.dof_residual = fit.n_obs - fit.n_params;

    if (method == FeMethod::lsdv) {
        const LeastSquaresSolution solution = solve_least_squares(design.X, design.y);
        require_full_rank(solution, design.X, design.column_names);

        fit.estimator_kind = EstimatorKind::fe_lsdv;
        fit.coefficient_names = design.column_names;
        fit.coefficients = solution.coefficients;
        fit.residuals = solution.residuals;
        fit.rss = solution.rss;
        fit.xtx_inverse = solution.xtx_inverse;

        Matrix y_within = design.y;
        demean_columns(y_within, entity, period, n_entities, n_periods, spec.effects);
        fit.r_squared_within =
            bounded_r_squared(fit.rss, y_within.squaredNorm(), &fit.warnings);
        fit.r_squared_overall = bounded_r_squared(fit.rss, tss_overall, &fit.warnings);
        fit.design = std::move(design);
        attach_covariance(fit);
        return fit;
    }

    // Within method: demean slopes and response, then solve the slope-only
    // system. Residuals equal the LSDV residuals, so dof and covariances set
    // off the full parameter count match the dummy-variable route.
    Matrix Xw = design.X.middleCols(first_regressor, k);
    Matrix yw = design.y;
    demean_columns(Xw, entity, period, n_entities, n_periods, spec.effects);
    demean_columns(yw, entity, period, n_entities, n_periods, spec.effects);
    const Vector y_within = yw.col(0);

    const LeastSquaresSolution solution = solve_least_squares(Xw, y_within);
    require_full_rank(solution, Xw, spec.regressors);

    fit.estimator_kind = EstimatorKind::fe_within;
    fit.coefficient_names = spec.regressors;
    fit.coefficients = solution.coefficients;
    fit.residuals = solution.residuals;
    fit.rss = solution.rss;
    fit.xtx_inverse = solution.xtx_inverse;
    fit.r_squared_within =
        bounded_r_squared(fit.rss, y_within.squaredNorm(), &fit.warnings);
    fit.r_squared_overall = bounded_r_squared(fit.rss, tss_overall, &fit.warnings);

    DesignBundle within_design;
    within_design.y = y_within;
    within_design.X = std::move(Xw);
    within_design.column_names = spec.regressors;
    within_design.entity_index = design.entity_index;
    within_design.period_index = design.period_index;
    within_design.entities = design.entities;
    within_design.periods = design.periods;
    within_design.n_dropped = design.n_dropped;
    within_design.balanced = design.balanced;
    fit.design = std::move(within_design);
    attach_covariance(fit);
    return fit;
}

// ---------------------------------------------------------------------------
// Random effects (Swamy-Arora)

FitResult fit_random_effects(const PanelDataset& data, const ModelSpec& spec) {
    if (spec.effects != Effects::entity) {
        throw std::invalid_argument(
            "fit_random_effects requires effects = entity; model time effects as regressors");
    }
    if (!spec.intercept) {
        throw std::invalid_argument("random effects models include an intercept");
    }

    ModelSpec flat = spec;
    flat.effects = Effects::none;
    DesignBundle design = build_lsdv_design(data, flat);
    if (!design.balanced) {
        throw std::invalid_argument("random effects requires a balanced panel");
    }

    const int n = static_cast<int>(design.X.rows());
    const int k = static_cast<int>(spec.regressors.size());
    int n_entities = 0, n_periods = 0;
    const std::vector<int> entity = dense_ids(design.entity_index, n_entities);
    const std::vector<int> period = dense_ids(design.period_index, n_periods);
    const int E = n_entities;
    const int T = n_periods;
    if (E < 2) {
        throw std::invalid_argument("random effects needs at least two entities");
    }

    require_within_variation(design.X, 1, k, spec.regressors, entity, period, E, T,
                             Effects::entity);

    // Within step: sigma2_epsilon from the entity-demeaned regression with
    // dof n - E - k.
    Matrix Xw = design.X.middleCols(1, k);
    Matrix yw = design.y;
    demean_columns(Xw, entity, period, E, T, Effects::entity);
    demean_columns(yw, entity, period, E, T, Effects::entity);
    const LeastSquaresSolution within = solve_least_squares(Xw, yw.col(0));
    require_full_rank(within, Xw, spec.regressors);
    const int dof_within = n - E - k;
    if (dof_within <= 0) {
        throw std::invalid_argument("too few observations for the within step");
    }
    const double sigma2_epsilon = within.rss / dof_within;

    // Between step: entity means, dof E - rank.
    if (E < k + 1) {
        throw std::invalid_argument("too few entities for the between regression");
    }
    Matrix Xb = Matrix::Zero(E, k + 1);
    Vector yb = Vector::Zero(E);
    Xb.col(0).setOnes();
    Vector counts = Vector::Zero(E);
    for (int r = 0; r < n; ++r) {
        Xb.row(entity[r]).tail(k) += design.X.row(r).segment(1, k);
        yb[entity[r]] += design.y[r];
        counts[entity[r]] += 1.0;
    }
    for (int e = 0; e < E; ++e) {
        Xb.row(e).tail(k) /= counts[e];
        yb[e] /= counts[e];
    }
    const LeastSquaresSolution between = solve_least_squares(Xb, yb);
    const int dof_between = E - static_cast<int>(between.rank);
    if (dof_between <= 0) {
        throw std::invalid_argument("between regression has no residual degrees of freedom");
    }
    const double sigma2_between = between.rss / dof_between;

    FitResult fit;
    double sigma2_entity = sigma2_between - sigma2_epsilon / T;
    if (sigma2_entity < 0.0) {
        sigma2_entity = 0.0;
        fit.warnings.push_back("entity variance component was negative and is truncated to zero");
    }
    const double theta =
        1.0 - std::sqrt(sigma2_epsilon / (sigma2_epsilon + T * sigma2_entity));

    // GLS step: OLS on quasi-demeaned data.
    Matrix Xs = Matrix::Zero(n, k + 1);
    Vector ys = Vector::Zero(n);
    Xs.col(0).setConstant(1.0 - theta);
    for (int r = 0; r < n; ++r) {
        const int e = entity[r];
        for (int j = 0; j < k; ++j) {
            Xs(r, j + 1) = design.X(r, j + 1) - theta * Xb(e, j + 1);
        }
        ys[r] = design.y[r] - theta * yb[e];
    }
    const LeastSquaresSolution gls = solve_least_squares(Xs, ys);
    require_full_rank(gls, Xs, design.column_names);

    fit.spec = spec;
    fit.estimator_kind = EstimatorKind::re;
    fit.coefficient_names = design.column_names;
    fit.coefficients = gls.coefficients;
    fit.xtx_inverse = gls.xtx_inverse;
    fit.n_obs = n;
    fit.n_params = k + 1;
    fit.dof_residual = n - (k + 1);
    fit.re_theta = theta;
    fit.re_sigma2_epsilon = sigma2_epsilon;
    fit.re_sigma2_entity = sigma2_entity;

    // Residuals and fit statistics on the original scale.
    fit.residuals = design.y - design.X * gls.coefficients;
    fit.rss = fit.residuals.squaredNorm();
    fit.r_squared_overall = bounded_r_squared(fit.rss, centered_tss(design.y), &fit.warnings);

    DesignBundle gls_design;
    gls_design.y = std::move(ys);
    gls_design.X = std::move(Xs);
    gls_design.column_names = design.column_names;
    gls_design.entity_index = design.entity_index;
    gls_design.period_index = design.period_index;
    gls_design.entities = design.entities;
    gls_design.periods = design.periods;
    gls_design.n_dropped = design.n_dropped;
    gls_design.balanced = design.balanced;
    fit.design = std::move(gls_design);

    if (spec.covariance == CovarianceType::cluster_entity) {
        fit.covariance = cluster_robust_covariance(fit, fit.design.entity_index);
    } else {
        // GLS covariance: the idiosyncratic variance from the within step
        // scales the quasi-demeaned cross-product inverse.
        fit.covariance = sigma2_epsilon * fit.xtx_inverse;
    }
    return fit;
}

}  // namespace panelkit

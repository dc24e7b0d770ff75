#pragma once

#include "panelkit/estimators.hpp"
#include "panelkit/synthetic.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace panelkit {

struct ReplicationRecord {
    bool ok = false;
    std::string failure;
    std::vector<double> estimates;      // aligned to the fitted spec's regressor order
    std::vector<double> classical_se;
    std::vector<double> robust_se;
    std::vector<bool> classical_covers;
    std::vector<bool> robust_covers;
    std::optional<double> hausman_p;
    bool hausman_warned = false;        // non-positive-definite difference
    std::optional<double> re_sigma2_entity;
    std::optional<double> re_sigma2_epsilon;
};

struct CoefficientSummary {
    std::string name;
    double true_value = 0.0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    double classical_coverage = 0.0;  // 95% CI, residual dof
    double robust_coverage = 0.0;     // 95% CI, dof = clusters - 1
    double mean_classical_se = 0.0;
    double mean_robust_se = 0.0;
};

struct MonteCarloSummary {
    int replications = 0;
    int failures = 0;
    std::uint64_t master_seed = 0;
    std::vector<CoefficientSummary> coefficients;  // fitted spec's regressor order
    // Hausman test at the 5% level, run when effects = entity on balanced
    // draws; FE and RE sides both use classical covariances.
    std::optional<double> hausman_rejection_rate;
    int hausman_warnings = 0;
    std::optional<double> mean_re_sigma2_entity;
    std::optional<double> mean_re_sigma2_epsilon;
    std::vector<ReplicationRecord> replication_detail;  // index = replication
};

// Replication r regenerates the panel with seed derive_seed(seed, r) and
// fits `spec` (within method for fixed effects). Failures are counted and
// excluded from the averages. Aggregation always runs in replication order
// over the stored records, so summaries are bit-identical for any worker
// count.
MonteCarloSummary run_monte_carlo(const SyntheticPanelConfig& config, const ModelSpec& spec,
                                  int replications, std::uint64_t seed, int n_workers = 1);

}  // namespace panelkit

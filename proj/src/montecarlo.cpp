#include "panelkit/montecarlo.hpp"

#include "panelkit/inference.hpp"
#include "panelkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace panelkit {

namespace {

double critical_t(int dof) {
    thread_local std::map<int, double> cache;
    auto [it, inserted] = cache.try_emplace(dof, 0.0);
    if (inserted) it->second = t_quantile(0.975, dof);
    return it->second;
}

bool interval_covers(double estimate, double truth, double se, double critical) {
    // The tiny slack keeps zero-noise configurations, where the interval
    // degenerates to a point, from failing on rounding alone.
    return std::fabs(estimate - truth) <= critical * se + 1e-9 * std::max(1.0, std::fabs(truth));
}

}  // namespace

MonteCarloSummary run_monte_carlo(const SyntheticPanelConfig& config, const ModelSpec& spec,
                                  int replications, std::uint64_t seed, int n_workers) {
    validate_config(config);
    validate_spec(spec);
    if (replications < 1) {
        throw std::invalid_argument("replication count must be positive");
    }
    if (n_workers < 1) {
        throw std::invalid_argument("worker count must be positive");
    }
    if (spec.dependent != config.dependent) {
        throw std::invalid_argument("spec models '" + spec.dependent +
                                    "' but the generator produces '" + config.dependent + "'");
    }
    std::vector<double> truths;
    for (const auto& name : spec.regressors) {
        const auto it =
            std::find_if(config.slopes.begin(), config.slopes.end(),
                         [&](const auto& s) { return s.first == name; });
        if (it == config.slopes.end()) {
            throw std::invalid_argument("regressor '" + name + "' is not a generated variable");
        }
        truths.push_back(it->second);
    }
    const size_t k = spec.regressors.size();

    std::vector<ReplicationRecord> records(replications);

    auto run_one = [&](int r) {
        ReplicationRecord rec;
        try {
            SyntheticPanelConfig draw = config;
            draw.seed = derive_seed(seed, static_cast<std::uint64_t>(r));
            const PanelDataset panel = generate_panel(draw);
            const FitResult fit = spec.effects == Effects::none
                                      ? fit_pooled(panel, spec)
                                      : fit_fixed_effects(panel, spec, FeMethod::within);

            const Matrix classical = classical_covariance(fit);
            const Matrix robust = cluster_robust_covariance(fit, fit.design.entity_index);
            const int clusters = static_cast<int>(fit.design.entities.size());
            const double crit_classical = critical_t(fit.dof_residual);
            const double crit_robust = critical_t(clusters - 1);

            rec.estimates.resize(k);
            rec.classical_se.resize(k);
            rec.robust_se.resize(k);
            rec.classical_covers.resize(k);
            rec.robust_covers.resize(k);
            for (size_t j = 0; j < k; ++j) {
                const int idx = fit.coefficient_index(spec.regressors[j]);
                rec.estimates[j] = fit.coefficients[idx];
                rec.classical_se[j] = std::sqrt(std::max(0.0, classical(idx, idx)));
                rec.robust_se[j] = std::sqrt(std::max(0.0, robust(idx, idx)));
                rec.classical_covers[j] =
                    interval_covers(rec.estimates[j], truths[j], rec.classical_se[j], crit_classical);
                rec.robust_covers[j] =
                    interval_covers(rec.estimates[j], truths[j], rec.robust_se[j], crit_robust);
            }

            if (spec.effects == Effects::entity && fit.design.balanced) {
                ModelSpec classical_spec = spec;
                classical_spec.covariance = CovarianceType::classical;
                const FitResult fe =
                    spec.covariance == CovarianceType::classical
                        ? fit
                        : fit_fixed_effects(panel, classical_spec, FeMethod::within);
                const FitResult re = fit_random_effects(panel, classical_spec);
                const TestResult hausman = hausman_test(fe, re);
                rec.hausman_p = hausman.p_value;
                rec.hausman_warned =
                    hausman.detail.find("not positive definite") != std::string::npos;
                rec.re_sigma2_entity = re.re_sigma2_entity;
                rec.re_sigma2_epsilon = re.re_sigma2_epsilon;
            }
            rec.ok = true;
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.failure = e.what();
        }
        records[r] = std::move(rec);
    };

    const int workers = std::min(n_workers, replications);
    if (workers <= 1) {
        for (int r = 0; r < replications; ++r) run_one(r);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            const int lo = static_cast<int>(static_cast<long long>(replications) * w / workers);
            const int hi =
                static_cast<int>(static_cast<long long>(replications) * (w + 1) / workers);
            pool.emplace_back([&, lo, hi]() {
                for (int r = lo; r < hi; ++r) run_one(r);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Aggregation walks the records in replication order regardless of the
    // worker layout, so summaries do not depend on n_workers.
    MonteCarloSummary summary;
    summary.replications = replications;
    summary.master_seed = seed;
    summary.coefficients.resize(k);
    for (size_t j = 0; j < k; ++j) {
        summary.coefficients[j].name = spec.regressors[j];
        summary.coefficients[j].true_value = truths[j];
    }

    std::vector<double> sum_est(k, 0.0), sum_sq_err(k, 0.0), sum_se_c(k, 0.0), sum_se_r(k, 0.0);
    std::vector<int> cover_c(k, 0), cover_r(k, 0);
    int ok_count = 0;
    int hausman_count = 0, hausman_rejections = 0;
    double sum_sigma2_entity = 0.0, sum_sigma2_epsilon = 0.0;
    int sigma_count = 0;
    for (const auto& rec : records) {
        if (!rec.ok) continue;
        ++ok_count;
        for (size_t j = 0; j < k; ++j) {
            sum_est[j] += rec.estimates[j];
            const double err = rec.estimates[j] - truths[j];
            sum_sq_err[j] += err * err;
            sum_se_c[j] += rec.classical_se[j];
            sum_se_r[j] += rec.robust_se[j];
            cover_c[j] += rec.classical_covers[j] ? 1 : 0;
            cover_r[j] += rec.robust_covers[j] ? 1 : 0;
        }
        if (rec.hausman_p) {
            ++hausman_count;
            if (*rec.hausman_p < 0.05) ++hausman_rejections;
            if (rec.hausman_warned) ++summary.hausman_warnings;
        }
        if (rec.re_sigma2_entity && rec.re_sigma2_epsilon) {
            ++sigma_count;
            sum_sigma2_entity += *rec.re_sigma2_entity;
            sum_sigma2_epsilon += *rec.re_sigma2_epsilon;
        }
    }
    summary.failures = replications - ok_count;
    if (ok_count > 0) {
        for (size_t j = 0; j < k; ++j) {
            auto& c = summary.coefficients[j];
            c.mean_estimate = sum_est[j] / ok_count;
            c.bias = c.mean_estimate - truths[j];
            c.rmse = std::sqrt(sum_sq_err[j] / ok_count);
            c.classical_coverage = static_cast<double>(cover_c[j]) / ok_count;
            c.robust_coverage = static_cast<double>(cover_r[j]) / ok_count;
            c.mean_classical_se = sum_se_c[j] / ok_count;
            c.mean_robust_se = sum_se_r[j] / ok_count;
        }
    }
    if (hausman_count > 0) {
        summary.hausman_rejection_rate =
            static_cast<double>(hausman_rejections) / hausman_count;
    }
    if (sigma_count > 0) {
        summary.mean_re_sigma2_entity = sum_sigma2_entity / sigma_count;
        summary.mean_re_sigma2_epsilon = sum_sigma2_epsilon / sigma_count;
    }
    summary.replication_detail = std::move(records);
    return summary;
}

}  // namespace panelkit

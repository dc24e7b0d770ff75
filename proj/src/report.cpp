#include "panelkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace panelkit {

namespace {

std::string strip_negative_zero(std::string s) {
    if (!s.empty() && s[0] == '-' &&
        s.find_first_not_of("0.", 1) == std::string::npos) {
        s.erase(s.begin());
    }
    return s;
}

std::string fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", places, v);
    return strip_negative_zero(buf);
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return strip_negative_zero(buf);
}

// Estimates and standard errors keep three significant-looking places across
// magnitudes: tiny values get extra decimals instead of collapsing to 0.000.
std::string format_estimate(double v) {
    const double a = std::fabs(v);
    if (a < 0.0005) return fixed(v, 6);
    if (a < 0.005) return fixed(v, 5);
    return fixed(v, 3);
}

std::string format_row_p(double p) {
    if (p < 0.0005) return "<0.000";
    return fixed(p, 3);
}

const TestResult& find_coefficient_test(const ReportTests& tests, const std::string& name) {
    for (const auto& t : tests.coefficient_tests) {
        if (t.name == name) return t;
    }
    throw std::invalid_argument("missing t-test for coefficient '" + name + "'");
}

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out << "  ";
            if (c == 0) {
                out << row[c];
                if (c + 1 < row.size()) {
                    out << std::string(widths[c] - row[c].size(), ' ');
                }
            } else {
                out << std::string(widths[c] - row[c].size(), ' ') << row[c];
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string render_fit_table(const FitResult& fit, const ReportTests& tests) {
    std::vector<std::pair<std::string, std::string>> rows;  // label, coefficient
    if (fit.spec.intercept && fit.coefficient_index("const") >= 0) {
        rows.push_back({"Constant", "const"});
    }
    for (const auto& name : fit.spec.regressors) {
        rows.push_back({name + "[i,t]", name});
    }
    if (rows.empty()) {
        throw std::invalid_argument("fit has no reportable coefficients");
    }

    const bool robust = fit.spec.covariance == CovarianceType::cluster_entity;
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"Variables", "B", robust ? "SE(B) robust" : "SE(B)", "Student's test",
                    "P-value"});
    for (const auto& [label, name] : rows) {
        const int idx = fit.coefficient_index(name);
        if (idx < 0) {
            throw std::invalid_argument("coefficient '" + name + "' missing from the fit");
        }
        const double variance = std::max(0.0, fit.covariance(idx, idx));
        const TestResult& test = find_coefficient_test(tests, name);
        grid.push_back({label, format_estimate(fit.coefficients[idx]),
                        format_estimate(std::sqrt(variance)), fixed(test.statistic, 3),
                        format_row_p(test.p_value)});
    }

    std::ostringstream out;
    out << render_grid(grid);
    out << '\n';
    out << "Dependent variable: " << fit.spec.dependent << "[i,t]  N.T=" << fit.n_obs
        << "  R-squared=" << fixed(fit.r_squared_overall, 2);
    if (fit.r_squared_within) {
        out << "  R-squared(within)=" << fixed(*fit.r_squared_within, 2);
    }
    out << '\n';

    bool has_entity_block = false, has_time_block = false;
    for (const auto& block : fit.design.dummy_blocks) {
        if (block.name == "DR") has_entity_block = true;
        if (block.name == "DT") has_time_block = true;
    }
    if (has_entity_block && !tests.regional_joint) {
        throw std::invalid_argument("fit has entity dummies but no joint test for them");
    }
    if (has_time_block && !tests.time_joint) {
        throw std::invalid_argument("fit has time dummies but no joint test for them");
    }
    if (has_entity_block || has_time_block) {
        out << "Diagnosis of panel components:\n";
        int item = 0;
        if (has_entity_block) {
            const TestResult& t = *tests.regional_joint;
            out << ++item << ") " << (robust ? "Robust F-test" : "F-test")
                << " for joint significance on regional dummies: H0: delta_r = 0  F = "
                << fixed(t.statistic, 1) << "  p-value = " << fixed(t.p_value, 3) << '\n';
        }
        if (has_time_block) {
            const TestResult& t = *tests.time_joint;
            out << ++item << ") Wald joint test on time dummies: H0: gamma_s = 0  Chi-square("
                << t.dof1 << ") = " << fixed(t.statistic, 1)
                << "  p-value = " << fixed(t.p_value, 3) << '\n';
        }
    }
    return out.str();
}

ReportTests build_report_tests(const FitResult& fit, int t_dof) {
    ReportTests out;
    const int clusters = static_cast<int>(fit.design.entities.size());
    const bool robust = fit.spec.covariance == CovarianceType::cluster_entity;
    int dof = t_dof;
    if (dof < 0) {
        dof = robust ? clusters - 1 : fit.dof_residual;
    }

    if (fit.spec.intercept && fit.coefficient_index("const") >= 0) {
        out.coefficient_tests.push_back(t_test(fit, "const", fit.covariance, dof));
    }
    for (const auto& name : fit.spec.regressors) {
        out.coefficient_tests.push_back(t_test(fit, name, fit.covariance, dof));
    }

    for (const auto& block : fit.design.dummy_blocks) {
        std::vector<std::string> names(
            fit.design.column_names.begin() + block.first,
            fit.design.column_names.begin() + block.first + block.count);
        if (block.name == "DR") {
            const int denominator = robust ? clusters - 1 : fit.dof_residual;
            // Entity-clustered scores of the entity dummies vanish identically
            // (within-entity residual sums are zero), so their clustered
            // covariance is structurally singular. The block is tested against
            // the classical covariance; the robust convention survives in the
            // denominator dof.
            const Matrix block_covariance =
                robust ? classical_covariance(fit) : fit.covariance;
            out.regional_joint =
                joint_wald_test(fit, names, block_covariance, WaldForm::f, denominator);
        } else if (block.name == "DT") {
            out.time_joint = joint_wald_test(fit, names, fit.covariance, WaldForm::chi_square);
        }
    }
    return out;
}

std::string render_stepwise_trace(const StepwiseTrace& trace) {
    std::ostringstream out;
    out << "Stepwise selection (enter below " << fixed(trace.p_enter, 3) << ", remove above "
        << fixed(trace.p_remove, 3) << ")\n";
    out << "Candidates:";
    for (const auto& c : trace.candidate_pool) out << ' ' << c;
    out << '\n';
    for (const auto& note : trace.notes) {
        out << "Note: " << note << '\n';
    }
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& step = trace.steps[i];
        char pbuf[32];
        std::snprintf(pbuf, sizeof(pbuf), "%.4g", step.p_value);
        out << "step " << (i + 1) << ": "
            << (step.action == StepwiseStep::Action::add ? "add " : "remove ") << step.variable
            << " (p=" << pbuf << ", model size " << step.model_size << ")\n";
    }
    if (trace.steps.empty()) {
        out << "no variable moved\n";
    }
    for (const auto& skip : trace.skips) {
        out << "skipped in sweep " << skip.sweep << ": " << skip.variable << " (" << skip.reason
            << ")\n";
    }
    out << "Final regressors:";
    if (trace.final_spec.regressors.empty()) {
        out << " (none)";
    } else {
        for (const auto& r : trace.final_spec.regressors) out << ' ' << r;
    }
    out << '\n';
    return out.str();
}

std::string render_comparison(const RegionalComparison& comparison) {
    std::ostringstream out;
    out << comparison.variable << ": " << comparison.period_a << " -> " << comparison.period_b
        << " (stable band " << general(comparison.stable_band) << ")\n";
    for (const auto& e : comparison.per_entity) {
        out << e.entity << ": " << general(e.value_a) << " -> " << general(e.value_b)
            << " (change " << general(e.change) << ", " << to_string(e.classification) << ")\n";
    }
    auto ranking_line = [&](const std::string& period, const std::vector<std::string>& names) {
        out << period << " ranking (high to low):";
        for (size_t i = 0; i < names.size(); ++i) {
            out << (i ? ", " : " ") << names[i];
        }
        out << '\n';
    };
    ranking_line(comparison.period_a, comparison.ranking_a);
    ranking_line(comparison.period_b, comparison.ranking_b);
    if (!comparison.only_in_a.empty()) {
        out << "No " << comparison.period_b << " value:";
        for (size_t i = 0; i < comparison.only_in_a.size(); ++i) {
            out << (i ? ", " : " ") << comparison.only_in_a[i];
        }
        out << '\n';
    }
    if (!comparison.only_in_b.empty()) {
        out << "No " << comparison.period_a << " value:";
        for (size_t i = 0; i < comparison.only_in_b.size(); ++i) {
            out << (i ? ", " : " ") << comparison.only_in_b[i];
        }
        out << '\n';
    }
    return out.str();
}

std::string render_test(const TestResult& test) {
    std::ostringstream out;
    char sbuf[32], pbuf[32];
    std::snprintf(sbuf, sizeof(sbuf), "%.6g", test.statistic);
    std::snprintf(pbuf, sizeof(pbuf), "%.4g", test.p_value);
    out << test.name << ": statistic = " << sbuf << ", " << to_string(test.distribution) << '(';
    out << test.dof1;
    if (test.dof2) out << ", " << *test.dof2;
    out << "), p-value = " << pbuf;
    if (!test.detail.empty()) {
        out << "\n  " << test.detail;
    }
    return out.str();
}

}  // namespace panelkit

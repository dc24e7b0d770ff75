#pragma once

#include "panelkit/compare.hpp"
#include "panelkit/inference.hpp"
#include "panelkit/selection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace panelkit {

struct ReportTests {
    // One per reported coefficient; TestResult.name carries the coefficient
    // name for the lookup.
    std::vector<TestResult> coefficient_tests;
    std::optional<TestResult> regional_joint;  // F on the entity-dummy block
    std::optional<TestResult> time_joint;      // Wald chi-square on the time-dummy block
};

// Fixed-width table: constant row first, slope rows in spec order, dummy
// blocks summarized through their joint tests only. A fit with an
// entity-dummy block requires regional_joint, one with a time-dummy block
// requires time_joint; fits without dummy blocks render no diagnosis footer.
std::string render_fit_table(const FitResult& fit, const ReportTests& tests);

// Assembles the tests render_fit_table needs from a finished fit, using its
// stored covariance. t_dof < 0 picks the default convention: clusters - 1
// for cluster-robust covariance, residual dof for classical. The robust
// F-test on the entity dummies uses denominator dof = clusters - 1; the
// time-dummy test is a Wald chi-square.
ReportTests build_report_tests(const FitResult& fit, int t_dof = -1);

// Human-readable renderings for the CLI.
std::string render_stepwise_trace(const StepwiseTrace& trace);
std::string render_comparison(const RegionalComparison& comparison);
std::string render_test(const TestResult& test);

}  // namespace panelkit

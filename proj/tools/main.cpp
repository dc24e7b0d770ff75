#include "panelkit/json_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace panelkit;

struct DataOptions {
    std::string path;
    std::string entity_column = "district";
    std::string period_column = "year";
};

void add_data_options(CLI::App* cmd, DataOptions& opts) {
    cmd->add_option("--data", opts.path, "panel CSV file")->required();
    cmd->add_option("--entity-col", opts.entity_column, "entity column name");
    cmd->add_option("--period-col", opts.period_column, "period column name");
}

void write_json(const std::string& path, const nlohmann::json& payload) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << payload.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return nlohmann::json::parse(in);
}

int pick_t_dof(const std::string& choice, const FitResult& fit) {
    if (choice == "default") return -1;
    if (choice == "clusters") return static_cast<int>(fit.design.entities.size()) - 1;
    if (choice == "residual") return fit.dof_residual;
    throw CLI::ValidationError("--t-dof", "expected default, clusters, or residual");
}

int run_fit(const DataOptions& data_opts, const ModelSpec& spec, const std::string& method,
            const std::string& t_dof_choice, const std::string& out_path) {
    const PanelDataset data =
        load_csv(data_opts.path, data_opts.entity_column, data_opts.period_column);
    FitResult fit;
    if (spec.effects == Effects::none) {
        fit = fit_pooled(data, spec);
    } else {
        fit = fit_fixed_effects(data, spec,
                                method == "within" ? FeMethod::within : FeMethod::lsdv);
    }
    const ReportTests tests = build_report_tests(fit, pick_t_dof(t_dof_choice, fit));
    std::cout << render_fit_table(fit, tests);
    for (const auto& warning : fit.warnings) {
        std::cerr << "warning: " << warning << '\n';
    }
    if (!out_path.empty()) {
        write_json(out_path, fit_to_json(fit, &tests));
    }
    return 0;
}

int run_stepwise(const DataOptions& data_opts, const ModelSpec& base,
                 const std::vector<std::string>& candidates, double p_enter, double p_remove,
                 int max_steps, const std::string& t_dof_choice, const std::string& out_path) {
    const PanelDataset data =
        load_csv(data_opts.path, data_opts.entity_column, data_opts.period_column);
    const StepwiseTrace trace =
        stepwise_select(data, base, candidates, p_enter, p_remove, max_steps);
    std::cout << render_stepwise_trace(trace);

    nlohmann::json payload = {{"trace", trace_to_json(trace)}};
    if (!trace.final_spec.regressors.empty()) {
        FitResult fit;
        if (trace.final_spec.effects == Effects::none) {
            fit = fit_pooled(data, trace.final_spec);
        } else {
            fit = fit_fixed_effects(data, trace.final_spec, FeMethod::lsdv);
        }
        const ReportTests tests = build_report_tests(fit, pick_t_dof(t_dof_choice, fit));
        std::cout << '\n' << render_fit_table(fit, tests);
        payload["fit"] = fit_to_json(fit, &tests);
    }
    if (!out_path.empty()) {
        write_json(out_path, payload);
    }
    return 0;
}

int run_hausman(const DataOptions& data_opts, const std::string& dependent,
                std::vector<std::string> regressors, const std::string& effects_name,
                const std::string& out_path) {
    const Effects effects = effects_from_string(effects_name);
    if (effects != Effects::entity && effects != Effects::twoway) {
        throw CLI::ValidationError("--effects", "hausman needs entity or twoway effects");
    }
    PanelDataset data =
        load_csv(data_opts.path, data_opts.entity_column, data_opts.period_column);
    // Random effects handles entity intercepts only, so two-way comparisons
    // move the time effects into the regressor list for both sides.
    if (effects == Effects::twoway) {
        data = with_time_dummies(data);
        for (size_t t = 1; t < data.periods.size(); ++t) {
            regressors.push_back("DT_" + data.periods[t]);
        }
    }
    ModelSpec spec;
    spec.dependent = dependent;
    spec.regressors = std::move(regressors);
    spec.effects = Effects::entity;
    spec.covariance = CovarianceType::classical;

    const FitResult fe = fit_fixed_effects(data, spec, FeMethod::within);
    const FitResult re = fit_random_effects(data, spec);
    const TestResult test = hausman_test(fe, re);
    const std::string verdict =
        test.p_value < 0.05
            ? "reject the random-effects orthogonality assumption at the 5% level; "
              "prefer fixed effects"
            : "no evidence against random effects at the 5% level";

    std::cout << render_test(test) << '\n';
    std::cout << "theta = " << *re.re_theta << ", sigma2_entity = " << *re.re_sigma2_entity
              << ", sigma2_epsilon = " << *re.re_sigma2_epsilon << '\n';
    std::cout << verdict << '\n';
    if (!out_path.empty()) {
        write_json(out_path, {{"test", test_to_json(test)},
                              {"verdict", verdict},
                              {"fe", fit_to_json(fe)},
                              {"re", fit_to_json(re)}});
    }
    return 0;
}

int run_compare(const DataOptions& data_opts, const std::string& variable,
                const std::string& from, const std::string& to, double stable_band,
                const std::string& out_path, const std::string& csv_path) {
    const PanelDataset data =
        load_csv(data_opts.path, data_opts.entity_column, data_opts.period_column);
    const RegionalComparison comparison = compare_periods(data, variable, from, to, stable_band);
    std::cout << render_comparison(comparison);
    if (!out_path.empty()) {
        write_json(out_path, comparison_to_json(comparison));
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) {
            throw std::runtime_error("cannot open '" + csv_path + "' for writing");
        }
        out << comparison_to_csv(comparison);
    }
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_path) {
    const SyntheticPanelConfig config = config_from_json(read_json(config_path));
    const PanelDataset panel = generate_panel(config);
    if (out_path.empty()) {
        export_csv(panel, std::cout);
    } else {
        export_csv(panel, out_path);
    }
    return 0;
}

int run_montecarlo(const std::string& config_path, const std::string& spec_path,
                   int replications, std::uint64_t seed, int workers,
                   const std::string& out_path) {
    const SyntheticPanelConfig config = config_from_json(read_json(config_path));
    const ModelSpec spec = spec_from_json(read_json(spec_path));
    const MonteCarloSummary summary =
        run_monte_carlo(config, spec, replications, seed, workers);

    std::cout << "replications: " << summary.replications
              << " (failures: " << summary.failures << ")\n";
    for (const auto& c : summary.coefficients) {
        std::cout << c.name << ": true " << c.true_value << ", mean " << c.mean_estimate
                  << ", bias " << c.bias << ", rmse " << c.rmse << "\n    coverage classical "
                  << c.classical_coverage << ", robust " << c.robust_coverage << '\n';
    }
    if (summary.hausman_rejection_rate) {
        std::cout << "hausman rejection rate at 5%: " << *summary.hausman_rejection_rate
                  << " (" << summary.hausman_warnings << " non-PD warnings)\n";
    }
    if (!out_path.empty()) {
        write_json(out_path, summary_to_json(summary));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"panel regression workbench"};
    app.require_subcommand(1);

    // fit ---------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "estimate a panel model and print its table");
    DataOptions fit_data;
    add_data_options(fit_cmd, fit_data);
    std::string fit_dep;
    std::vector<std::string> fit_regressors;
    std::string fit_effects = "twoway", fit_cov = "cluster", fit_method = "lsdv";
    std::string fit_t_dof = "default", fit_out;
    fit_cmd->add_option("--dep", fit_dep, "dependent variable")->required();
    fit_cmd->add_option("--regressors", fit_regressors, "regressor names")
        ->required()
        ->delimiter(',');
    fit_cmd->add_option("--effects", fit_effects, "none, entity, time, or twoway");
    fit_cmd->add_option("--cov", fit_cov, "classical or cluster");
    fit_cmd->add_option("--method", fit_method, "lsdv or within")
        ->check(CLI::IsMember({"lsdv", "within"}));
    fit_cmd->add_option("--t-dof", fit_t_dof, "t-test dof: default, clusters, or residual");
    fit_cmd->add_option("--out", fit_out, "write the fit as JSON");

    // stepwise ------------------------------------------------------------
    auto* step_cmd = app.add_subcommand("stepwise", "forward/backward variable selection");
    DataOptions step_data;
    add_data_options(step_cmd, step_data);
    std::string step_dep;
    std::vector<std::string> step_base, step_candidates;
    std::string step_effects = "twoway", step_cov = "cluster";
    double p_enter = 0.10, p_remove = 0.15;
    int max_steps = 100;
    std::string step_t_dof = "default", step_out;
    step_cmd->add_option("--dep", step_dep, "dependent variable")->required();
    step_cmd->add_option("--base", step_base, "regressors kept in every model")->delimiter(',');
    step_cmd->add_option("--candidates", step_candidates, "variables eligible to enter")
        ->required()
        ->delimiter(',');
    step_cmd->add_option("--effects", step_effects, "none, entity, time, or twoway");
    step_cmd->add_option("--cov", step_cov, "classical or cluster");
    step_cmd->add_option("--p-enter", p_enter, "entry threshold");
    step_cmd->add_option("--p-remove", p_remove, "removal threshold");
    step_cmd->add_option("--max-steps", max_steps, "cap on recorded actions");
    step_cmd->add_option("--t-dof", step_t_dof, "t-test dof for the final table");
    step_cmd->add_option("--out", step_out, "write trace and final fit as JSON");

    // hausman -------------------------------------------------------------
    auto* hausman_cmd =
        app.add_subcommand("hausman", "fixed- versus random-effects specification test");
    DataOptions hausman_data;
    add_data_options(hausman_cmd, hausman_data);
    std::string hausman_dep, hausman_effects = "twoway", hausman_out;
    std::vector<std::string> hausman_regressors;
    hausman_cmd->add_option("--dep", hausman_dep, "dependent variable")->required();
    hausman_cmd->add_option("--regressors", hausman_regressors, "regressor names")
        ->required()
        ->delimiter(',');
    hausman_cmd->add_option("--effects", hausman_effects, "entity or twoway");
    hausman_cmd->add_option("--out", hausman_out, "write the test as JSON");

    // compare -------------------------------------------------------------
    auto* compare_cmd = app.add_subcommand("compare", "rank entities across two periods");
    DataOptions compare_data;
    add_data_options(compare_cmd, compare_data);
    std::string compare_variable, compare_from, compare_to, compare_out, compare_csv;
    double stable_band = 2.0;
    compare_cmd->add_option("--variable", compare_variable, "variable to compare")->required();
    compare_cmd->add_option("--from", compare_from, "first period")->required();
    compare_cmd->add_option("--to", compare_to, "second period")->required();
    compare_cmd->add_option("--stable-band", stable_band,
                            "absolute change treated as stable");
    compare_cmd->add_option("--out", compare_out, "write the comparison as JSON");
    compare_cmd->add_option("--csv", compare_csv, "write the per-entity table as CSV");

    // simulate ------------------------------------------------------------
    auto* simulate_cmd = app.add_subcommand("simulate", "generate one synthetic panel as CSV");
    std::string simulate_config, simulate_out;
    simulate_cmd->add_option("--config", simulate_config, "generator config JSON")->required();
    simulate_cmd->add_option("--out", simulate_out, "output CSV path (default: stdout)");

    // montecarlo ----------------------------------------------------------
    auto* mc_cmd = app.add_subcommand("montecarlo", "replicate a fit over synthetic panels");
    std::string mc_config, mc_spec, mc_out;
    int mc_reps = 200, mc_workers = 1;
    std::uint64_t mc_seed = 42;
    mc_cmd->add_option("--config", mc_config, "generator config JSON")->required();
    mc_cmd->add_option("--spec", mc_spec, "model spec JSON")->required();
    mc_cmd->add_option("--reps", mc_reps, "replication count");
    mc_cmd->add_option("--seed", mc_seed, "master seed");
    mc_cmd->add_option("--workers", mc_workers, "worker threads");
    mc_cmd->add_option("--out", mc_out, "write the summary as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fit_cmd->parsed()) {
            ModelSpec spec;
            spec.dependent = fit_dep;
            spec.regressors = fit_regressors;
            spec.effects = effects_from_string(fit_effects);
            spec.covariance = covariance_from_string(fit_cov);
            return run_fit(fit_data, spec, fit_method, fit_t_dof, fit_out);
        }
        if (step_cmd->parsed()) {
            ModelSpec base;
            base.dependent = step_dep;
            base.regressors = step_base;
            base.effects = effects_from_string(step_effects);
            base.covariance = covariance_from_string(step_cov);
            return run_stepwise(step_data, base, step_candidates, p_enter, p_remove, max_steps,
                                step_t_dof, step_out);
        }
        if (hausman_cmd->parsed()) {
            return run_hausman(hausman_data, hausman_dep, hausman_regressors, hausman_effects,
                               hausman_out);
        }
        if (compare_cmd->parsed()) {
            return run_compare(compare_data, compare_variable, compare_from, compare_to,
                               stable_band, compare_out, compare_csv);
        }
        if (simulate_cmd->parsed()) {
            return run_simulate(simulate_config, simulate_out);
        }
        if (mc_cmd->parsed()) {
            return run_montecarlo(mc_config, mc_spec, mc_reps, mc_seed, mc_workers, mc_out);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

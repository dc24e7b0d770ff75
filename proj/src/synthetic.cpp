#include "panelkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace panelkit {

namespace {

std::string entity_label(int index, int n_entities) {
    int width = 1;
    for (int v = n_entities; v >= 10; v /= 10) ++width;
    std::ostringstream out;
    out << 'E';
    std::string digits = std::to_string(index + 1);
    out << std::string(width - digits.size(), '0') << digits;
    return out.str();
}

void check_sd(double value, const char* what) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + " must be a nonnegative number");
    }
}

void check_ar1(double value, const char* what) {
    if (!(std::fabs(value) < 1.0)) {
        throw std::invalid_argument(std::string(what) +
                                    " must have magnitude below 1 (stationary AR(1))");
    }
}

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index));
}

double NormalStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;       // [0, 1)
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

void validate_config(const SyntheticPanelConfig& config) {
    if (config.n_entities < 1 || config.n_periods < 1) {
        throw std::invalid_argument("panel dimensions must be positive");
    }
    if (static_cast<long long>(config.n_entities) * config.n_periods > 100'000'000LL) {
        throw std::invalid_argument("panel would exceed 100 million cells");
    }
    if (config.dependent.empty()) {
        throw std::invalid_argument("dependent variable name is empty");
    }
    std::unordered_set<std::string> names;
    for (const auto& [name, beta] : config.slopes) {
        if (name.empty()) throw std::invalid_argument("slope variable name is empty");
        if (name == config.dependent) {
            throw std::invalid_argument("slope variable '" + name +
                                        "' collides with the dependent variable");
        }
        if (!names.insert(name).second) {
            throw std::invalid_argument("slope variable '" + name + "' is listed twice");
        }
        if (!std::isfinite(beta)) {
            throw std::invalid_argument("slope for '" + name + "' is not finite");
        }
    }
    check_sd(config.entity_effect_sd, "entity_effect_sd");
    check_sd(config.time_effect_sd, "time_effect_sd");
    check_sd(config.noise_sd, "noise_sd");
    if (!std::isfinite(config.intercept)) {
        throw std::invalid_argument("intercept is not finite");
    }
    check_ar1(config.within_entity_ar1, "within_entity_ar1");
    check_ar1(config.regressor_ar1, "regressor_ar1");
    if (!(std::fabs(config.effect_regressor_correlation) < 1.0)) {
        throw std::invalid_argument("effect_regressor_correlation must lie inside (-1, 1)");
    }
    if (config.effect_regressor_correlation != 0.0 && config.entity_effect_sd <= 0.0) {
        throw std::invalid_argument(
            "effect_regressor_correlation needs a positive entity_effect_sd");
    }
    if (!(config.shared_factor_weight >= 0.0) || config.shared_factor_weight >= 1.0) {
        throw std::invalid_argument("shared_factor_weight must lie in [0, 1)");
    }
    std::unordered_set<std::string> shared;
    for (const auto& name : config.shared_factor_variables) {
        if (names.find(name) == names.end()) {
            throw std::invalid_argument("shared factor variable '" + name +
                                        "' is not a slope variable");
        }
        if (!shared.insert(name).second) {
            throw std::invalid_argument("shared factor variable '" + name + "' is listed twice");
        }
    }
}

PanelDataset generate_panel(const SyntheticPanelConfig& config) {
    validate_config(config);
    const int E = config.n_entities;
    const int T = config.n_periods;
    const size_t cells = static_cast<size_t>(E) * static_cast<size_t>(T);
    const size_t k = config.slopes.size();

    NormalStream stream(config.seed);

    // Draw order is part of pk-rng-v1: entity effects, time effects, shared
    // factor (only when active), one grid per slope variable in declaration
    // order, idiosyncratic noise. Effects are drawn even at zero sd so that
    // toggling a scale never shifts later draws.
    std::vector<double> a(E), g(T);
    for (int i = 0; i < E; ++i) a[i] = config.entity_effect_sd * stream.next();
    for (int t = 0; t < T; ++t) g[t] = config.time_effect_sd * stream.next();

    auto draw_ar1_grid = [&](double rho, double sd) {
        std::vector<double> out(cells);
        const double innovation = std::sqrt(1.0 - rho * rho);
        for (int i = 0; i < E; ++i) {
            double prev = 0.0;
            for (int t = 0; t < T; ++t) {
                const double z = stream.next();
                prev = (t == 0) ? z : rho * prev + innovation * z;
                out[static_cast<size_t>(i) * T + t] = sd * prev;
            }
        }
        return out;
    };

    const bool factor_active =
        config.shared_factor_weight > 0.0 && !config.shared_factor_variables.empty();
    std::vector<double> factor;
    if (factor_active) {
        factor = draw_ar1_grid(config.regressor_ar1, 1.0);
    }

    // Tilt toward the entity effect sized so that corr(a_i, x-bar_i) hits the
    // requested value when regressor draws are serially independent.
    double tilt = 0.0;
    if (config.effect_regressor_correlation != 0.0) {
        const double r = config.effect_regressor_correlation;
        tilt = (r / std::sqrt(1.0 - r * r)) /
               (config.entity_effect_sd * std::sqrt(static_cast<double>(T)));
    }

    const std::unordered_set<std::string> shared(config.shared_factor_variables.begin(),
                                                 config.shared_factor_variables.end());
    std::vector<std::vector<double>> x(k);
    for (size_t j = 0; j < k; ++j) {
        x[j] = draw_ar1_grid(config.regressor_ar1, 1.0);
        if (factor_active && shared.count(config.slopes[j].first)) {
            const double w = config.shared_factor_weight;
            const double iw = std::sqrt(1.0 - w * w);
            for (size_t c = 0; c < cells; ++c) {
                x[j][c] = w * factor[c] + iw * x[j][c];
            }
        }
        if (tilt != 0.0) {
            for (int i = 0; i < E; ++i) {
                for (int t = 0; t < T; ++t) {
                    x[j][static_cast<size_t>(i) * T + t] += tilt * a[i];
                }
            }
        }
    }

    const std::vector<double> noise = draw_ar1_grid(config.within_entity_ar1, config.noise_sd);

    std::vector<std::string> variables = {config.dependent};
    for (const auto& [name, beta] : config.slopes) variables.push_back(name);
    PanelBuilder builder(std::move(variables));

    for (int i = 0; i < E; ++i) {
        for (int t = 0; t < T; ++t) {
            const size_t c = static_cast<size_t>(i) * T + t;
            double y = config.intercept + a[i] + g[t] + noise[c];
            std::vector<std::optional<double>> row(1 + k);
            for (size_t j = 0; j < k; ++j) {
                y += config.slopes[j].second * x[j][c];
                row[1 + j] = x[j][c];
            }
            row[0] = y;
            builder.add_row(entity_label(i, E), std::to_string(t + 1), std::move(row));
        }
    }
    return builder.build();
}

}  // namespace panelkit

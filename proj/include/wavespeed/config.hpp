#pragma once

#include "wavespeed/reaction.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wavespeed {

enum class ExperimentKind { sweep, rapid_rate, slow_rate, sign_reversal, lemma_check, frozen_curve };

const char* to_string(ExperimentKind kind);
/// Accepts the config spellings `sweep`, `rapid-rate`, `slow-rate`,
/// `sign-reversal`, `lemma-check`, `frozen-curve`.
ExperimentKind parse_kind(const std::string& name);

/// Overrides for run_cauchy; absent fields keep the stepper defaults.
struct SolverOverrides {
    std::optional<double> dx;
    std::optional<double> dt;
    std::optional<double> half_width;
    /// Horizon per T is max(horizon, horizon_periods·T).
    double horizon = 200.0;
    double horizon_periods = 20.0;
    /// Fraction of the horizon discarded before the speed fit.
    double burn_in = 0.25;
    double sample_interval = 0.1;
};

/// Grids and parameters of the comparison-function checks.
struct LemmaSettings {
    /// ε₁ and ε₂ as fractions of δ₁; both must lie in (0, 1/2).
    double eps1_fraction = 0.45;
    double eps2_fraction = 0.25;
    /// T = T₁/divisor and T = multiplier·T₂.
    double rapid_divisor = 4.0;
    double slow_multiplier = 4.0;
    double rapid_horizon = 20.0;
    /// Slow horizon in units of T.
    double slow_periods = 4.0;
    int residual_nt = 101;
    int residual_nx = 161;
    /// Residual x-range extends this far beyond the transition zone.
    double residual_margin = 15.0;
    double sandwich_half_width = 20.0;
    double sandwich_dx = 0.1;
    int time_stride = 10;
    double tolerance = 1e-8;
    bool sandwich = true;
    /// Constructions to check: `rapid` (primitive F), `smoothed` (F_T), `slow`.
    std::vector<std::string> parts{"rapid", "smoothed", "slow"};

    bool wants(const std::string& part) const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::sweep;
    TemporalCoefficient a = TemporalCoefficient::constant(1.0);
    TemporalCoefficient b = TemporalCoefficient::constant(0.5);
    std::optional<double> ergodic_horizon;
    std::vector<double> T;
    SolverOverrides solver;
    LemmaSettings lemma;
    /// Frozen-curve nodes per period.
    int resolution = 128;
    std::string output = "wavespeed-out";
    std::uint64_t seed = 1;
    /// Worker count; a parsed config without `jobs` uses every core.
    unsigned jobs = 1;
    bool traces = false;

    Nonlinearity nonlinearity() const;
    /// Horizon of the run at period T.
    double horizon(double T) const;
    /// Canonical TOML of every field that affects results (not output or jobs).
    /// parse(canonical()) reproduces them.
    std::string canonical() const;
};

/// Default T-grid of an experiment kind.
std::vector<double> default_grid(ExperimentKind kind);

/// Throws ErrorKind::validation when the grid or solver caps are violated.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace wavespeed

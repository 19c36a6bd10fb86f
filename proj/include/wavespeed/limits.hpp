#pragma once

#include "wavespeed/frontwave.hpp"
#include "wavespeed/reaction.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wavespeed {

/// Frozen speeds c(s) sampled over one period, or over the ergodic window
/// when the forcing is quasi-periodic.
///
/// Nodes are uniform between consecutive time kinks of f. A jump of f is
/// represented by two nodes at the same s carrying the left and right limits.
struct FrozenSpeedCurve {
    std::vector<double> s;
    std::vector<double> speeds;
    /// Largest finite-difference slope over panels of positive width.
    double lipschitz = 0.0;
    /// Length of the sampled window; equals the period when there is one.
    double window = 0.0;
    bool periodic = true;
    SpeedBracket bracket;
    /// Profiles in s order when requested.
    std::vector<WaveProfile> profiles;

    /// Linear interpolation, wrapped by the period for periodic curves.
    double speed_at(double s) const;
    /// ∫₀ᵗ c(τ) dτ by the trapezoid rule on the nodes.
    double integral(double t) const;
};

struct CurveOptions {
    unsigned jobs = 1;
    bool keep_profiles = false;
    /// Minimum number of panels between two neighbouring kinks.
    int panels_per_span = 8;
    /// Window for quasi-periodic forcing; defaults to 10³ periods of the
    /// slowest mode.
    std::optional<double> window;
    WaveOptions wave;
};

/// Slow limit with the half-window discrepancy as error (0 when periodic).
struct SlowLimit {
    double value = 0.0;
    double error = 0.0;
};

WaveProfile homogenized_wave(const Nonlinearity& nl, const WaveOptions& opts = {});
double homogenized_speed(const Nonlinearity& nl, const WaveOptions& opts = {});

/// `resolution` nodes per period, or per slowest mode period when the
/// forcing is quasi-periodic.
FrozenSpeedCurve frozen_speed_curve(const Nonlinearity& nl, int resolution,
                                    const CurveOptions& opts = {});

SlowLimit slow_limit(const FrozenSpeedCurve& curve);
double slow_limit_speed(const FrozenSpeedCurve& curve);

/// √(2ā)(1/2 − ∫ab/∫a) for the cubic reaction.
double cubic_d0(const TemporalCoefficient& a, const TemporalCoefficient& b,
                std::optional<double> ergodic_horizon = std::nullopt);

/// Mean over one period of √(2a(s))(1/2 − b(s)).
double cubic_dstar(const TemporalCoefficient& a, const TemporalCoefficient& b,
                   std::optional<double> ergodic_horizon = std::nullopt);

/// inf over μ > 0 of (m̄ + μ²)/μ, i.e. 2√m̄.
double kpp_spreading_speed(double mean_slope);

struct SpeedEstimate {
    double T = 0.0;
    double cbar = 0.0;
    double uncertainty = 0.0;
};

struct SpeedReport {
    double c0 = 0.0;
    double cstar = 0.0;
    std::optional<double> d0;
    std::optional<double> dstar;
    std::optional<double> kpp;
    std::vector<SpeedEstimate> estimates;
    std::optional<double> rate_rapid;
    std::optional<double> rate_slow;

    /// `T,cbar,uncertainty`, one row per T.
    std::string speeds_csv() const;
    /// `c0,cstar,d0,dstar,kpp,rate_rapid,rate_slow`; absent values are empty cells.
    std::string limits_csv() const;
};

/// Round-trip decimal form used by every CSV writer.
std::string format_number(double v);

}  // namespace wavespeed

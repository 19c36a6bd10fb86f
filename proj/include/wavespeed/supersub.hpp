#pragma once

#include "wavespeed/evolve.hpp"
#include "wavespeed/frontwave.hpp"
#include "wavespeed/limits.hpp"
#include "wavespeed/reaction.hpp"

#include <functional>
#include <memory>
#include <string>

namespace wavespeed {

enum class Side { super, sub };

const char* to_string(Side s);

/// F(s, u) or F_T(s, u) as used inside the rapid comparison functions.
using PrimitiveEvaluator = std::function<double(double s, double u)>;

/// Comparison function v(t, x).
using SpaceTimeFunction = std::function<double(double t, double x)>;

/// Sampled bounds behind the rapid construction. Upper bounds carry the
/// safety factor; β and C₁ are read off the profile.
struct RapidAggregates {
    double eps1 = 0.0;
    double gamma1 = 0.0;
    double K1 = 0.0;
    double K2 = 0.0;  ///< sup |F|, |∂ᵤF|, |∂ᵤᵤF| over s and u ∈ [−ε₁, 1 + ε₁]
    double K3 = 0.0;  ///< sup |φ₀′|A₂ + A₁ + |c₀φ₀′| + |φ₀″| + φ₀′²
    double K0 = 0.0;  ///< K₁K₂ + K₂K₃
    double beta = 0.0;  ///< min |φ₀′| where ε₁ ≤ φ₀ ≤ 1 − ε₁
    double C1 = 0.0;    ///< half-width of that zone
    double T1 = 0.0;    ///< ε₁γ₁/K₀
};

struct AggregateOptions {
    int resolution = 512;
    double safety = 2.0;
    /// s-range scanned when f has no period.
    double window = 100.0;
};

/// ε₁ must lie in (0, δ₁/2).
RapidAggregates rapid_aggregates(const Nonlinearity& nl, const WaveProfile& phi0,
                                 const StabilityMargins& margins, double eps1,
                                 const AggregateOptions& opts = {});

/// q(t) = L/γ₁ + (ε₁ − L/γ₁)e^{−γ₁t} and η(t) solving −βη′ + q′ − K₁q − L = 0,
/// η(0) = 0, where the load L is K₀T (or K̃_T for the F_T construction).
struct RapidSchedule {
    double eps1 = 0.0;
    double T = 0.0;
    double gamma1 = 0.0;
    double K1 = 0.0;
    double beta = 0.0;
    double C1 = 0.0;
    double K0 = 0.0;
    double T1 = 0.0;
    double load = 0.0;
    double c0 = 0.0;
    bool smoothed = false;

    double q(double t) const;
    double dq(double t) const;
    double eta(double t) const;
    double deta(double t) const;
};

/// Throws a regime error unless 0 < T < T₁ and ε₁ < δ₁/2.
RapidSchedule rapid_schedule(double T, const StabilityMargins& margins, const RapidAggregates& agg,
                             double c0);

/// K̃_T for the F_T construction from sampled suprema, with the safety factor.
double smoothed_load(const Nonlinearity& nl, const WaveProfile& phi0, const RapidAggregates& agg,
                     double T, const AggregateOptions& opts = {});

/// Throws a regime error unless K̃_T < ε₁γ₁.
RapidSchedule smoothed_rapid_schedule(double T, const StabilityMargins& margins,
                                      const RapidAggregates& agg, double c0, double load);

/// Largest T = 2^{−k} (k ≥ 0) with K̃_T < ε₁γ₁.
double smoothed_threshold(const Nonlinearity& nl, const WaveProfile& phi0, const RapidAggregates& agg,
                          const AggregateOptions& opts = {});

/// v±(t,x) = φ₀(ξ) ± q(t) + T·F(t/T, φ₀(ξ) ± q(t)), ξ = x − c₀t ± η(t).
double rapid_supersub_eval(const RapidSchedule& sched, const WaveProfile& phi0, const PrimitiveEvaluator& F,
                           double t, double x, Side side);

/// Primitive F or F_T of nl matching the schedule.
PrimitiveEvaluator schedule_primitive(const Nonlinearity& nl, const RapidSchedule& sched);

/// φ(ξ; s) from the curve profiles, linear in s between nodes.
double frozen_profile_value(const FrozenSpeedCurve& curve, double xi, double s);

struct SlowAggregates {
    double eps2 = 0.0;
    double gamma1 = 0.0;
    double K1 = 0.0;
    double C2 = 0.0;     ///< safety × sup |∂ₛφ|
    double beta1 = 0.0;  ///< min |∂ξφ| over |ξ| ≤ C₁ and all s
    double C1 = 0.0;     ///< φ ≤ δ₁/2 beyond C₁ and ≥ 1 − δ₁/2 before −C₁
    double T2 = 0.0;     ///< C₂/(ε₂γ₁)
    /// min over the middle zone of min(φ, 1 − φ); the construction expects ≥ 2ε₂.
    double zone_floor = 0.0;
    bool zone_ok = false;
};

/// Needs a curve built with keep_profiles. ε₂ must lie in (0, δ₁/2).
SlowAggregates slow_aggregates(const FrozenSpeedCurve& curve, const StabilityMargins& margins, double eps2,
                               double safety = 2.0);

/// p(t) = C₂/(Tγ₁) + (ε₂ − C₂/(Tγ₁))e^{−γ₁t}, κ from −C₂/T − β₁κ′ + p′ − K₁p = 0,
/// κ(0) = 0, and the phase X(t) = T·∫₀^{t/T} c.
struct SlowSchedule {
    double eps2 = 0.0;
    double T = 0.0;
    double C2 = 0.0;
    double gamma1 = 0.0;
    double K1 = 0.0;
    double beta1 = 0.0;
    double T2 = 0.0;
    std::shared_ptr<const FrozenSpeedCurve> curve;

    double p(double t) const;
    double dp(double t) const;
    double kappa(double t) const;
    double dkappa(double t) const;
    double X(double t) const;
};

/// Throws a regime error unless T > T₂.
SlowSchedule slow_schedule(double T, const SlowAggregates& agg, std::shared_ptr<const FrozenSpeedCurve> curve);

/// w⁺ = φ(x − X + κ; t/T) + p and w⁻ = φ(x − X − κ; t/T) − p.
double slow_supersub_eval(const SlowSchedule& sched, double t, double x, Side side);

struct ResidualSpec {
    double t0 = 0.0;
    double t1 = 20.0;
    int nt = 101;
    double x0 = -30.0;
    double x1 = 30.0;
    int nx = 241;
    /// Sample x = centre(t) + x_k; follows the comparison front when set.
    std::function<double(double)> centre;
    /// Base finite-difference step; the t-step is h·min(1, T).
    double h = 1e-4;
    unsigned jobs = 1;
};

struct ResidualResult {
    /// min of N (super) or −N (sub) over the samples.
    double min_residual = 0.0;
    double t = 0.0;
    double x = 0.0;
};

/// N = ∂ₜv − ∂ₓₓv − f(t/T, v) by Richardson-extrapolated central differences.
ResidualResult residual_check(const SpaceTimeFunction& v, const Nonlinearity& nl, double T,
                              const ResidualSpec& spec, Side side);

/// Comparison function tagged with the problem it was built for.
struct Comparison {
    SpaceTimeFunction eval;
    std::string fingerprint;
    double T = 0.0;
};

struct EvolveRun {
    const Nonlinearity* nl = nullptr;
    double T = 0.0;
    InitialData initial;
    double horizon = 0.0;
    CauchyOptions options;
};

struct SandwichResult {
    bool holds = false;
    /// Most negative of u − sub and super − u over all samples.
    double worst_gap = 0.0;
    double t = 0.0;
    double x = 0.0;
    std::size_t samples = 0;
};

/// Runs the Cauchy problem and compares every node_stride-th node at every
/// time_stride-th sample.
SandwichResult sandwich_check(const EvolveRun& run, const Comparison& super, const Comparison& sub,
                              double tolerance = 1e-8, int node_stride = 1, int time_stride = 1);

}  // namespace wavespeed

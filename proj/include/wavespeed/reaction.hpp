#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wavespeed {

/// One harmonic term c·cos(2πνt) + s·sin(2πνt); ν in cycles per unit time.
struct TrigMode {
    double freq = 0.0;
    double cos_amp = 0.0;
    double sin_amp = 0.0;
};

/// Constant value on (t0, t1] within one period.
struct StepInterval {
    double t0 = 0.0;
    double t1 = 0.0;
    double value = 0.0;
};

enum class CoefficientKind { constant, trig_polynomial, smoothed_step, quasi_periodic };

/// Time-dependent scalar coefficient of the reaction term.
///
/// Smoothed steps replace each jump by a C¹ cosine ramp of the given width
/// centred on the jump. The ramp is antisymmetric about its midpoint, so every
/// interval mean is preserved. Width 0 keeps the exact step.
class TemporalCoefficient {
public:
    static TemporalCoefficient constant(double value);
    /// Frequencies must be commensurate; the period is 1/gcd of them.
    static TemporalCoefficient trig_polynomial(double mean, std::vector<TrigMode> modes);
    /// Modes with arbitrary frequencies. basis lists the independent
    /// frequencies for the non-resonance check and may be left empty.
    static TemporalCoefficient quasi_periodic(double mean, std::vector<TrigMode> modes,
                                              std::vector<double> basis = {});
    static TemporalCoefficient smoothed_step(std::vector<StepInterval> steps, double width,
                                             double period = 1.0);

    CoefficientKind kind() const { return kind_; }
    double mean() const { return mean_; }
    std::span<const TrigMode> modes() const { return modes_; }
    std::span<const StepInterval> steps() const { return steps_; }
    double width() const { return width_; }
    std::optional<double> period() const { return period_; }
    std::span<const double> basis() const { return basis_; }

    /// True for kinds that are a finite sum of harmonics.
    bool is_harmonic() const { return kind_ != CoefficientKind::smoothed_step; }

    double value(double t) const;
    /// Ramp edges and jump points inside [0, period), sorted.
    std::vector<double> breakpoints() const;
    /// Bound on |value| over all t.
    double amplitude_bound() const;
    double min_value() const;
    double max_value() const;
    std::string describe() const;

private:
    CoefficientKind kind_ = CoefficientKind::constant;
    double mean_ = 0.0;
    std::vector<TrigMode> modes_;
    std::vector<StepInterval> steps_;
    double width_ = 0.0;
    std::optional<double> period_;
    std::vector<double> basis_;
};

/// Scalar signal h(t) with the three time operations the module needs:
/// the mean, I(t) = ∫₀ᵗ (h − h̄) and K_T(t) = ∫_{−∞}^t e^{−T(t−τ)} (h − h̄).
class TimeSignal {
public:
    static TimeSignal from_coefficient(const TemporalCoefficient& c,
                                       std::optional<double> ergodic_horizon);
    static TimeSignal product(const TemporalCoefficient& a, const TemporalCoefficient& b,
                              std::optional<double> ergodic_horizon);

    double value(double t) const;
    /// Throws a config error for non-periodic signals without a horizon.
    double mean() const;
    /// Horizon vs half-horizon discrepancy of the ergodic mean; 0 when exact.
    double mean_error() const { return mean_error_; }
    double integral(double t) const;
    double kernel(double T, double t) const;
    std::optional<double> period() const { return period_; }

private:
    bool harmonic_ = false;
    double harmonic_mean_ = 0.0;
    std::vector<TrigMode> modes_;
    std::function<double(double)> fn_;
    std::optional<double> period_;
    std::vector<double> breakpoints_;
    std::optional<double> mean_;
    double mean_error_ = 0.0;
    std::string mean_failure_;

    void compute_mean(std::optional<double> ergodic_horizon);
};

/// One-variable map u ↦ g(u) with its first two derivatives.
struct ReactionView {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    std::function<double(double)> curvature;
};

/// General reaction f(t, u) supplied as closures.
struct GeneralReaction {
    std::function<double(double, double)> f;
    std::function<double(double, double)> du;
    std::function<double(double, double)> duu;
    std::optional<double> period;
    std::vector<double> breakpoints;  ///< kinks in t within one period
    std::string label = "general";
};

/// Value and u-derivatives of a primitive at one (t, u).
struct Jet {
    double value = 0.0;
    double du = 0.0;
    double duu = 0.0;
};

class Nonlinearity {
public:
    /// f(t, u) = a(t)·u·(u − b(t))·(1 − u).
    static Nonlinearity cubic(TemporalCoefficient a, TemporalCoefficient b,
                              std::optional<double> ergodic_horizon = std::nullopt);
    static Nonlinearity general(GeneralReaction g,
                                std::optional<double> ergodic_horizon = std::nullopt);

    bool is_cubic() const { return cubic_; }
    const TemporalCoefficient& a() const { return a_; }
    const TemporalCoefficient& b() const { return b_; }
    std::optional<double> period() const { return period_; }
    std::optional<double> ergodic_horizon() const { return horizon_; }
    /// Time kinks within one period (ramp edges).
    std::vector<double> breakpoints() const;

    double f(double t, double u) const;
    double du(double t, double u) const;
    double duu(double t, double u) const;

    double mean(double u) const;
    double mean_du(double u) const;
    double mean_duu(double u) const;

    /// F(t,u) = ∫₀ᵗ (f(τ,u) − f̄(u)) dτ with its u-derivatives.
    Jet primitive(double t, double u) const;
    /// F_T(t,u) = ∫_{−∞}^t e^{−T(t−τ)} (f(τ,u) − f̄(u)) dτ with its u-derivatives.
    Jet smoothed_primitive(double T, double t, double u) const;

    ReactionView frozen(double s) const;
    ReactionView averaged() const;

    /// Stable text identity used to match runs with comparison schedules.
    std::string fingerprint() const;

private:
    bool cubic_ = false;
    TemporalCoefficient a_;
    TemporalCoefficient b_;
    TimeSignal a_signal_;
    TimeSignal ab_signal_;
    GeneralReaction general_;
    std::optional<double> period_;
    std::optional<double> horizon_;

    Jet general_primitive(double t, double u) const;
    Jet general_smoothed(double T, double t, double u) const;
    double general_mean(const std::function<double(double, double)>& g, double u) const;
};

double eval_f(const Nonlinearity& nl, double t, double u);
double temporal_mean(const Nonlinearity& nl, double u);
double primitive_F(const Nonlinearity& nl, double t, double u);
double smoothed_primitive_F_T(const Nonlinearity& nl, double T, double t, double u);

/// Sampling grid for the margin scan.
struct ScanSpec {
    int t_samples = 256;
    int u_samples = 64;
    /// t-range scanned when f has no period.
    double window = 100.0;
    /// Tolerance on f(t,0) = f(t,1) = 0.
    double zero_tol = 1e-12;
    /// A dyadic δ is accepted while its margin stays above this fraction of
    /// the margin at the smallest δ tried.
    double margin_fraction = 0.75;
};

struct StabilityMargins {
    double gamma0 = 0.0;
    double delta0 = 0.0;
    double gamma1 = 0.0;
    double delta1 = 0.0;
    double K1 = 0.0;
};

StabilityMargins stability_margins(const Nonlinearity& nl, const ScanSpec& scan = {});

/// min over integer a with 0 < |a|∞ ≤ A of |a·ω|·|a|₂^α; α defaults to dim ω.
double diophantine_margin(std::span<const double> omega, int cutoff,
                          std::optional<double> alpha = std::nullopt);

}  // namespace wavespeed

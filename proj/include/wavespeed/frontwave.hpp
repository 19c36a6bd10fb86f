#pragma once

#include "wavespeed/reaction.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace wavespeed {

enum class ShotOutcome { overshoot, turnback };

struct ShotRecord {
    double speed = 0.0;
    ShotOutcome outcome = ShotOutcome::overshoot;
};

/// Monotone front φ with φ(−∞) = 1, φ(+∞) = 0, sampled on a uniform grid
/// over [−W, W] together with φ′ and φ″. Between nodes the profile is a
/// quintic Hermite interpolant; outside the window it follows its linear
/// tails 1 − A e^{λ₂ξ} and B e^{−λ₁ξ}.
struct WaveProfile {
    double speed = 0.0;
    double lambda1 = 0.0;  ///< decay rate at +∞
    double lambda2 = 0.0;  ///< decay rate at −∞
    double shift = 0.0;    ///< translation applied so that φ(0) = 1/2
    double half_width = 0.0;
    double spacing = 0.0;
    std::vector<double> phi;
    std::vector<double> dphi;
    std::vector<double> ddphi;
    /// Speeds tried by the bisection with their classification.
    std::vector<ShotRecord> trace;

    std::size_t size() const { return phi.size(); }
    double node(std::size_t i) const { return -half_width + spacing * static_cast<double>(i); }

    double value(double xi) const;
    double slope(double xi) const;
    double curvature(double xi) const;
};

struct SpeedBracket {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<ShotRecord> trace;
    /// True when the envelope construction failed and [−c̄, c̄] was used.
    bool fallback = false;
};

struct WaveOptions {
    double launch_offset = 1e-8;
    /// Bisection runs until the bracket endpoints are adjacent doubles.
    int max_bisections = 200;
    double half_width = 40.0;
    int points = 4001;
    /// Below this level the right tail is continued by its exponential.
    double tail_level = 1e-5;
    /// The turnback at the converged bracket must occur below this level,
    /// otherwise the orbit ends at an intermediate zero.
    double connection_floor = 1e-3;
    double abs_tol = 1e-15;
    double rel_tol = 1e-13;
    std::optional<SpeedBracket> bracket;
};

/// Shoots φ″ + cφ′ + g(φ) = 0 from the saddle at 1 and bisects on c.
WaveProfile solve_frozen_wave(const ReactionView& g, const WaveOptions& opts = {});

/// ψ(ξ) = 1/(1 + e^{√(a₀/2)ξ}) with speed √(2a₀)(1/2 − b₀).
WaveProfile cubic_closed_form(double a0, double b0, double half_width = 40.0, int points = 4001);

/// (λ₁, λ₂) = ((c + √(c² − 4g′(0)))/2, (−c + √(c² − 4g′(1)))/2).
std::pair<double, double> decay_rates(double c, double dg0, double dg1);

/// (μ₁, μ₂) = ((c + √(c² + 4γ₀))/2, (−c + √(c² + 4γ₀))/2).
std::pair<double, double> uniform_decay_rates(double c, double gamma0);

/// Bracket covering the speeds of every member of the family, built from
/// the pointwise min/max envelopes. Falls back to [−c̄, c̄] with
/// c̄ = 2√(2 sup|g′|) when an envelope is not bistable.
SpeedBracket speed_bracket(const std::vector<ReactionView>& family, const WaveOptions& opts = {});

/// Outcome of one shot at speed c, exposed for bracket checks.
ShotOutcome classify_shot(const ReactionView& g, double c, const WaveOptions& opts = {});

enum class SpeedSign { negative, positive, zero, inconclusive };

const char* to_string(SpeedSign s);

/// Sign of the wave speed from G(u) = ∫₀ᵘ ḡ: negative when G(1) < 0 and ḡ < 0
/// wherever G > G(1), positive when G(1) > 0 and ḡ > 0 wherever G > 0, zero
/// when G(1) = 0 and G < 0 inside (0,1).
SpeedSign speed_sign_classifier(const std::function<double(double)>& fbar, int grid = 2001);

}  // namespace wavespeed

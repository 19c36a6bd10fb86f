#pragma once

#include "wavespeed/frontwave.hpp"
#include "wavespeed/reaction.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wavespeed {

/// Uniform nodes −L + i·dx, i = 0..n−1, shifted by a whole number of cells.
struct Grid1D {
    double half_width = 60.0;
    double dx = 0.05;
    std::size_t nodes = 2401;
    /// Co-moving shift in cells; the lab-frame offset is shift·dx.
    long shift = 0;

    /// Requires 2L/dx to be an even integer so the node count is odd.
    static Grid1D make(double half_width, double dx);

    double offset() const { return static_cast<double>(shift) * dx; }
    double x(std::size_t i) const { return -half_width + dx * static_cast<double>(i) + offset(); }
};

struct State {
    double time = 0.0;
    std::vector<double> u;
    Grid1D grid;
};

/// Level positions X_α(t) and the fitted average speed.
struct FrontTrace {
    std::vector<double> times;
    std::vector<double> positions;
    double level = 0.5;
    double burn_in = 0.0;
    /// Forcing period in lab time; when set the fit runs on the one-period
    /// moving average of the positions.
    std::optional<double> wobble_period;
    /// Speed resolution of the stepper: one rounding error per step at the
    /// front, ε/(|u_x|·dt). Added to the fitted uncertainty.
    double roundoff_floor = 0.0;
    double speed = 0.0;
    double uncertainty = 0.0;
};

/// Splitting stepper: half reaction (RK2), Crank–Nicolson diffusion with a
/// prefactored tridiagonal solve and Dirichlet data 1 | 0, half reaction.
class ImexStepper {
public:
    struct Options {
        /// Values must stay in [−corridor, 1 + corridor].
        double corridor = 0.25;
        /// Fourth-order compact (Numerov) weighting of the diffusion operator.
        bool compact = true;
        /// Lipschitz bound used for the explicit-reaction cap dt·K₁ ≤ 1/2; 0 skips it.
        double K1 = 0.0;
    };

    ImexStepper(const Nonlinearity& nl, double T, double dt, const Grid1D& grid, Options opts);

    /// Advances the state by dt in place.
    void step(State& s) const;
    double dt() const { return dt_; }

private:
    const Nonlinearity* nl_;
    double T_;
    double dt_;
    std::size_t n_;
    Options opts_;
    double lhs_off_;
    double rhs_off_;
    double rhs_diag_;
    std::vector<double> sup_;  ///< eliminated super-diagonal
    std::vector<double> inv_;  ///< reciprocal pivots
    mutable std::vector<double> rhs_;

    void react(std::vector<double>& u, double t0, double h) const;
    void diffuse(std::vector<double>& u) const;
};

/// One step with default stepper options; rebuilds the factorization.
State step_imex(const State& state, const Nonlinearity& nl, double T, double dt);

struct CauchyOptions {
    double half_width = 60.0;
    double dx = 0.05;
    /// 0 picks min(2e−3, T/50).
    double dt = 0.0;
    /// Negative picks 25% of the horizon.
    double burn_in = -1.0;
    double sample_interval = 0.1;
    double level = 0.5;
    bool compact = true;
    /// Fit on the one-period moving average for periodic forcing.
    bool smooth_wobble = true;
    /// Off leaves speed and uncertainty at 0 and only records the trace.
    bool fit_speed = true;
    std::optional<StabilityMargins> margins;
    /// Called after every sample with the current state.
    std::function<void(const State&)> observer;
};

using InitialData = std::variant<WaveProfile, std::vector<double>>;

FrontTrace run_cauchy(const Nonlinearity& nl, double T, const InitialData& initial, double horizon,
                      const CauchyOptions& opts = {});

/// Lab-frame position of the unique crossing of level α.
double level_position(const State& state, double alpha);

/// (estimate, uncertainty) from the post-burn-in samples.
std::pair<double, double> average_speed(const FrontTrace& trace);

/// CSV with header `time,level,position`.
std::string trace_csv(const FrontTrace& trace);

}  // namespace wavespeed

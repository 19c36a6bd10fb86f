#include "wavespeed/frontwave.hpp"

#include "hermite.hpp"
#include "wavespeed/errors.hpp"
#include "wavespeed/quadrature.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace wavespeed {

namespace {

namespace odeint = boost::numeric::odeint;
using Phase = std::array<double, 2>;

/// One accepted integrator step: ξ, φ, φ′, φ″.
struct PathPoint {
    double xi;
    double phi;
    double dphi;
    double ddphi;
};

struct Shot {
    ShotOutcome outcome = ShotOutcome::overshoot;
    /// φ at which the orbit was classified.
    double level = 0.0;
    std::vector<PathPoint> path;
};

double lambda_plus(double c, double dg0) { return 0.5 * (c + std::sqrt(c * c - 4.0 * dg0)); }
double lambda_minus(double c, double dg1) { return 0.5 * (-c + std::sqrt(c * c - 4.0 * dg1)); }

// Orbits below this level are decided by their linearization at 0.
constexpr double linear_floor = 1e-10;
constexpr double max_step = 0.1;
constexpr double max_xi = 1e4;

Shot shoot(const ReactionView& g, double c, const WaveOptions& opts, bool record) {
    const double dg0 = g.slope(0.0);
    const double dg1 = g.slope(1.0);
    const double l1 = lambda_plus(c, dg0);
    const double l2 = lambda_minus(c, dg1);
    const double eps = opts.launch_offset;

    auto rhs = [&](const Phase& y, Phase& dy, double) {
        dy[0] = y[1];
        dy[1] = -c * y[1] - g.value(y[0]);
    };
    auto stepper = odeint::make_controlled(opts.abs_tol, opts.rel_tol,
                                           odeint::runge_kutta_fehlberg78<Phase>());

    Shot shot;
    Phase y{1.0 - eps, -l2 * eps};
    double xi = 0.0;
    double dt = 0.01;
    auto push = [&] {
        if (record) shot.path.push_back({xi, y[0], y[1], -c * y[1] - g.value(y[0])});
    };
    push();
    while (xi < max_xi) {
        dt = std::min(dt, max_step);
        if (stepper.try_step(rhs, y, xi, dt) == odeint::fail) {
            if (dt < 1e-13) fail(ErrorKind::precision, "shooting step size collapsed");
            continue;
        }
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
            fail(ErrorKind::numeric, "shooting produced a non-finite state");
        if (y[0] <= 0.0) {
            shot.outcome = ShotOutcome::overshoot;
            shot.level = 0.0;
            return shot;
        }
        if (y[1] >= 0.0) {
            shot.outcome = ShotOutcome::turnback;
            shot.level = y[0];
            return shot;
        }
        push();
        // with strong damping the orbit creeps into an interior zero as a node
        if (y[0] > linear_floor && std::abs(y[1]) < 1e-13) {
            shot.outcome = ShotOutcome::turnback;
            shot.level = y[0];
            return shot;
        }
        if (y[0] < linear_floor) {
            // component along the unstable direction at 0 is ∝ φ′ + λ₁φ
            shot.outcome = (y[1] + l1 * y[0] > 0.0) ? ShotOutcome::turnback : ShotOutcome::overshoot;
            shot.level = y[0];
            return shot;
        }
    }
    fail(ErrorKind::precision, "shooting orbit did not reach a classification");
}

double sup_slope(const std::vector<ReactionView>& family) {
    double s = 0.0;
    for (const auto& g : family)
        for (int i = 0; i <= 400; ++i) s = std::max(s, std::abs(g.slope(i / 400.0)));
    return s;
}

SpeedBracket fallback_bracket(const std::vector<ReactionView>& family) {
    const double cbar = 2.0 * std::sqrt(2.0 * sup_slope(family));
    SpeedBracket b;
    b.lo = -cbar;
    b.hi = cbar;
    b.fallback = true;
    return b;
}

void check_bistable_ends(const ReactionView& g) {
    const double g0 = g.value(0.0);
    const double g1 = g.value(1.0);
    if (std::abs(g0) > 1e-12 || std::abs(g1) > 1e-12) {
        std::ostringstream msg;
        msg << "wave nonlinearity must vanish at 0 and 1 (g(0) = " << g0 << ", g(1) = " << g1 << ")";
        fail(ErrorKind::domain, msg.str());
    }
    const double d0 = g.slope(0.0);
    const double d1 = g.slope(1.0);
    if (!(d0 < 0.0) || !(d1 < 0.0)) {
        std::ostringstream msg;
        msg << "limit states must be linearly stable (g'(0) = " << d0 << ", g'(1) = " << d1 << ")";
        fail(ErrorKind::domain, msg.str());
    }
}

/// Evaluates the raw orbit (launch at ξ = 0) with both linear tails.
class RawOrbit {
public:
    RawOrbit(std::vector<PathPoint> path, const ReactionView& g, double c, double eps, double l1,
             double l2)
        : path_(std::move(path)), g_(g), c_(c), eps_(eps), l1_(l1), l2_(l2) {}

    detail::HermiteJet eval(double xi) const {
        if (xi <= path_.front().xi) {
            const double e = eps_ * std::exp(l2_ * (xi - path_.front().xi));
            return {1.0 - e, -l2_ * e, -l2_ * l2_ * e};
        }
        if (xi >= path_.back().xi) {
            const double v = path_.back().phi * std::exp(-l1_ * (xi - path_.back().xi));
            return {v, -l1_ * v, l1_ * l1_ * v};
        }
        auto it = std::upper_bound(path_.begin(), path_.end(), xi,
                                   [](double x, const PathPoint& p) { return x < p.xi; });
        const PathPoint& r = *it;
        const PathPoint& l = *(it - 1);
        const double h = r.xi - l.xi;
        auto jet = detail::quintic_hermite(h, l.phi, l.dphi, l.ddphi, r.phi, r.dphi, r.ddphi,
                                           (xi - l.xi) / h);
        jet.curvature = -c_ * jet.slope - g_.value(jet.value);
        return jet;
    }

    double half_point() const {
        auto it = std::find_if(path_.begin(), path_.end(), [](const PathPoint& p) { return p.phi < 0.5; });
        if (it == path_.begin() || it == path_.end())
            fail(ErrorKind::numeric, "orbit does not cross the level 1/2");
        double lo = (it - 1)->xi;
        double hi = it->xi;
        for (int k = 0; k < 200 && hi - lo > 0.0; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (eval(mid).value >= 0.5 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    std::vector<PathPoint> path_;
    const ReactionView& g_;
    double c_;
    double eps_;
    double l1_;
    double l2_;
};

}  // namespace

double WaveProfile::value(double xi) const {
    if (xi < -half_width) return 1.0 + dphi.front() / lambda2 * std::exp(lambda2 * (xi + half_width));
    if (xi > half_width) return phi.back() * std::exp(-lambda1 * (xi - half_width));
    const auto n = phi.size();
    auto i = static_cast<std::size_t>(std::floor((xi + half_width) / spacing));
    i = std::min(i, n - 2);
    const double s = (xi - node(i)) / spacing;
    return detail::quintic_hermite(spacing, phi[i], dphi[i], ddphi[i], phi[i + 1], dphi[i + 1],
                                   ddphi[i + 1], s).value;
}

double WaveProfile::slope(double xi) const {
    if (xi < -half_width) return dphi.front() * std::exp(lambda2 * (xi + half_width));
    if (xi > half_width) return -lambda1 * phi.back() * std::exp(-lambda1 * (xi - half_width));
    const auto n = phi.size();
    auto i = static_cast<std::size_t>(std::floor((xi + half_width) / spacing));
    i = std::min(i, n - 2);
    const double s = (xi - node(i)) / spacing;
    return detail::quintic_hermite(spacing, phi[i], dphi[i], ddphi[i], phi[i + 1], dphi[i + 1],
                                   ddphi[i + 1], s).slope;
}

double WaveProfile::curvature(double xi) const {
    if (xi < -half_width) return lambda2 * dphi.front() * std::exp(lambda2 * (xi + half_width));
    if (xi > half_width) return lambda1 * lambda1 * phi.back() * std::exp(-lambda1 * (xi - half_width));
    const auto n = phi.size();
    auto i = static_cast<std::size_t>(std::floor((xi + half_width) / spacing));
    i = std::min(i, n - 2);
    const double s = (xi - node(i)) / spacing;
    return detail::quintic_hermite(spacing, phi[i], dphi[i], ddphi[i], phi[i + 1], dphi[i + 1],
                                   ddphi[i + 1], s).curvature;
}

ShotOutcome classify_shot(const ReactionView& g, double c, const WaveOptions& opts) {
    return shoot(g, c, opts, false).outcome;
}

WaveProfile solve_frozen_wave(const ReactionView& g, const WaveOptions& opts) {
    check_bistable_ends(g);
    if (opts.points < 3 || opts.points % 2 == 0 || !(opts.half_width > 0.0))
        fail(ErrorKind::domain, "wave grid needs an odd point count of at least 3 and a positive window");
    SpeedBracket bracket = opts.bracket ? *opts.bracket : fallback_bracket({g});
    double lo = bracket.lo;
    double hi = bracket.hi;

    WaveProfile out;
    const Shot at_lo = shoot(g, lo, opts, false);
    const Shot at_hi = shoot(g, hi, opts, false);
    out.trace.push_back({lo, at_lo.outcome});
    out.trace.push_back({hi, at_hi.outcome});
    if (at_lo.outcome != ShotOutcome::overshoot || at_hi.outcome != ShotOutcome::turnback) {
        std::ostringstream msg;
        msg << "no heteroclinic orbit: shooting outcome does not change across [" << lo << ", " << hi << "]";
        fail(ErrorKind::no_heteroclinic, msg.str());
    }
    for (int k = 0; k < opts.max_bisections; ++k) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        const ShotOutcome o = shoot(g, mid, opts, false).outcome;
        out.trace.push_back({mid, o});
        (o == ShotOutcome::overshoot ? lo : hi) = mid;
    }

    // The turnback orbit follows the connection until the unstable component
    // at 0 takes over; a turnback high above 0 means the orbit stalled at an
    // intermediate zero.
    Shot upper = shoot(g, hi, opts, true);
    if (upper.outcome == ShotOutcome::turnback && upper.level >= opts.connection_floor) {
        std::ostringstream msg;
        msg << "no heteroclinic orbit: converged orbit turns back at level " << upper.level
            << " (intermediate zero)";
        fail(ErrorKind::no_heteroclinic, msg.str());
    }
    const double c = 0.5 * (lo + hi);
    const double l1 = lambda_plus(c, g.slope(0.0));
    const double l2 = lambda_minus(c, g.slope(1.0));

    const double cut = std::max(opts.tail_level, std::min(1e3 * upper.level, 1e-2));
    auto& path = upper.path;
    auto last = std::find_if(path.begin(), path.end(), [&](const PathPoint& p) { return p.phi < cut; });
    path.erase(last, path.end());
    if (path.size() < 2) fail(ErrorKind::numeric, "shooting orbit too short to build a profile");

    RawOrbit orbit(std::move(path), g, c, opts.launch_offset, l1, l2);
    const double centre = orbit.half_point();

    out.speed = c;
    out.lambda1 = l1;
    out.lambda2 = l2;
    out.shift = centre;
    out.half_width = opts.half_width;
    const auto n = static_cast<std::size_t>(opts.points);
    out.spacing = 2.0 * opts.half_width / static_cast<double>(n - 1);
    out.phi.resize(n);
    out.dphi.resize(n);
    out.ddphi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = (i == (n - 1) / 2) ? 0.0 : out.node(i);
        const auto jet = orbit.eval(xi + centre);
        out.phi[i] = jet.value;
        out.dphi[i] = jet.slope;
        out.ddphi[i] = jet.curvature;
    }
    out.phi[(n - 1) / 2] = 0.5;
    return out;
}

WaveProfile cubic_closed_form(double a0, double b0, double half_width, int points) {
    if (!(a0 > 0.0) || !(b0 > 0.0 && b0 < 1.0))
        fail(ErrorKind::domain, "closed-form wave needs a0 > 0 and b0 in (0,1)");
    if (points < 3 || points % 2 == 0) fail(ErrorKind::domain, "wave grid needs an odd point count");
    const double k = std::sqrt(a0 / 2.0);
    WaveProfile out;
    out.speed = std::sqrt(2.0 * a0) * (0.5 - b0);
    out.lambda1 = k;
    out.lambda2 = k;
    out.half_width = half_width;
    const auto n = static_cast<std::size_t>(points);
    out.spacing = 2.0 * half_width / static_cast<double>(n - 1);
    out.phi.resize(n);
    out.dphi.resize(n);
    out.ddphi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = (i == (n - 1) / 2) ? 0.0 : out.node(i);
        // φ and 1 − φ from the side where the exponential is small
        double p, q;
        if (xi >= 0.0) {
            const double e = std::exp(-k * xi);
            p = e / (1.0 + e);
            q = 1.0 / (1.0 + e);
        } else {
            const double e = std::exp(k * xi);
            p = 1.0 / (1.0 + e);
            q = e / (1.0 + e);
        }
        out.phi[i] = p;
        out.dphi[i] = -k * p * q;
        out.ddphi[i] = -k * (q - p) * out.dphi[i];
    }
    return out;
}

std::pair<double, double> decay_rates(double c, double dg0, double dg1) {
    if (!(dg0 < 0.0) || !(dg1 < 0.0))
        fail(ErrorKind::domain, "decay rates need g'(0) < 0 and g'(1) < 0");
    return {lambda_plus(c, dg0), lambda_minus(c, dg1)};
}

std::pair<double, double> uniform_decay_rates(double c, double gamma0) {
    if (!(gamma0 > 0.0)) fail(ErrorKind::domain, "uniform decay rates need gamma0 > 0");
    const double r = std::sqrt(c * c + 4.0 * gamma0);
    return {0.5 * (c + r), 0.5 * (-c + r)};
}

SpeedBracket speed_bracket(const std::vector<ReactionView>& family, const WaveOptions& opts) {
    if (family.empty()) fail(ErrorKind::domain, "speed bracket needs a non-empty family");
    for (const auto& g : family) check_bistable_ends(g);

    auto envelope = [&](bool upper) {
        ReactionView env;
        env.value = [&family, upper](double u) {
            double v = family.front().value(u);
            for (const auto& g : family) v = upper ? std::max(v, g.value(u)) : std::min(v, g.value(u));
            return v;
        };
        // Only the end slopes are read by the shooting; they follow the
        // envelope's one-sided behaviour inside [0,1].
        env.slope = [&family, upper](double u) {
            const bool at_zero = u <= 0.5;
            double v = family.front().slope(u);
            for (const auto& g : family) {
                const double s = g.slope(u);
                v = (upper == at_zero) ? std::max(v, s) : std::min(v, s);
            }
            return v;
        };
        env.curvature = [](double) { return 0.0; };
        return env;
    };

    auto bistable = [](const ReactionView& g) {
        if (!(g.slope(0.0) < 0.0) || !(g.slope(1.0) < 0.0)) return false;
        int changes = 0;
        double prev = g.value(1e-3);
        if (!(prev < 0.0)) return false;
        for (int i = 2; i < 1000; ++i) {
            const double v = g.value(i / 1000.0);
            if ((v > 0.0) != (prev > 0.0)) ++changes;
            prev = v;
        }
        return changes == 1 && prev > 0.0;
    };

    const SpeedBracket wide = fallback_bracket(family);
    try {
        const ReactionView lower = envelope(false);
        const ReactionView upper = envelope(true);
        if (!bistable(lower) || !bistable(upper)) fail(ErrorKind::bracket, "envelope is not bistable");
        WaveOptions inner = opts;
        inner.bracket = wide;
        const double c_lo = solve_frozen_wave(lower, inner).speed;
        const double c_hi = solve_frozen_wave(upper, inner).speed;
        const double pad = std::max(0.1 * (c_hi - c_lo), 1e-2);
        SpeedBracket b;
        b.lo = c_lo - pad;
        b.hi = c_hi + pad;
        const ShotOutcome o_lo = classify_shot(family.front(), b.lo, opts);
        const ShotOutcome o_hi = classify_shot(family.front(), b.hi, opts);
        b.trace = {{b.lo, o_lo}, {b.hi, o_hi}};
        if (o_lo != ShotOutcome::overshoot || o_hi != ShotOutcome::turnback)
            fail(ErrorKind::bracket, "envelope bracket does not separate outcomes");
        return b;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::bracket && e.kind() != ErrorKind::no_heteroclinic) throw;
    }
    SpeedBracket b = wide;
    b.trace = {{b.lo, classify_shot(family.front(), b.lo, opts)},
               {b.hi, classify_shot(family.front(), b.hi, opts)}};
    return b;
}

const char* to_string(SpeedSign s) {
    switch (s) {
        case SpeedSign::negative: return "negative";
        case SpeedSign::positive: return "positive";
        case SpeedSign::zero: return "zero";
        case SpeedSign::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

SpeedSign speed_sign_classifier(const std::function<double(double)>& fbar, int grid) {
    if (grid < 3) fail(ErrorKind::domain, "classifier grid needs at least 3 points");
    if (std::abs(fbar(0.0)) > 1e-12 || std::abs(fbar(1.0)) > 1e-12)
        fail(ErrorKind::domain, "averaged nonlinearity must vanish at 0 and 1");
    const auto n = static_cast<std::size_t>(grid);
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> G(n, 0.0);
    std::vector<double> fv(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        G[i] = G[i - 1] + integrate(fbar, h * static_cast<double>(i - 1), h * static_cast<double>(i));
        fv[i] = fbar(h * static_cast<double>(i));
    }
    const double G1 = G.back();
    constexpr double zero_tol = 1e-12;
    auto all_interior = [&](auto pred) {
        for (std::size_t i = 1; i + 1 < n; ++i)
            if (!pred(i)) return false;
        return true;
    };
    if (std::abs(G1) <= zero_tol) {
        if (all_interior([&](std::size_t i) { return G[i] < 0.0; })) return SpeedSign::zero;
        return SpeedSign::inconclusive;
    }
    if (G1 < 0.0) {
        if (all_interior([&](std::size_t i) { return !(G[i] > G1) || fv[i] < 0.0; })) return SpeedSign::negative;
        return SpeedSign::inconclusive;
    }
    if (all_interior([&](std::size_t i) { return !(G[i] > 0.0) || fv[i] > 0.0; })) return SpeedSign::positive;
    return SpeedSign::inconclusive;
}

}  // namespace wavespeed

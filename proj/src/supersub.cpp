#include "wavespeed/supersub.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wavespeed {

namespace {

double sign_of(Side s) { return s == Side::super ? 1.0 : -1.0; }

/// e^{−γt}-relaxation shared by q/p and η/κ: the level relaxes from eps to
/// load/γ and the shift integrates −(γ + K)(level − ...)/β.
struct Relaxation {
    double eps, load, gamma, K, beta;

    double level(double t) const {
        const double r = load / gamma;
        return r + (eps - r) * std::exp(-gamma * t);
    }
    double dlevel(double t) const { return -gamma * (eps - load / gamma) * std::exp(-gamma * t); }
    double shift(double t) const {
        const double k = (gamma + K) / (beta * gamma);
        return -k * (eps - load / gamma) * (-std::expm1(-gamma * t)) - k * load * t;
    }
    double dshift(double t) const {
        return -(gamma + K) / beta * (eps - load / gamma) * std::exp(-gamma * t) -
               (gamma + K) * load / (beta * gamma);
    }
};

Relaxation relax(const RapidSchedule& s) { return {s.eps1, s.load, s.gamma1, s.K1, s.beta}; }
Relaxation relax(const SlowSchedule& s) { return {s.eps2, s.C2 / s.T, s.gamma1, s.K1, s.beta1}; }

/// Sample points in s over one period, or over a window when there is none.
std::vector<double> s_samples(const Nonlinearity& nl, const AggregateOptions& opts) {
    const double span = nl.period() ? *nl.period() : opts.window;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(opts.resolution));
    for (int i = 0; i < opts.resolution; ++i) out.push_back(span * i / opts.resolution);
    for (double b : nl.breakpoints()) out.push_back(b);
    return out;
}

std::vector<double> u_samples(double eps, int n) {
    std::vector<double> out;
    for (int i = 0; i <= n; ++i) out.push_back(-eps + (1.0 + 2.0 * eps) * i / n);
    return out;
}

struct ProfileSups {
    double slope = 0.0;      ///< sup |φ′|
    double slope_sq = 0.0;   ///< sup φ′²
    double curvature = 0.0;  ///< sup |φ″|
};

ProfileSups profile_sups(const WaveProfile& p) {
    ProfileSups s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        s.slope = std::max(s.slope, std::abs(p.dphi[i]));
        s.curvature = std::max(s.curvature, std::abs(p.ddphi[i]));
    }
    s.slope_sq = s.slope * s.slope;
    return s;
}

void check_eps(double eps, double delta1, const char* name) {
    if (!(eps > 0.0) || !(eps < 0.5 * delta1)) {
        std::ostringstream msg;
        msg << name << " = " << eps << " must lie in (0, delta1/2) with delta1 = " << delta1;
        fail(ErrorKind::regime, msg.str());
    }
}

}  // namespace

const char* to_string(Side s) { return s == Side::super ? "super" : "sub"; }

RapidAggregates rapid_aggregates(const Nonlinearity& nl, const WaveProfile& phi0,
                                 const StabilityMargins& margins, double eps1, const AggregateOptions& opts) {
    check_eps(eps1, margins.delta1, "eps1");
    if (opts.resolution < 2 || !(opts.safety >= 1.0)) fail(ErrorKind::config, "invalid aggregate options");
    RapidAggregates agg;
    agg.eps1 = eps1;
    agg.gamma1 = margins.gamma1;
    agg.K1 = margins.K1;

    // Zone ε₁ ≤ φ₀ ≤ 1 − ε₁, symmetrized to [−C₁, C₁].
    double right = -phi0.half_width;
    double left = phi0.half_width;
    for (std::size_t i = 0; i < phi0.size(); ++i) {
        if (phi0.phi[i] >= eps1) right = std::max(right, phi0.node(i));
        if (phi0.phi[i] <= 1.0 - eps1) left = std::min(left, phi0.node(i));
    }
    agg.C1 = std::max(right, -left) + phi0.spacing;
    if (agg.C1 >= phi0.half_width) fail(ErrorKind::numeric, "middle zone exceeds the profile window");
    agg.beta = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < phi0.size(); ++i) {
        if (std::abs(phi0.node(i)) <= agg.C1) agg.beta = std::min(agg.beta, std::abs(phi0.dphi[i]));
    }

    const auto ss = s_samples(nl, opts);
    const auto us = u_samples(eps1, opts.resolution);
    double k2 = 0.0;
    for (double s : ss) {
        for (double u : us) {
            const Jet F = nl.primitive(s, u);
            k2 = std::max({k2, std::abs(F.value), std::abs(F.du), std::abs(F.duu)});
        }
    }
    agg.K2 = opts.safety * k2;

    const double A1 = eps1 * agg.gamma1;
    const double A2 = (agg.gamma1 + agg.K1) * eps1 / agg.beta;
    double k3 = 0.0;
    for (std::size_t i = 0; i < phi0.size(); ++i) {
        const double d = std::abs(phi0.dphi[i]);
        k3 = std::max(k3, d * A2 + A1 + std::abs(phi0.speed) * d + std::abs(phi0.ddphi[i]) + d * d);
    }
    agg.K3 = opts.safety * k3;
    agg.K0 = agg.K1 * agg.K2 + agg.K2 * agg.K3;
    agg.T1 = eps1 * agg.gamma1 / agg.K0;
    return agg;
}

double RapidSchedule::q(double t) const { return relax(*this).level(t); }
double RapidSchedule::dq(double t) const { return relax(*this).dlevel(t); }
double RapidSchedule::eta(double t) const { return relax(*this).shift(t); }
double RapidSchedule::deta(double t) const { return relax(*this).dshift(t); }

RapidSchedule rapid_schedule(double T, const StabilityMargins& margins, const RapidAggregates& agg, double c0) {
    check_eps(agg.eps1, margins.delta1, "eps1");
    if (!(T > 0.0) || !(T < agg.T1)) {
        std::ostringstream msg;
        msg << "rapid construction needs 0 < T < T1 = " << agg.T1 << " (got T = " << T << ")";
        fail(ErrorKind::regime, msg.str());
    }
    RapidSchedule s;
    s.eps1 = agg.eps1;
    s.T = T;
    s.gamma1 = agg.gamma1;
    s.K1 = agg.K1;
    s.beta = agg.beta;
    s.C1 = agg.C1;
    s.K0 = agg.K0;
    s.T1 = agg.T1;
    s.load = agg.K0 * T;
    s.c0 = c0;
    return s;
}

double smoothed_load(const Nonlinearity& nl, const WaveProfile& phi0, const RapidAggregates& agg, double T,
                     const AggregateOptions& opts) {
    if (!(T > 0.0)) fail(ErrorKind::domain, "T must be positive");
    const auto ss = s_samples(nl, opts);
    const auto us = u_samples(agg.eps1, opts.resolution);
    double f0 = 0.0, f1 = 0.0, f2 = 0.0;
    for (double s : ss) {
        for (double u : us) {
            const Jet F = nl.smoothed_primitive(T, s, u);
            f0 = std::max(f0, std::abs(F.value));
            f1 = std::max(f1, std::abs(F.du));
            f2 = std::max(f2, std::abs(F.duu));
        }
    }
    const auto sups = profile_sups(phi0);
    const double A1 = agg.eps1 * agg.gamma1;
    const double A2 = (agg.gamma1 + agg.K1) * agg.eps1 / agg.beta;
    double mix = 0.0;
    for (std::size_t i = 0; i < phi0.size(); ++i) {
        mix = std::max(mix, (A2 + std::abs(phi0.speed)) * std::abs(phi0.dphi[i]) + A1 + std::abs(phi0.ddphi[i]));
    }
    return opts.safety * T * ((agg.K1 + 1.0) * f0 + f2 * sups.slope_sq + f1 * mix);
}

RapidSchedule smoothed_rapid_schedule(double T, const StabilityMargins& margins, const RapidAggregates& agg,
                                      double c0, double load) {
    check_eps(agg.eps1, margins.delta1, "eps1");
    if (!(T > 0.0) || !(load < agg.eps1 * agg.gamma1)) {
        std::ostringstream msg;
        msg << "smoothed rapid construction needs K_T = " << load << " < eps1*gamma1 = " << agg.eps1 * agg.gamma1;
        fail(ErrorKind::regime, msg.str());
    }
    RapidSchedule s;
    s.eps1 = agg.eps1;
    s.T = T;
    s.gamma1 = agg.gamma1;
    s.K1 = agg.K1;
    s.beta = agg.beta;
    s.C1 = agg.C1;
    s.K0 = agg.K0;
    s.T1 = agg.T1;
    s.load = load;
    s.c0 = c0;
    s.smoothed = true;
    return s;
}

double smoothed_threshold(const Nonlinearity& nl, const WaveProfile& phi0, const RapidAggregates& agg,
                          const AggregateOptions& opts) {
    double T = 1.0;
    for (int k = 0; k < 60; ++k, T *= 0.5) {
        if (smoothed_load(nl, phi0, agg, T, opts) < agg.eps1 * agg.gamma1) return T;
    }
    fail(ErrorKind::regime, "no T with K_T < eps1*gamma1 found down to 2^-60");
}

double rapid_supersub_eval(const RapidSchedule& sched, const WaveProfile& phi0, const PrimitiveEvaluator& F,
                           double t, double x, Side side) {
    const double sg = sign_of(side);
    const double xi = x - sched.c0 * t + sg * sched.eta(t);
    const double u = phi0.value(xi) + sg * sched.q(t);
    if (!(u >= -1.0 && u <= 2.0)) fail(ErrorKind::domain, "comparison argument left [-1, 2]");
    return u + sched.T * F(t / sched.T, u);
}

PrimitiveEvaluator schedule_primitive(const Nonlinearity& nl, const RapidSchedule& sched) {
    if (sched.smoothed) {
        const double T = sched.T;
        return [&nl, T](double s, double u) { return nl.smoothed_primitive(T, s, u).value; };
    }
    return [&nl](double s, double u) { return nl.primitive(s, u).value; };
}

double frozen_profile_value(const FrozenSpeedCurve& curve, double xi, double s) {
    if (curve.profiles.size() != curve.s.size() || curve.s.size() < 2)
        fail(ErrorKind::config, "frozen speed curve was built without profiles");
    if (curve.periodic) s -= curve.window * std::floor(s / curve.window);
    s = std::clamp(s, curve.s.front(), curve.s.back());
    const auto it = std::upper_bound(curve.s.begin(), curve.s.end(), s);
    if (it == curve.s.end()) return curve.profiles.back().value(xi);
    const auto i = static_cast<std::size_t>(it - curve.s.begin());
    if (i == 0) return curve.profiles.front().value(xi);
    const double w = curve.s[i] - curve.s[i - 1];
    if (w <= 0.0) return curve.profiles[i].value(xi);
    const double r = (s - curve.s[i - 1]) / w;
    return (1.0 - r) * curve.profiles[i - 1].value(xi) + r * curve.profiles[i].value(xi);
}

SlowAggregates slow_aggregates(const FrozenSpeedCurve& curve, const StabilityMargins& margins, double eps2,
                               double safety) {
    check_eps(eps2, margins.delta1, "eps2");
    const auto& P = curve.profiles;
    const std::size_t n = P.size();
    if (n != curve.s.size() || n < 3) fail(ErrorKind::config, "frozen speed curve was built without profiles");
    for (const auto& p : P) {
        if (p.size() != P.front().size() || p.half_width != P.front().half_width)
            fail(ErrorKind::config, "frozen profiles must share one grid");
    }
    SlowAggregates agg;
    agg.eps2 = eps2;
    agg.gamma1 = margins.gamma1;
    agg.K1 = margins.K1;

    const double lo_level = 0.5 * margins.delta1;
    double C1 = 0.0;
    for (const auto& p : P) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p.phi[k] > lo_level) C1 = std::max(C1, p.node(k));
            if (p.phi[k] < 1.0 - lo_level) C1 = std::max(C1, -p.node(k));
        }
    }
    agg.C1 = C1 + P.front().spacing;
    if (agg.C1 >= P.front().half_width) fail(ErrorKind::numeric, "middle zone exceeds the profile window");

    agg.beta1 = std::numeric_limits<double>::infinity();
    agg.zone_floor = 1.0;
    for (const auto& p : P) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (std::abs(p.node(k)) > agg.C1) continue;
            agg.beta1 = std::min(agg.beta1, std::abs(p.dphi[k]));
            agg.zone_floor = std::min({agg.zone_floor, p.phi[k], 1.0 - p.phi[k]});
        }
    }
    agg.zone_ok = agg.zone_floor >= 2.0 * eps2;

    // Central differences in s between neighbouring nodes of positive width.
    double ds_sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i + 1 == n ? n - 1 : i + 1;
        const double w = curve.s[b] - curve.s[a];
        if (!(w > 1e-12 * curve.window)) continue;
        for (std::size_t k = 0; k < P[a].size(); ++k) {
            ds_sup = std::max(ds_sup, std::abs(P[b].phi[k] - P[a].phi[k]) / w);
        }
    }
    agg.C2 = safety * ds_sup;
    agg.T2 = agg.C2 / (eps2 * agg.gamma1);
    return agg;
}

double SlowSchedule::p(double t) const { return relax(*this).level(t); }
double SlowSchedule::dp(double t) const { return relax(*this).dlevel(t); }
double SlowSchedule::kappa(double t) const { return relax(*this).shift(t); }
double SlowSchedule::dkappa(double t) const { return relax(*this).dshift(t); }
double SlowSchedule::X(double t) const { return T * curve->integral(t / T); }

SlowSchedule slow_schedule(double T, const SlowAggregates& agg, std::shared_ptr<const FrozenSpeedCurve> curve) {
    if (!curve) fail(ErrorKind::config, "slow schedule needs a frozen speed curve");
    if (!(T > agg.T2)) {
        std::ostringstream msg;
        msg << "slow construction needs T > T2 = " << agg.T2 << " (got T = " << T << ")";
        fail(ErrorKind::regime, msg.str());
    }
    SlowSchedule s;
    s.eps2 = agg.eps2;
    s.T = T;
    s.C2 = agg.C2;
    s.gamma1 = agg.gamma1;
    s.K1 = agg.K1;
    s.beta1 = agg.beta1;
    s.T2 = agg.T2;
    s.curve = std::move(curve);
    return s;
}

double slow_supersub_eval(const SlowSchedule& sched, double t, double x, Side side) {
    const double sg = sign_of(side);
    const double xi = x - sched.X(t) + sg * sched.kappa(t);
    return frozen_profile_value(*sched.curve, xi, t / sched.T) + sg * sched.p(t);
}

ResidualResult residual_check(const SpaceTimeFunction& v, const Nonlinearity& nl, double T,
                              const ResidualSpec& spec, Side side) {
    if (spec.nt < 1 || spec.nx < 1 || !(spec.h > 0.0) || !(T > 0.0))
        fail(ErrorKind::config, "invalid residual sample spec");
    const double ht = spec.h * std::min(1.0, T);
    const double hx = spec.h;
    const double sg = sign_of(side);
    auto coord = [](double a, double b, int n, int i) { return n == 1 ? a : a + (b - a) * i / (n - 1); };

    std::vector<ResidualResult> rows(static_cast<std::size_t>(spec.nt));
    parallel_for(rows.size(), spec.jobs, [&](std::size_t j) {
        const double t = coord(spec.t0, spec.t1, spec.nt, static_cast<int>(j));
        ResidualResult best{std::numeric_limits<double>::infinity(), t, 0.0};
        const double shift = spec.centre ? spec.centre(t) : 0.0;
        for (int k = 0; k < spec.nx; ++k) {
            const double x = shift + coord(spec.x0, spec.x1, spec.nx, k);
            const double c = v(t, x);
            auto dt = [&](double h) { return (v(t + h, x) - v(t - h, x)) / (2.0 * h); };
            auto dxx = [&](double h) { return (v(t, x + h) - 2.0 * c + v(t, x - h)) / (h * h); };
            const double vt = (4.0 * dt(0.5 * ht) - dt(ht)) / 3.0;
            const double vxx = (4.0 * dxx(0.5 * hx) - dxx(hx)) / 3.0;
            const double N = vt - vxx - nl.f(t / T, c);
            if (!std::isfinite(N)) {
                std::ostringstream msg;
                msg << "non-finite residual at t = " << t << ", x = " << x;
                fail(ErrorKind::numeric, msg.str());
            }
            if (sg * N < best.min_residual) best = {sg * N, t, x};
        }
        rows[j] = best;
    });
    ResidualResult out = rows.front();
    for (const auto& r : rows) {
        if (r.min_residual < out.min_residual) out = r;
    }
    return out;
}

SandwichResult sandwich_check(const EvolveRun& run, const Comparison& super, const Comparison& sub,
                              double tolerance, int node_stride, int time_stride) {
    if (!run.nl) fail(ErrorKind::config, "sandwich run needs a nonlinearity");
    const std::string fp = run.nl->fingerprint();
    for (const auto* c : {&super, &sub}) {
        if (c->fingerprint != fp || std::abs(c->T - run.T) > 1e-12 * run.T)
            fail(ErrorKind::config, "comparison function was built for a different (f, T)");
    }
    if (node_stride < 1 || time_stride < 1) fail(ErrorKind::config, "sandwich strides must be positive");

    SandwichResult out;
    out.worst_gap = std::numeric_limits<double>::infinity();
    CauchyOptions opts = run.options;
    auto inner = opts.observer;
    std::size_t seen = 0;
    opts.observer = [&](const State& s) {
        if (inner) inner(s);
        if (seen++ % static_cast<std::size_t>(time_stride) != 0) return;
        for (std::size_t i = 0; i < s.u.size(); i += static_cast<std::size_t>(node_stride)) {
            const double x = s.grid.x(i);
            const double gap = std::min(s.u[i] - sub.eval(s.time, x), super.eval(s.time, x) - s.u[i]);
            if (gap < out.worst_gap) {
                out.worst_gap = gap;
                out.t = s.time;
                out.x = x;
            }
        }
        ++out.samples;
    };
    opts.fit_speed = false;
    run_cauchy(*run.nl, run.T, run.initial, run.horizon, opts);
    out.holds = out.worst_gap >= -tolerance;
    return out;
}

}  // namespace wavespeed

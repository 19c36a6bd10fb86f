#include "wavespeed/limits.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/parallel.hpp"
#include "wavespeed/quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace wavespeed {

namespace {

double slowest_period(const TemporalCoefficient& c) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& m : c.modes()) {
        if (m.freq > 0.0 && (m.cos_amp != 0.0 || m.sin_amp != 0.0)) lo = std::min(lo, m.freq);
    }
    return std::isfinite(lo) ? 1.0 / lo : 0.0;
}

/// Window for a non-periodic reaction: explicit option, else 10³ slowest periods.
double ergodic_window(const Nonlinearity& nl, std::optional<double> requested) {
    if (requested) {
        if (!(*requested > 0.0)) fail(ErrorKind::config, "ergodic window must be positive");
        return *requested;
    }
    if (nl.is_cubic()) {
        const double p = std::max(slowest_period(nl.a()), slowest_period(nl.b()));
        if (p > 0.0) return 1e3 * p;
    }
    if (nl.ergodic_horizon()) return *nl.ergodic_horizon();
    fail(ErrorKind::config, "non-periodic reaction needs an ergodic window");
}

bool jumps_at(const Nonlinearity& nl, double p) {
    const double q = std::nextafter(p, std::numeric_limits<double>::infinity());
    for (double u : {0.25, 0.5, 0.75}) {
        const double l = nl.f(p, u);
        const double r = nl.f(q, u);
        if (std::abs(l - r) > 1e-10 * (1.0 + std::abs(l))) return true;
    }
    return false;
}

struct Node {
    double s;
    double eval;  ///< where the frozen view is taken; differs from s on the right of a jump
};

/// Length over which `resolution` nodes are spread: the period, or the
/// slowest mode period of quasi-periodic forcing.
double sampling_unit(const Nonlinearity& nl, double window) {
    if (nl.period()) return *nl.period();
    if (nl.is_cubic()) {
        const double p = std::max(slowest_period(nl.a()), slowest_period(nl.b()));
        if (p > 0.0) return std::min(p, window);
    }
    return window;
}

std::vector<Node> curve_nodes(const Nonlinearity& nl, double window, bool periodic, int resolution,
                              int panels_per_span) {
    const double unit = sampling_unit(nl, window);
    std::vector<double> cuts{0.0};
    if (periodic) {
        for (double p : nl.breakpoints()) {
            if (p > 0.0 && p < window) cuts.push_back(p);
        }
    }
    cuts.push_back(window);
    std::sort(cuts.begin(), cuts.end());
    const double tiny = 1e-12 * window;
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [&](double x, double y) { return y - x <= tiny; }),
               cuts.end());

    const double up = std::numeric_limits<double>::infinity();
    std::vector<Node> nodes;
    const bool jump0 = periodic && jumps_at(nl, 0.0);
    nodes.push_back({0.0, jump0 ? std::nextafter(0.0, up) : 0.0});
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k];
        const double b = cuts[k + 1];
        const int panels = std::max(panels_per_span,
                                    static_cast<int>(std::ceil(resolution * (b - a) / unit - 1e-9)));
        for (int i = 1; i < panels; ++i) {
            const double s = a + (b - a) * i / panels;
            nodes.push_back({s, s});
        }
        nodes.push_back({b, b});
        if (k + 2 < cuts.size() && periodic && jumps_at(nl, b)) nodes.push_back({b, std::nextafter(b, up)});
    }
    return nodes;
}

}  // namespace

double FrozenSpeedCurve::speed_at(double t) const {
    if (s.empty()) fail(ErrorKind::config, "empty frozen speed curve");
    if (periodic) t -= window * std::floor(t / window);
    t = std::clamp(t, s.front(), s.back());
    const auto it = std::upper_bound(s.begin(), s.end(), t);
    if (it == s.end()) return speeds.back();
    const std::size_t i = static_cast<std::size_t>(it - s.begin());
    if (i == 0) return speeds.front();
    const double w = s[i] - s[i - 1];
    if (w <= 0.0) return speeds[i];
    const double r = (t - s[i - 1]) / w;
    return speeds[i - 1] + r * (speeds[i] - speeds[i - 1]);
}

double FrozenSpeedCurve::integral(double t) const {
    if (s.size() < 2) fail(ErrorKind::config, "frozen speed curve needs two nodes");
    // Windows of a quasi-periodic curve repeat as if periodic beyond the sample.
    const double reps = std::floor(t / window);
    double rest = t - reps * window;
    double whole = 0.0;
    double part = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double a = s[i];
        const double b = s[i + 1];
        const double area = 0.5 * (b - a) * (speeds[i] + speeds[i + 1]);
        whole += area;
        if (rest >= b) {
            part += area;
        } else if (rest > a) {
            const double mid = speeds[i] + (rest - a) / (b - a) * (speeds[i + 1] - speeds[i]);
            part += 0.5 * (rest - a) * (speeds[i] + mid);
        }
    }
    return reps * whole + part;
}

WaveProfile homogenized_wave(const Nonlinearity& nl, const WaveOptions& opts) {
    return solve_frozen_wave(nl.averaged(), opts);
}

double homogenized_speed(const Nonlinearity& nl, const WaveOptions& opts) {
    return homogenized_wave(nl, opts).speed;
}

FrozenSpeedCurve frozen_speed_curve(const Nonlinearity& nl, int resolution, const CurveOptions& opts) {
    if (resolution < 16) fail(ErrorKind::config, "frozen speed curve needs resolution >= 16");
    FrozenSpeedCurve curve;
    curve.periodic = nl.period().has_value();
    curve.window = curve.periodic ? *nl.period() : ergodic_window(nl, opts.window);
    const auto nodes = curve_nodes(nl, curve.window, curve.periodic, resolution,
                                   std::max(1, opts.panels_per_span));

    std::vector<ReactionView> views;
    views.reserve(nodes.size());
    for (const auto& n : nodes) views.push_back(nl.frozen(n.eval));
    WaveOptions wave = opts.wave;
    curve.bracket = wave.bracket ? *wave.bracket : speed_bracket(views, wave);
    wave.bracket = curve.bracket;

    std::vector<WaveProfile> profiles(nodes.size());
    parallel_for(nodes.size(), opts.jobs, [&](std::size_t i) {
        try {
            profiles[i] = solve_frozen_wave(views[i], wave);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "no frozen wave at s = " << nodes[i].s << ": " << e.what();
            fail(e.kind(), msg.str());
        }
    });

    curve.s.reserve(nodes.size());
    curve.speeds.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        curve.s.push_back(nodes[i].s);
        curve.speeds.push_back(profiles[i].speed);
    }
    const double tiny = 1e-12 * curve.window;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double w = curve.s[i + 1] - curve.s[i];
        if (w > tiny) {
            curve.lipschitz = std::max(curve.lipschitz, std::abs(curve.speeds[i + 1] - curve.speeds[i]) / w);
        }
    }
    if (opts.keep_profiles) curve.profiles = std::move(profiles);
    return curve;
}

SlowLimit slow_limit(const FrozenSpeedCurve& curve) {
    SlowLimit out;
    out.value = curve.integral(curve.window) / curve.window;
    if (!curve.periodic) {
        const double half = curve.integral(0.5 * curve.window) / (0.5 * curve.window);
        out.error = std::abs(out.value - half);
    }
    return out;
}

double slow_limit_speed(const FrozenSpeedCurve& curve) { return slow_limit(curve).value; }

double cubic_d0(const TemporalCoefficient& a, const TemporalCoefficient& b,
                std::optional<double> ergodic_horizon) {
    const double am = TimeSignal::from_coefficient(a, ergodic_horizon).mean();
    if (!(am > 0.0)) fail(ErrorKind::domain, "mean of a must be positive");
    const double abm = TimeSignal::product(a, b, ergodic_horizon).mean();
    return std::sqrt(2.0 * am) * (0.5 - abm / am);
}

double cubic_dstar(const TemporalCoefficient& a, const TemporalCoefficient& b,
                   std::optional<double> ergodic_horizon) {
    const auto nl = Nonlinearity::cubic(a, b, ergodic_horizon);
    const auto g = [&](double s) { return std::sqrt(2.0 * a.value(s)) * (0.5 - b.value(s)); };
    if (nl.period()) {
        const double P = *nl.period();
        const auto bps = nl.breakpoints();
        return integrate_piecewise(g, 0.0, P, bps) / P;
    }
    const double H = ergodic_window(nl, ergodic_horizon);
    return integrate_panels(g, 0.0, H, 0.5) / H;
}

double kpp_spreading_speed(double mean_slope) {
    if (!(mean_slope > 0.0)) fail(ErrorKind::not_kpp, "mean slope at u = 0 must be positive");
    return 2.0 * std::sqrt(mean_slope);
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string SpeedReport::speeds_csv() const {
    std::string out = "T,cbar,uncertainty\n";
    for (const auto& e : estimates) {
        out += format_number(e.T) + ',' + format_number(e.cbar) + ',' + format_number(e.uncertainty) + '\n';
    }
    return out;
}

std::string SpeedReport::limits_csv() const {
    const auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    return "c0,cstar,d0,dstar,kpp,rate_rapid,rate_slow\n" + format_number(c0) + ',' + format_number(cstar) +
           ',' + cell(d0) + ',' + cell(dstar) + ',' + cell(kpp) + ',' + cell(rate_rapid) + ',' +
           cell(rate_slow) + '\n';
}

}  // namespace wavespeed

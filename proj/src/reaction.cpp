#include "wavespeed/reaction.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace wavespeed {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) fail(ErrorKind::domain, std::string("non-finite ") + what);
}

double wrap(double t, double period) {
    double r = std::fmod(t, period);
    if (r < 0.0) r += period;
    return r;
}

// Rational approximation p/q of x with q ≤ max_den, or nullopt.
std::optional<long> denominator_of(double x, long max_den) {
    for (long q = 1; q <= max_den; ++q) {
        const double p = std::round(x * static_cast<double>(q));
        if (std::abs(x * static_cast<double>(q) - p) <= 1e-9 * std::max(1.0, p)) return q;
    }
    return std::nullopt;
}

// Common period of two periods, if their ratio is rational with small terms.
std::optional<double> common_period(std::optional<double> p1, std::optional<double> p2) {
    if (!p1 || !p2) return std::nullopt;
    const double lo = std::min(*p1, *p2);
    const double hi = std::max(*p1, *p2);
    const double ratio = hi / lo;
    const auto q = denominator_of(ratio, 64);
    if (!q) return std::nullopt;
    return std::round(ratio * static_cast<double>(*q)) * lo;
}

std::optional<double> period_of_modes(const std::vector<TrigMode>& modes) {
    double fmin = 0.0;
    for (const auto& m : modes) {
        if (m.freq > 0.0 && (fmin == 0.0 || m.freq < fmin)) fmin = m.freq;
    }
    if (fmin == 0.0) return 1.0;
    long lcm = 1;
    for (const auto& m : modes) {
        const auto q = denominator_of(m.freq / fmin, 1000);
        if (!q) return std::nullopt;
        lcm = std::lcm(lcm, *q);
        if (lcm > 100000) return std::nullopt;
    }
    return static_cast<double>(lcm) / fmin;
}

// Merge modes with equal frequency; zero frequency folds into the mean.
std::vector<TrigMode> normalize_modes(std::vector<TrigMode> modes, double& mean) {
    std::vector<TrigMode> out;
    for (auto m : modes) {
        if (m.freq < 0.0) {
            m.freq = -m.freq;
            m.sin_amp = -m.sin_amp;
        }
        if (m.freq < 1e-14) {
            mean += m.cos_amp;
            continue;
        }
        auto it = std::find_if(out.begin(), out.end(), [&](const TrigMode& o) {
            return std::abs(o.freq - m.freq) <= 1e-12 * std::max(1.0, m.freq);
        });
        if (it == out.end()) {
            out.push_back(m);
        } else {
            it->cos_amp += m.cos_amp;
            it->sin_amp += m.sin_amp;
        }
    }
    std::sort(out.begin(), out.end(),
              [](const TrigMode& x, const TrigMode& y) { return x.freq < y.freq; });
    return out;
}

double eval_modes(double mean, const std::vector<TrigMode>& modes, double t) {
    double v = mean;
    for (const auto& m : modes) {
        const double th = two_pi * m.freq * t;
        v += m.cos_amp * std::cos(th) + m.sin_amp * std::sin(th);
    }
    return v;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- coefficient

TemporalCoefficient TemporalCoefficient::constant(double value) {
    require_finite(value, "coefficient value");
    TemporalCoefficient c;
    c.kind_ = CoefficientKind::constant;
    c.mean_ = value;
    c.period_ = 1.0;
    return c;
}

TemporalCoefficient TemporalCoefficient::trig_polynomial(double mean, std::vector<TrigMode> modes) {
    require_finite(mean, "coefficient mean");
    for (const auto& m : modes) {
        require_finite(m.freq, "mode frequency");
        require_finite(m.cos_amp, "mode amplitude");
        require_finite(m.sin_amp, "mode amplitude");
        if (m.freq <= 0.0) fail(ErrorKind::validation, "trig-polynomial frequencies must be positive");
    }
    TemporalCoefficient c;
    c.kind_ = CoefficientKind::trig_polynomial;
    c.mean_ = mean;
    c.modes_ = normalize_modes(std::move(modes), c.mean_);
    c.period_ = period_of_modes(c.modes_);
    if (!c.period_) {
        fail(ErrorKind::validation,
             "trig-polynomial frequencies are not commensurate; declare the coefficient quasi-periodic");
    }
    return c;
}

TemporalCoefficient TemporalCoefficient::quasi_periodic(double mean, std::vector<TrigMode> modes,
                                                        std::vector<double> basis) {
    require_finite(mean, "coefficient mean");
    for (const auto& m : modes) {
        require_finite(m.freq, "mode frequency");
        if (m.freq <= 0.0) fail(ErrorKind::validation, "quasi-periodic frequencies must be positive");
    }
    TemporalCoefficient c;
    c.kind_ = CoefficientKind::quasi_periodic;
    c.mean_ = mean;
    c.modes_ = normalize_modes(std::move(modes), c.mean_);
    c.basis_ = std::move(basis);
    return c;
}

TemporalCoefficient TemporalCoefficient::smoothed_step(std::vector<StepInterval> steps, double width,
                                                       double period) {
    if (steps.empty()) fail(ErrorKind::validation, "smoothed-step needs at least one interval");
    if (!(period > 0.0)) fail(ErrorKind::validation, "smoothed-step period must be positive");
    if (!(width >= 0.0)) fail(ErrorKind::validation, "smoothed-step width must be non-negative");
    std::sort(steps.begin(), steps.end(),
              [](const StepInterval& x, const StepInterval& y) { return x.t0 < y.t0; });
    const double tol = 1e-12 * period;
    if (std::abs(steps.front().t0) > tol || std::abs(steps.back().t1 - period) > tol) {
        fail(ErrorKind::validation, "smoothed-step intervals must tile [0, period]");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        require_finite(steps[i].value, "step value");
        if (!(steps[i].t1 > steps[i].t0)) fail(ErrorKind::validation, "empty smoothed-step interval");
        if (i > 0 && std::abs(steps[i].t0 - steps[i - 1].t1) > tol) {
            fail(ErrorKind::validation, "smoothed-step intervals must be contiguous");
        }
        if (steps.size() > 1 && width >= steps[i].t1 - steps[i].t0) {
            fail(ErrorKind::validation, "smoothing width must be shorter than every interval");
        }
    }
    TemporalCoefficient c;
    c.kind_ = CoefficientKind::smoothed_step;
    c.steps_ = std::move(steps);
    c.width_ = width;
    c.period_ = period;
    double m = 0.0;
    for (const auto& s : c.steps_) m += s.value * (s.t1 - s.t0);
    c.mean_ = m / period;
    return c;
}

double TemporalCoefficient::value(double t) const {
    if (kind_ != CoefficientKind::smoothed_step) return eval_modes(mean_, modes_, t);
    const double P = *period_;
    const double tm = wrap(t, P);
    const std::size_t n = steps_.size();
    double base = steps_.back().value;
    for (const auto& s : steps_) {
        if (tm > s.t0 && tm <= s.t1) {
            base = s.value;
            break;
        }
    }
    if (width_ == 0.0 || n == 1) return base;
    for (std::size_t j = 0; j < n; ++j) {
        const double tj = steps_[j].t0;
        double d = tm - tj;
        if (d > 0.5 * P) d -= P;
        if (d <= -0.5 * P) d += P;
        if (std::abs(d) < 0.5 * width_) {
            const double left = steps_[(j + n - 1) % n].value;
            const double right = steps_[j].value;
            const double x = (d + 0.5 * width_) / width_;
            return left + (right - left) * 0.5 * (1.0 - std::cos(std::numbers::pi * x));
        }
    }
    return base;
}

std::vector<double> TemporalCoefficient::breakpoints() const {
    std::vector<double> out;
    if (kind_ != CoefficientKind::smoothed_step || steps_.size() < 2) return out;
    const double P = *period_;
    for (const auto& s : steps_) {
        if (width_ == 0.0) {
            out.push_back(wrap(s.t0, P));
        } else {
            out.push_back(wrap(s.t0 - 0.5 * width_, P));
            out.push_back(wrap(s.t0 + 0.5 * width_, P));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double TemporalCoefficient::amplitude_bound() const {
    if (kind_ == CoefficientKind::smoothed_step) {
        double m = 0.0;
        for (const auto& s : steps_) m = std::max(m, std::abs(s.value));
        return m;
    }
    double m = std::abs(mean_);
    for (const auto& md : modes_) m += std::abs(md.cos_amp) + std::abs(md.sin_amp);
    return m;
}

double TemporalCoefficient::min_value() const {
    if (kind_ == CoefficientKind::smoothed_step) {
        double m = steps_.front().value;
        for (const auto& s : steps_) m = std::min(m, s.value);
        return m;
    }
    if (kind_ == CoefficientKind::quasi_periodic) {
        double m = mean_;
        for (const auto& md : modes_) m -= std::hypot(md.cos_amp, md.sin_amp);
        return m;
    }
    double m = mean_;
    const int n = 4096;
    for (int k = 0; k < n; ++k) m = std::min(m, value(*period_ * k / n));
    return m;
}

double TemporalCoefficient::max_value() const {
    if (kind_ == CoefficientKind::smoothed_step) {
        double m = steps_.front().value;
        for (const auto& s : steps_) m = std::max(m, s.value);
        return m;
    }
    if (kind_ == CoefficientKind::quasi_periodic) {
        double m = mean_;
        for (const auto& md : modes_) m += std::hypot(md.cos_amp, md.sin_amp);
        return m;
    }
    double m = mean_;
    const int n = 4096;
    for (int k = 0; k < n; ++k) m = std::max(m, value(*period_ * k / n));
    return m;
}

std::string TemporalCoefficient::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case CoefficientKind::constant: os << "constant(" << fmt(mean_) << ")"; break;
        case CoefficientKind::trig_polynomial:
        case CoefficientKind::quasi_periodic:
            os << (kind_ == CoefficientKind::trig_polynomial ? "trig(" : "quasi(") << fmt(mean_);
            for (const auto& m : modes_) {
                os << ";" << fmt(m.freq) << "," << fmt(m.cos_amp) << "," << fmt(m.sin_amp);
            }
            os << ")";
            break;
        case CoefficientKind::smoothed_step:
            os << "step(w=" << fmt(width_) << ",P=" << fmt(*period_);
            for (const auto& s : steps_) os << ";" << fmt(s.t0) << "," << fmt(s.t1) << "," << fmt(s.value);
            os << ")";
            break;
    }
    return os.str();
}

// ---------------------------------------------------------------- time signal

TimeSignal TimeSignal::from_coefficient(const TemporalCoefficient& c,
                                        std::optional<double> ergodic_horizon) {
    TimeSignal s;
    s.period_ = c.period();
    if (c.is_harmonic()) {
        s.harmonic_ = true;
        s.harmonic_mean_ = c.mean();
        s.modes_.assign(c.modes().begin(), c.modes().end());
        const double m = s.harmonic_mean_;
        auto modes = s.modes_;
        s.fn_ = [m, modes](double t) { return eval_modes(m, modes, t); };
    } else {
        s.fn_ = [c](double t) { return c.value(t); };
        s.breakpoints_ = c.breakpoints();
    }
    s.compute_mean(ergodic_horizon);
    if (c.kind() == CoefficientKind::smoothed_step) {
        // Ramps preserve interval means, so the step mean is exact.
        s.mean_ = c.mean();
        s.mean_error_ = 0.0;
    }
    return s;
}

TimeSignal TimeSignal::product(const TemporalCoefficient& a, const TemporalCoefficient& b,
                               std::optional<double> ergodic_horizon) {
    TimeSignal s;
    const bool a_const = a.kind() == CoefficientKind::constant;
    const bool b_const = b.kind() == CoefficientKind::constant;
    if (a_const) s.period_ = b.period();
    else if (b_const) s.period_ = a.period();
    else s.period_ = common_period(a.period(), b.period());

    if (a.is_harmonic() && b.is_harmonic()) {
        s.harmonic_ = true;
        double mean = a.mean() * b.mean();
        std::vector<TrigMode> modes;
        for (const auto& m : a.modes()) modes.push_back({m.freq, b.mean() * m.cos_amp, b.mean() * m.sin_amp});
        for (const auto& m : b.modes()) modes.push_back({m.freq, a.mean() * m.cos_amp, a.mean() * m.sin_amp});
        for (const auto& p : a.modes()) {
            for (const auto& q : b.modes()) {
                const double sum = p.freq + q.freq;
                const double diff = p.freq - q.freq;
                // cos·cos, sin·sin, sin·cos, cos·sin product-to-sum identities
                modes.push_back({sum, 0.5 * (p.cos_amp * q.cos_amp - p.sin_amp * q.sin_amp),
                                 0.5 * (p.sin_amp * q.cos_amp + p.cos_amp * q.sin_amp)});
                modes.push_back({diff, 0.5 * (p.cos_amp * q.cos_amp + p.sin_amp * q.sin_amp),
                                 0.5 * (p.sin_amp * q.cos_amp - p.cos_amp * q.sin_amp)});
            }
        }
        s.modes_ = normalize_modes(std::move(modes), mean);
        s.harmonic_mean_ = mean;
        auto md = s.modes_;
        s.fn_ = [mean, md](double t) { return eval_modes(mean, md, t); };
    } else {
        s.fn_ = [a, b](double t) { return a.value(t) * b.value(t); };
        if (s.period_) {
            auto add = [&](const TemporalCoefficient& c) {
                if (!c.period()) return;
                const double reps = std::round(*s.period_ / *c.period());
                for (double p : c.breakpoints()) {
                    for (int k = 0; k < static_cast<int>(reps); ++k) s.breakpoints_.push_back(p + k * *c.period());
                }
            };
            add(a);
            add(b);
            std::sort(s.breakpoints_.begin(), s.breakpoints_.end());
        }
    }
    s.compute_mean(ergodic_horizon);
    return s;
}

void TimeSignal::compute_mean(std::optional<double> horizon) {
    if (period_) {
        if (harmonic_) {
            mean_ = harmonic_mean_;
        } else {
            mean_ = integrate_piecewise(fn_, 0.0, *period_, breakpoints_) / *period_;
        }
        return;
    }
    if (!horizon) {
        mean_failure_ = "quasi-periodic mean requested without an ergodic horizon";
        return;
    }
    const double H = *horizon;
    double fmax = 1.0;
    for (const auto& m : modes_) fmax = std::max(fmax, m.freq);
    const double panel = 0.25 / fmax;
    const double half = integrate_panels(fn_, 0.0, 0.5 * H, panel);
    const double full = half + integrate_panels(fn_, 0.5 * H, H, panel);
    mean_ = full / H;
    mean_error_ = std::abs(full / H - half / (0.5 * H));
}

double TimeSignal::value(double t) const { return fn_(t); }

double TimeSignal::mean() const {
    if (!mean_) fail(ErrorKind::config, mean_failure_);
    return *mean_;
}

double TimeSignal::integral(double t) const {
    const double m = mean();
    if (harmonic_) {
        double v = (harmonic_mean_ - m) * t;
        for (const auto& md : modes_) {
            const double w = two_pi * md.freq;
            v += md.cos_amp * std::sin(w * t) / w + md.sin_amp * (1.0 - std::cos(w * t)) / w;
        }
        return v;
    }
    if (period_) {
        const double P = *period_;
        const double r = wrap(t, P);
        return integrate_piecewise(fn_, 0.0, r, breakpoints_) - m * r;
    }
    return integrate_panels(fn_, 0.0, t, 0.25) - m * t;
}

double TimeSignal::kernel(double T, double t) const {
    if (!(T > 0.0)) fail(ErrorKind::domain, "kernel rate T must be positive");
    const double m = mean();
    if (harmonic_) {
        double v = (harmonic_mean_ - m) / T;
        for (const auto& md : modes_) {
            const double w = two_pi * md.freq;
            const double c = std::cos(w * t);
            const double s = std::sin(w * t);
            const double den = T * T + w * w;
            v += md.cos_amp * (T * c + w * s) / den + md.sin_amp * (T * s - w * c) / den;
        }
        return v;
    }
    auto integrand = [&](double tau) { return std::exp(-T * (t - tau)) * (fn_(tau) - m); };
    if (period_) {
        const double P = *period_;
        // Periodic reduction: the kernel sum over earlier periods is geometric.
        std::vector<double> bps;
        const double base = t - P;
        const double shift = std::floor(base / P) * P;
        for (int k = 0; k < 2; ++k) {
            for (double p : breakpoints_) bps.push_back(p + shift + k * P);
        }
        std::sort(bps.begin(), bps.end());
        const double one_period = integrate_piecewise(integrand, base, t, bps);
        return one_period / (-std::expm1(-T * P));
    }
    const double depth = std::log(1e12) / T;
    return integrate_panels(integrand, t - depth, t, 0.25);
}

// ---------------------------------------------------------------- nonlinearity

namespace {

double p1(double u) { return u * u * (1.0 - u); }
double p1d(double u) { return 2.0 * u - 3.0 * u * u; }
double p1dd(double u) { return 2.0 - 6.0 * u; }
double p2(double u) { return u * u - u; }
double p2d(double u) { return 2.0 * u - 1.0; }
constexpr double p2dd = 2.0;

}  // namespace

Nonlinearity Nonlinearity::cubic(TemporalCoefficient a, TemporalCoefficient b,
                                 std::optional<double> ergodic_horizon) {
    if (!(a.min_value() > 0.0)) fail(ErrorKind::validation, "coefficient a must stay positive");
    if (!(b.min_value() > 0.0 && b.max_value() < 1.0)) {
        fail(ErrorKind::validation, "coefficient b must stay inside (0, 1)");
    }
    Nonlinearity nl;
    nl.cubic_ = true;
    if (a.kind() == CoefficientKind::constant) nl.period_ = b.period();
    else if (b.kind() == CoefficientKind::constant) nl.period_ = a.period();
    else nl.period_ = common_period(a.period(), b.period());
    nl.horizon_ = ergodic_horizon;
    nl.a_signal_ = TimeSignal::from_coefficient(a, ergodic_horizon);
    nl.ab_signal_ = TimeSignal::product(a, b, ergodic_horizon);
    nl.a_ = std::move(a);
    nl.b_ = std::move(b);
    return nl;
}

Nonlinearity Nonlinearity::general(GeneralReaction g, std::optional<double> ergodic_horizon) {
    if (!g.f || !g.du || !g.duu) fail(ErrorKind::config, "general reaction needs f, du and duu");
    Nonlinearity nl;
    nl.cubic_ = false;
    nl.period_ = g.period;
    nl.horizon_ = ergodic_horizon;
    std::sort(g.breakpoints.begin(), g.breakpoints.end());
    nl.general_ = std::move(g);
    return nl;
}

std::vector<double> Nonlinearity::breakpoints() const {
    if (!cubic_) return general_.breakpoints;
    std::vector<double> out;
    if (!period_) return out;
    for (const auto* c : {&a_, &b_}) {
        if (!c->period()) continue;
        const int reps = static_cast<int>(std::round(*period_ / *c->period()));
        for (double p : c->breakpoints()) {
            for (int k = 0; k < reps; ++k) out.push_back(p + k * *c->period());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double Nonlinearity::f(double t, double u) const {
    if (!cubic_) return general_.f(t, u);
    return a_.value(t) * u * (u - b_.value(t)) * (1.0 - u);
}

double Nonlinearity::du(double t, double u) const {
    if (!cubic_) return general_.du(t, u);
    const double b = b_.value(t);
    return a_.value(t) * (-3.0 * u * u + 2.0 * (1.0 + b) * u - b);
}

double Nonlinearity::duu(double t, double u) const {
    if (!cubic_) return general_.duu(t, u);
    const double b = b_.value(t);
    return a_.value(t) * (-6.0 * u + 2.0 * (1.0 + b));
}

double Nonlinearity::general_mean(const std::function<double(double, double)>& g, double u) const {
    auto h = [&](double t) { return g(t, u); };
    if (period_) return integrate_piecewise(h, 0.0, *period_, general_.breakpoints) / *period_;
    if (!horizon_) fail(ErrorKind::config, "mean of a non-periodic reaction needs an ergodic horizon");
    return integrate_panels(h, 0.0, *horizon_, 0.25) / *horizon_;
}

double Nonlinearity::mean(double u) const {
    if (!cubic_) return general_mean(general_.f, u);
    return a_signal_.mean() * p1(u) + ab_signal_.mean() * p2(u);
}

double Nonlinearity::mean_du(double u) const {
    if (!cubic_) return general_mean(general_.du, u);
    return a_signal_.mean() * p1d(u) + ab_signal_.mean() * p2d(u);
}

double Nonlinearity::mean_duu(double u) const {
    if (!cubic_) return general_mean(general_.duu, u);
    return a_signal_.mean() * p1dd(u) + ab_signal_.mean() * p2dd;
}

Jet Nonlinearity::primitive(double t, double u) const {
    require_finite(t, "time");
    require_finite(u, "state");
    if (!cubic_) return general_primitive(t, u);
    const double ia = a_signal_.integral(t);
    const double iab = ab_signal_.integral(t);
    return {p1(u) * ia + p2(u) * iab, p1d(u) * ia + p2d(u) * iab, p1dd(u) * ia + p2dd * iab};
}

Jet Nonlinearity::smoothed_primitive(double T, double t, double u) const {
    if (!(T > 0.0)) fail(ErrorKind::domain, "smoothing rate T must be positive");
    require_finite(t, "time");
    require_finite(u, "state");
    if (!cubic_) return general_smoothed(T, t, u);
    const double ka = a_signal_.kernel(T, t);
    const double kab = ab_signal_.kernel(T, t);
    return {p1(u) * ka + p2(u) * kab, p1d(u) * ka + p2d(u) * kab, p1dd(u) * ka + p2dd * kab};
}

Jet Nonlinearity::general_primitive(double t, double u) const {
    Jet j;
    const auto& g = general_;
    const std::function<double(double, double)>* parts[3] = {&g.f, &g.du, &g.duu};
    double* outs[3] = {&j.value, &j.du, &j.duu};
    for (int k = 0; k < 3; ++k) {
        const auto& fn = *parts[k];
        const double m = general_mean(fn, u);
        auto h = [&](double tau) { return fn(tau, u); };
        if (period_) {
            const double r = wrap(t, *period_);
            *outs[k] = integrate_piecewise(h, 0.0, r, g.breakpoints) - m * r;
        } else {
            *outs[k] = integrate_panels(h, 0.0, t, 0.25) - m * t;
        }
    }
    return j;
}

Jet Nonlinearity::general_smoothed(double T, double t, double u) const {
    Jet j;
    const auto& g = general_;
    const std::function<double(double, double)>* parts[3] = {&g.f, &g.du, &g.duu};
    double* outs[3] = {&j.value, &j.du, &j.duu};
    for (int k = 0; k < 3; ++k) {
        const auto& fn = *parts[k];
        const double m = general_mean(fn, u);
        auto h = [&](double tau) { return std::exp(-T * (t - tau)) * (fn(tau, u) - m); };
        if (period_) {
            const double P = *period_;
            std::vector<double> bps;
            const double shift = std::floor((t - P) / P) * P;
            for (int r = 0; r < 2; ++r) {
                for (double p : g.breakpoints) bps.push_back(p + shift + r * P);
            }
            std::sort(bps.begin(), bps.end());
            *outs[k] = integrate_piecewise(h, t - P, t, bps) / (-std::expm1(-T * P));
        } else {
            *outs[k] = integrate_panels(h, t - std::log(1e12) / T, t, 0.25);
        }
    }
    return j;
}

ReactionView Nonlinearity::frozen(double s) const {
    if (cubic_) {
        const double a = a_.value(s);
        const double b = b_.value(s);
        return {[a, b](double u) { return a * u * (u - b) * (1.0 - u); },
                [a, b](double u) { return a * (-3.0 * u * u + 2.0 * (1.0 + b) * u - b); },
                [a, b](double u) { return a * (-6.0 * u + 2.0 * (1.0 + b)); }};
    }
    const auto g = general_;
    return {[g, s](double u) { return g.f(s, u); }, [g, s](double u) { return g.du(s, u); },
            [g, s](double u) { return g.duu(s, u); }};
}

ReactionView Nonlinearity::averaged() const {
    if (cubic_) {
        const double am = a_signal_.mean();
        const double abm = ab_signal_.mean();
        return {[am, abm](double u) { return am * p1(u) + abm * p2(u); },
                [am, abm](double u) { return am * p1d(u) + abm * p2d(u); },
                [am, abm](double u) { return am * p1dd(u) + abm * p2dd; }};
    }
    const Nonlinearity self = *this;
    return {[self](double u) { return self.mean(u); }, [self](double u) { return self.mean_du(u); },
            [self](double u) { return self.mean_duu(u); }};
}

std::string Nonlinearity::fingerprint() const {
    if (cubic_) return "cubic[a=" + a_.describe() + ",b=" + b_.describe() + "]";
    return "general[" + general_.label + ",P=" + (period_ ? fmt(*period_) : std::string("none")) + "]";
}

// ---------------------------------------------------------------- operations

double eval_f(const Nonlinearity& nl, double t, double u) {
    require_finite(t, "time");
    require_finite(u, "state");
    return nl.f(t, u);
}

double temporal_mean(const Nonlinearity& nl, double u) {
    require_finite(u, "state");
    return nl.mean(u);
}

double primitive_F(const Nonlinearity& nl, double t, double u) { return nl.primitive(t, u).value; }

double smoothed_primitive_F_T(const Nonlinearity& nl, double T, double t, double u) {
    return nl.smoothed_primitive(T, t, u).value;
}

namespace {

std::vector<double> scan_times(const Nonlinearity& nl, const ScanSpec& scan) {
    std::vector<double> ts(static_cast<std::size_t>(scan.t_samples));
    const double span = nl.period().value_or(scan.window);
    for (int k = 0; k < scan.t_samples; ++k) ts[static_cast<std::size_t>(k)] = span * k / scan.t_samples;
    for (double p : nl.breakpoints()) ts.push_back(p);
    return ts;
}

struct Worst {
    double value = std::numeric_limits<double>::infinity();
    double t = 0.0;
    double u = 0.0;
};

std::string at(double t, double u) {
    std::ostringstream os;
    os << "(t=" << t << ", u=" << u << ")";
    return os.str();
}

// Smallest ratio −f/u near 0 and f/(1−u) near 1 over the δ-band.
Worst band_margin(const Nonlinearity& nl, const std::vector<double>& ts, double delta, int m) {
    Worst w;
    for (double t : ts) {
        for (int j = -m; j <= m; ++j) {
            if (j == 0) continue;
            const double e = delta * j / m;
            const double r0 = -nl.f(t, e) / e;
            if (r0 < w.value) w = {r0, t, e};
            const double u1 = 1.0 + e;
            const double r1 = nl.f(t, u1) / (-e);
            if (r1 < w.value) w = {r1, t, u1};
        }
    }
    return w;
}

// Smallest −∂_u f over the δ-band around both zeros.
Worst slope_margin(const Nonlinearity& nl, const std::vector<double>& ts, double delta, int m) {
    Worst w;
    for (double t : ts) {
        for (int j = -m; j <= m; ++j) {
            const double e = delta * j / m;
            const double s0 = -nl.du(t, e);
            if (s0 < w.value) w = {s0, t, e};
            const double s1 = -nl.du(t, 1.0 + e);
            if (s1 < w.value) w = {s1, t, 1.0 + e};
        }
    }
    return w;
}

}  // namespace

StabilityMargins stability_margins(const Nonlinearity& nl, const ScanSpec& scan) {
    const auto ts = scan_times(nl, scan);
    for (double t : ts) {
        for (double u : {0.0, 1.0}) {
            const double v = nl.f(t, u);
            if (!(std::abs(v) <= scan.zero_tol)) {
                fail(ErrorKind::validation, "f does not vanish at " + at(t, u));
            }
        }
    }
    const int m = std::max(2, scan.u_samples / 2);
    constexpr int levels = 7;  // δ = 1/4 … 1/256
    std::vector<double> deltas;
    for (int k = 0; k < levels; ++k) deltas.push_back(0.25 / std::pow(2.0, k));

    std::vector<Worst> band;
    for (double d : deltas) band.push_back(band_margin(nl, ts, d, m));
    if (!(band.back().value > 0.0)) {
        fail(ErrorKind::validation,
             "stable-zero condition fails at " + at(band.back().t, band.back().u));
    }
    StabilityMargins out;
    const double ref0 = band.back().value;
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (band[k].value > 0.0 && band[k].value >= scan.margin_fraction * ref0) {
            out.delta0 = deltas[k];
            out.gamma0 = band[k].value;
            break;
        }
    }

    std::vector<double> d1;
    for (double d : deltas) {
        if (d <= out.delta0) d1.push_back(d);
    }
    std::vector<Worst> slope;
    for (double d : d1) slope.push_back(slope_margin(nl, ts, d, m));
    const double ref1 = slope_margin(nl, ts, deltas.back(), m).value;
    if (!(ref1 > 0.0)) {
        fail(ErrorKind::validation, "zero is not linearly stable at " + at(slope.back().t, slope.back().u));
    }
    for (std::size_t k = 0; k < d1.size(); ++k) {
        if (slope[k].value > 0.0 && slope[k].value >= scan.margin_fraction * ref1) {
            out.delta1 = d1[k];
            out.gamma1 = std::min(slope[k].value, out.gamma0);
            break;
        }
    }
    if (out.delta1 == 0.0) {
        out.delta1 = d1.back();
        out.gamma1 = std::min(slope.back().value, out.gamma0);
    }

    double k1 = 0.0;
    const int nu = 301;
    for (double t : ts) {
        for (int j = 0; j < nu; ++j) {
            const double u = -1.0 + 3.0 * j / (nu - 1);
            k1 = std::max(k1, std::abs(nl.du(t, u)));
        }
    }
    out.K1 = k1;
    return out;
}

double diophantine_margin(std::span<const double> omega, int cutoff, std::optional<double> alpha) {
    if (omega.empty()) fail(ErrorKind::domain, "frequency vector is empty");
    if (cutoff < 1) fail(ErrorKind::domain, "cutoff must be at least 1");
    const std::size_t n = omega.size();
    const double a = alpha.value_or(static_cast<double>(n));
    std::vector<int> k(n, -cutoff);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        bool zero = true;
        double dot = 0.0;
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            zero = zero && k[i] == 0;
            dot += k[i] * omega[i];
            norm2 += static_cast<double>(k[i]) * k[i];
        }
        if (!zero) best = std::min(best, std::abs(dot) * std::pow(std::sqrt(norm2), a));
        std::size_t i = 0;
        while (i < n && k[i] == cutoff) {
            k[i] = -cutoff;
            ++i;
        }
        if (i == n) break;
        ++k[i];
    }
    return best;
}

}  // namespace wavespeed

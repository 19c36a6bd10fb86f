#include "wavespeed/evolve.hpp"

#include "wavespeed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wavespeed {

Grid1D Grid1D::make(double half_width, double dx) {
    if (!(half_width > 0.0) || !(dx > 0.0)) fail(ErrorKind::domain, "grid needs L > 0 and dx > 0");
    const double cells = 2.0 * half_width / dx;
    const double rounded = std::round(cells);
    if (std::abs(cells - rounded) > 1e-9 * cells || static_cast<long>(rounded) % 2 != 0 || rounded < 4) {
        std::ostringstream msg;
        msg << "2L/dx = " << cells << " must be an even integer of at least 4";
        fail(ErrorKind::domain, msg.str());
    }
    Grid1D g;
    g.half_width = half_width;
    g.dx = dx;
    g.nodes = static_cast<std::size_t>(rounded) + 1;
    return g;
}

ImexStepper::ImexStepper(const Nonlinearity& nl, double T, double dt, const Grid1D& grid, Options opts)
    : nl_(&nl), T_(T), dt_(dt), n_(grid.nodes), opts_(opts) {
    if (!(T > 0.0)) fail(ErrorKind::domain, "T must be positive");
    if (!(dt > 0.0)) fail(ErrorKind::domain, "dt must be positive");
    if (opts.K1 > 0.0 && dt * opts.K1 > 0.5) {
        std::ostringstream msg;
        msg << "dt = " << dt << " breaks the explicit reaction cap dt*K1 <= 0.5 (K1 = " << opts.K1 << ")";
        fail(ErrorKind::domain, msg.str());
    }
    if (T < 1.0 && dt > T / 50.0 * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt = " << dt << " does not resolve the forcing; need dt <= T/50 = " << T / 50.0;
        fail(ErrorKind::domain, msg.str());
    }
    const double rho = dt / (2.0 * grid.dx * grid.dx);
    const double m_off = opts.compact ? 1.0 / 12.0 : 0.0;
    const double m_diag = opts.compact ? 10.0 / 12.0 : 1.0;
    lhs_off_ = m_off - rho;
    const double lhs_diag = m_diag + 2.0 * rho;
    rhs_off_ = m_off + rho;
    rhs_diag_ = m_diag - 2.0 * rho;

    const std::size_t m = n_ - 2;
    sup_.assign(m, 0.0);
    inv_.assign(m, 0.0);
    double prev_sup = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double pivot = lhs_diag - (k > 0 ? lhs_off_ * prev_sup : 0.0);
        inv_[k] = 1.0 / pivot;
        sup_[k] = lhs_off_ * inv_[k];
        prev_sup = sup_[k];
    }
    rhs_.assign(m, 0.0);
}

void ImexStepper::react(std::vector<double>& u, double t0, double h) const {
    // explicit midpoint rule; f is read at the rescaled time t/T
    const double s0 = t0 / T_;
    const double s1 = (t0 + 0.5 * h) / T_;
    if (nl_->is_cubic()) {
        const double a0 = nl_->a().value(s0), b0 = nl_->b().value(s0);
        const double a1 = nl_->a().value(s1), b1 = nl_->b().value(s1);
        for (std::size_t i = 1; i + 1 < n_; ++i) {
            const double v = u[i];
            const double k1 = a0 * v * (v - b0) * (1.0 - v);
            const double w = v + 0.5 * h * k1;
            u[i] = v + h * a1 * w * (w - b1) * (1.0 - w);
        }
        return;
    }
    for (std::size_t i = 1; i + 1 < n_; ++i) {
        const double v = u[i];
        const double w = v + 0.5 * h * nl_->f(s0, v);
        u[i] = v + h * nl_->f(s1, w);
    }
}

void ImexStepper::diffuse(std::vector<double>& u) const {
    const std::size_t m = n_ - 2;
    const double left = u[0];
    const double right = u[n_ - 1];
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1;
        rhs_[k] = rhs_off_ * (u[i - 1] + u[i + 1]) + rhs_diag_ * u[i];
    }
    rhs_[0] -= lhs_off_ * left;
    rhs_[m - 1] -= lhs_off_ * right;
    // forward elimination then back substitution
    rhs_[0] *= inv_[0];
    for (std::size_t k = 1; k < m; ++k) rhs_[k] = (rhs_[k] - lhs_off_ * rhs_[k - 1]) * inv_[k];
    for (std::size_t k = m - 1; k-- > 0;) rhs_[k] -= sup_[k] * rhs_[k + 1];
    for (std::size_t k = 0; k < m; ++k) u[k + 1] = rhs_[k];
}

void ImexStepper::step(State& s) const {
    if (s.u.size() != n_) fail(ErrorKind::domain, "state size does not match the stepper grid");
    const double h = 0.5 * dt_;
    react(s.u, s.time, h);
    diffuse(s.u);
    react(s.u, s.time + h, h);
    s.time += dt_;
    const double tol = 10.0 * std::numeric_limits<double>::epsilon();
    const double lo = -opts_.corridor - tol;
    const double hi = 1.0 + opts_.corridor + tol;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!(s.u[i] >= lo && s.u[i] <= hi)) {
            std::ostringstream msg;
            msg << "value " << s.u[i] << " at x = " << s.grid.x(i) << ", t = " << s.time
                << " left the corridor [" << -opts_.corridor << ", " << 1.0 + opts_.corridor
                << "]; use a smaller dt";
            fail(ErrorKind::instability, msg.str());
        }
    }
}

State step_imex(const State& state, const Nonlinearity& nl, double T, double dt) {
    ImexStepper stepper(nl, T, dt, state.grid, {});
    State out = state;
    stepper.step(out);
    return out;
}

double level_position(const State& state, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::domain, "level must lie in (0,1)");
    const auto& u = state.u;
    std::size_t crossings = 0;
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const bool down = u[i] >= alpha && u[i + 1] < alpha;
        const bool up = u[i] < alpha && u[i + 1] >= alpha;
        if (down || up) {
            ++crossings;
            at = i;
        }
    }
    if (crossings != 1) {
        std::ostringstream msg;
        msg << "level " << alpha << " is crossed " << crossings << " times";
        fail(ErrorKind::front_shape, msg.str());
    }
    const double frac = (u[at] - alpha) / (u[at] - u[at + 1]);
    return state.grid.x(at) + frac * state.grid.dx;
}

namespace {

struct LineFit {
    double slope;
    double stderr_slope;
};

LineFit least_squares(const std::vector<double>& t, const std::vector<double>& x, std::size_t lo,
                      std::size_t hi) {
    const auto n = static_cast<double>(hi - lo);
    double tm = 0.0, xm = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        tm += t[i];
        xm += x[i];
    }
    tm /= n;
    xm /= n;
    double stt = 0.0, stx = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        stx += (t[i] - tm) * (x[i] - xm);
    }
    const double slope = stx / stt;
    double rss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
        const double r = x[i] - xm - slope * (t[i] - tm);
        rss += r * r;
    }
    const double se = n > 2 ? std::sqrt(rss / (n - 2.0) / stt) : 0.0;
    return {slope, se};
}

}  // namespace

std::pair<double, double> average_speed(const FrontTrace& trace) {
    std::vector<double> t, x;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        if (trace.times[i] + 1e-12 < trace.burn_in) continue;
        t.push_back(trace.times[i]);
        x.push_back(trace.positions[i]);
    }
    if (t.size() < 100) {
        std::ostringstream msg;
        msg << "average speed needs at least 100 samples after burn-in, got " << t.size();
        fail(ErrorKind::insufficient_data, msg.str());
    }
    if (trace.wobble_period && t.size() > 1) {
        const double interval = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
        const auto m = static_cast<std::size_t>(std::llround(*trace.wobble_period / interval));
        if (m > 1 && t.size() >= m + 100) {
            std::vector<double> ts, xs;
            double sx = 0.0, st = 0.0;
            for (std::size_t i = 0; i < t.size(); ++i) {
                sx += x[i];
                st += t[i];
                if (i >= m) {
                    sx -= x[i - m];
                    st -= t[i - m];
                }
                if (i + 1 >= m) {
                    ts.push_back(st / static_cast<double>(m));
                    xs.push_back(sx / static_cast<double>(m));
                }
            }
            t = std::move(ts);
            x = std::move(xs);
        }
    }
    const std::size_t n = t.size();
    const LineFit all = least_squares(t, x, 0, n);
    const LineFit first = least_squares(t, x, 0, n / 2);
    const LineFit second = least_squares(t, x, n / 2, n);
    return {all.slope,
            0.5 * std::abs(first.slope - second.slope) + all.stderr_slope + trace.roundoff_floor};
}

FrontTrace run_cauchy(const Nonlinearity& nl, double T, const InitialData& initial, double horizon,
                      const CauchyOptions& opts) {
    if (!(T > 0.0)) fail(ErrorKind::domain, "T must be positive");
    if (!(horizon > 0.0)) fail(ErrorKind::domain, "horizon must be positive");
    if (!(opts.sample_interval > 0.0)) fail(ErrorKind::domain, "sample interval must be positive");
    const Grid1D grid = Grid1D::make(opts.half_width, opts.dx);
    const StabilityMargins margins = opts.margins ? *opts.margins : stability_margins(nl);

    State state;
    state.grid = grid;
    state.u.resize(grid.nodes);
    if (const auto* profile = std::get_if<WaveProfile>(&initial)) {
        for (std::size_t i = 0; i < grid.nodes; ++i) state.u[i] = profile->value(grid.x(i));
    } else {
        const auto& data = std::get<std::vector<double>>(initial);
        if (data.size() != grid.nodes) fail(ErrorKind::domain, "initial data size does not match the grid");
        state.u = data;
    }
    state.u.front() = 1.0;
    state.u.back() = 0.0;

    FrontTrace trace;
    trace.level = opts.level;
    trace.burn_in = opts.burn_in < 0.0 ? 0.25 * horizon : opts.burn_in;

    // Sampling interval: a whole fraction of the forcing period so that the
    // moving average spans exactly one period.
    double interval = opts.sample_interval;
    if (opts.smooth_wobble && nl.period()) {
        const double wobble = T * *nl.period();
        const double m = std::max(1.0, std::ceil(wobble / opts.sample_interval - 1e-9));
        interval = wobble / m;
        trace.wobble_period = wobble;
    }
    const double dt_target = opts.dt > 0.0 ? opts.dt : std::min(2e-3, T / 50.0);
    const auto substeps = static_cast<long>(std::ceil(interval / dt_target - 1e-9));
    const double dt = interval / static_cast<double>(substeps);
    const auto samples = static_cast<long>(std::floor(horizon / interval + 1e-9));

    ImexStepper::Options so;
    so.corridor = margins.delta0;
    so.compact = opts.compact;
    so.K1 = margins.K1;
    const ImexStepper stepper(nl, T, dt, grid, so);

    auto record = [&](double t) {
        double X;
        try {
            X = level_position(state, opts.level);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::front_shape) throw;
            std::ostringstream msg;
            msg << "front lost at t = " << t << ": " << e.what();
            fail(ErrorKind::tracking, msg.str());
        }
        trace.times.push_back(t);
        trace.positions.push_back(X);
        const double centre = state.grid.offset();
        const double L = grid.half_width;
        if (std::abs(X - centre) > 0.75 * L) {
            std::ostringstream msg;
            msg << "front at " << X << " left the window around " << centre << " at t = " << t;
            fail(ErrorKind::tracking, msg.str());
        }
        if (std::abs(X - centre) > 0.25 * L) {
            // move the window by whole cells and pad with the limit states
            const long k = std::lround((X - centre) / grid.dx);
            const auto n = static_cast<long>(grid.nodes);
            std::vector<double> shifted(grid.nodes);
            for (long i = 0; i < n; ++i) {
                const long j = i + k;
                shifted[static_cast<std::size_t>(i)] =
                    j < 0 ? 1.0 : (j >= n ? 0.0 : state.u[static_cast<std::size_t>(j)]);
            }
            state.u = std::move(shifted);
            state.grid.shift += k;
        }
        if (opts.observer) opts.observer(state);
    };

    record(0.0);
    for (long k = 1; k <= samples; ++k) {
        for (long j = 0; j < substeps; ++j) stepper.step(state);
        state.time = static_cast<double>(k) * interval;
        record(state.time);
    }
    {
        const double X = level_position(state, opts.level);
        const auto i = static_cast<std::size_t>(std::floor((X - state.grid.x(0)) / grid.dx));
        const std::size_t j = std::min(i, grid.nodes - 2);
        const double gradient = std::abs(state.u[j] - state.u[j + 1]) / grid.dx;
        trace.roundoff_floor = std::numeric_limits<double>::epsilon() / (gradient * dt);
    }
    if (opts.fit_speed) {
        const auto [speed, unc] = average_speed(trace);
        trace.speed = speed;
        trace.uncertainty = unc;
    }
    return trace;
}

std::string trace_csv(const FrontTrace& trace) {
    std::string out = "time,level,position\n";
    char buf[96];
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.6g,%.17g\n", trace.times[i], trace.level, trace.positions[i]);
        out += buf;
    }
    return out;
}

}  // namespace wavespeed

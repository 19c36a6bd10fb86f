#include "wavespeed/harness.hpp"

#include "wavespeed/outputs.hpp"
#include "wavespeed/parallel.hpp"
#include "wavespeed/supersub.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <random>
#include <sstream>

namespace wavespeed {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void capture(StageRecord& s, const std::function<void()>& fn) {
    const auto t0 = Clock::now();
    try {
        fn();
    } catch (const Error& e) {
        s.error = e.kind();
        s.message = e.what();
    } catch (const std::exception& e) {
        s.error = ErrorKind::numeric;
        s.message = e.what();
    }
    s.seconds = seconds_since(t0);
}

bool stage(RunRecord& r, const std::string& name, const std::function<void()>& fn) {
    StageRecord s;
    s.name = name;
    capture(s, fn);
    r.stages.push_back(s);
    return s.ok();
}

void check(RunRecord& r, const std::string& name, double value, double threshold, std::string detail = {}) {
    r.checks.push_back({name, value >= threshold, value, threshold, std::move(detail)});
}

CauchyOptions cauchy_options(const ExperimentConfig& c, double T, const std::optional<StabilityMargins>& m) {
    CauchyOptions o;
    if (c.solver.dx) o.dx = *c.solver.dx;
    if (c.solver.dt) o.dt = *c.solver.dt;
    if (c.solver.half_width) o.half_width = *c.solver.half_width;
    o.burn_in = c.solver.burn_in * c.horizon(T);
    o.sample_interval = c.solver.sample_interval;
    o.margins = m;
    return o;
}

void compute_limits(RunRecord& r, const Nonlinearity& nl) {
    const auto& c = r.config;
    stage(r, "homogenized speed", [&] {
        r.report.c0 = homogenized_speed(nl);
        r.has_c0 = true;
    });
    stage(r, "frozen speed curve", [&] {
        CurveOptions o;
        o.jobs = c.jobs;
        r.curve = frozen_speed_curve(nl, c.resolution, o);
        const auto sl = slow_limit(*r.curve);
        r.report.cstar = sl.value;
        r.cstar_error = sl.error;
        r.has_cstar = true;
    });
    stage(r, "closed-form limits", [&] {
        r.report.d0 = cubic_d0(c.a, c.b, c.ergodic_horizon);
        r.report.dstar = cubic_dstar(c.a, c.b, c.ergodic_horizon);
    });
}

void run_sweep(RunRecord& r, const Nonlinearity& nl, const std::optional<StabilityMargins>& margins) {
    const auto& c = r.config;
    std::optional<WaveProfile> initial;
    if (!stage(r, "initial profile", [&] { initial = solve_frozen_wave(nl.frozen(0.0)); })) return;
    const std::size_t n = c.T.size();
    std::vector<StageRecord> stages(n);
    std::vector<std::optional<FrontTrace>> traces(n);
    parallel_for(n, c.jobs, [&](std::size_t i) {
        const double T = c.T[i];
        stages[i].name = "cauchy T=" + format_number(T);
        capture(stages[i], [&] {
            const double horizon = c.horizon(T);
            traces[i] = run_cauchy(nl, T, *initial, horizon, cauchy_options(c, T, margins));
        });
    });
    for (std::size_t i = 0; i < n; ++i) {
        r.stages.push_back(stages[i]);
        if (!traces[i]) continue;
        r.report.estimates.push_back({c.T[i], traces[i]->speed, traces[i]->uncertainty});
        r.traces.push_back(std::move(*traces[i]));
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Endpoint deviations against 5× the median deviation of the interior grid.
void coherence(RunRecord& r) {
    const auto& e = r.report.estimates;
    if (e.size() < 3 || !r.has_c0 || !r.has_cstar) return;
    std::vector<double> mid0, mids;
    for (std::size_t i = 1; i + 1 < e.size(); ++i) {
        mid0.push_back(std::abs(e[i].cbar - r.report.c0));
        mids.push_back(std::abs(e[i].cbar - r.report.cstar));
    }
    const double lo = std::abs(e.front().cbar - r.report.c0);
    const double hi = std::abs(e.back().cbar - r.report.cstar);
    r.checks.push_back({"rapid endpoint within 5x interior deviation from c0", lo <= 5 * median(mid0), lo,
                        5 * median(mid0), "passes when value <= threshold"});
    r.checks.push_back({"slow endpoint within 5x interior deviation from c*", hi <= 5 * median(mids), hi,
                        5 * median(mids), "passes when value <= threshold"});
}

void fit_stage(RunRecord& r, bool rapid) {
    stage(r, rapid ? "rapid rate fit" : "slow rate fit", [&] {
        if (rapid ? !r.has_c0 : !r.has_cstar) fail(ErrorKind::insufficient_data, "limit speed unavailable");
        std::vector<RatePoint> pts;
        for (const auto& e : r.report.estimates) {
            if (rapid) {
                pts.push_back({e.T, std::abs(e.cbar - r.report.c0), e.uncertainty});
            } else {
                pts.push_back({1.0 / e.T, std::abs(e.cbar - r.report.cstar), e.uncertainty + r.cstar_error});
            }
        }
        r.rate = fit_rate(pts);
        (rapid ? r.report.rate_rapid : r.report.rate_slow) = r.rate->exponent;
    });
}

void sign_checks(RunRecord& r) {
    const auto& rep = r.report;
    if (rep.d0 && rep.dstar) {
        const double product = *rep.d0 * *rep.dstar;
        r.checks.push_back({"limits d0 and d* have opposite signs", product < 0.0, product, 0.0,
                            "passes when value < threshold"});
    }
    if (rep.estimates.size() < 2) return;
    const auto side = [&](const SpeedEstimate& e, std::optional<double> limit, const char* label) {
        const double ratio = std::abs(e.cbar) / e.uncertainty;
        const bool same = limit && (e.cbar > 0.0) == (*limit > 0.0);
        std::ostringstream name;
        name << "sign at T=" << format_number(e.T) << " matches " << label << " with |c|/u > 3";
        r.checks.push_back({name.str(), same && ratio > 3.0, ratio, 3.0,
                            std::string("estimate ") + format_number(e.cbar)});
    };
    side(rep.estimates.front(), rep.d0, "d0");
    side(rep.estimates.back(), rep.dstar, "d*");
}

ResidualSpec residual_spec(const ExperimentConfig& c, double t1, double halfspan, std::function<double(double)> centre,
                           std::mt19937_64& rng) {
    ResidualSpec s;
    s.t0 = 0.0;
    s.t1 = t1;
    s.nt = c.lemma.residual_nt;
    s.nx = c.lemma.residual_nx;
    const double hx = 2 * halfspan / (s.nx - 1);
    const double jitter = std::uniform_real_distribution<double>(-0.5, 0.5)(rng) * hx;
    s.x0 = -halfspan + jitter;
    s.x1 = halfspan + jitter;
    s.centre = std::move(centre);
    s.jobs = c.jobs;
    return s;
}

void residual_pair(RunRecord& r, const std::string& label, const Nonlinearity& nl, double T,
                   const std::function<double(double, double, Side)>& v, const std::vector<ResidualSpec>& specs_super,
                   const std::vector<ResidualSpec>& specs_sub) {
    stage(r, label + " residual", [&] {
        for (Side side : {Side::super, Side::sub}) {
            const auto& specs = side == Side::super ? specs_super : specs_sub;
            ResidualResult worst{std::numeric_limits<double>::infinity(), 0.0, 0.0};
            for (const auto& spec : specs) {
                const auto res = residual_check([&](double t, double x) { return v(t, x, side); }, nl, T, spec, side);
                if (res.min_residual < worst.min_residual) worst = res;
            }
            std::ostringstream d;
            d << "T=" << format_number(T) << " at t=" << format_number(worst.t) << " x=" << format_number(worst.x);
            check(r, label + " " + to_string(side) + "-solution residual", worst.min_residual, -r.config.lemma.tolerance,
                  d.str());
        }
    });
}

void sandwich_stage(RunRecord& r, const std::string& label, const Nonlinearity& nl, double T, InitialData initial,
                    double horizon, const StabilityMargins& m, const std::function<double(double, double, Side)>& v) {
    const auto& l = r.config.lemma;
    if (!l.sandwich) return;
    stage(r, label + " sandwich", [&] {
        const Comparison super{[&](double t, double x) { return v(t, x, Side::super); }, nl.fingerprint(), T};
        const Comparison sub{[&](double t, double x) { return v(t, x, Side::sub); }, nl.fingerprint(), T};
        EvolveRun run{&nl, T, std::move(initial), horizon, {}};
        run.options.half_width = l.sandwich_half_width;
        run.options.dx = l.sandwich_dx;
        run.options.margins = m;
        run.options.burn_in = 0.0;
        const auto res = sandwich_check(run, super, sub, l.tolerance, 1, l.time_stride);
        std::ostringstream d;
        d << "T=" << format_number(T) << " horizon=" << format_number(horizon) << " samples=" << res.samples
          << " worst at t=" << format_number(res.t) << " x=" << format_number(res.x);
        check(r, label + " sandwich worst gap", res.worst_gap, -l.tolerance, d.str());
    });
}

void run_lemmas(RunRecord& r, const Nonlinearity& nl) {
    const auto& c = r.config;
    const auto& l = c.lemma;
    std::mt19937_64 rng(c.seed);
    StabilityMargins m;
    if (!stage(r, "stability margins", [&] { m = stability_margins(nl); })) return;

    if (l.wants("rapid") || l.wants("smoothed")) {
        std::optional<WaveProfile> phi0;
        std::optional<RapidAggregates> agg;
        stage(r, "rapid aggregates", [&] {
            phi0 = homogenized_wave(nl);
            r.report.c0 = phi0->speed;
            r.has_c0 = true;
            agg = rapid_aggregates(nl, *phi0, m, l.eps1_fraction * m.delta1);
        });
        const auto run_part = [&](const std::string& label, const RapidSchedule& s) {
            const auto F = schedule_primitive(nl, s);
            const auto v = [&, F](double t, double x, Side side) { return rapid_supersub_eval(s, *phi0, F, t, x, side); };
            const double span = s.C1 + l.residual_margin;
            std::vector<ResidualSpec> sup, sub;
            for (Side side : {Side::super, Side::sub}) {
                const double sg = side == Side::super ? 1.0 : -1.0;
                auto centre = [s, sg](double t) { return s.c0 * t - sg * s.eta(t); };
                (side == Side::super ? sup : sub).push_back(residual_spec(c, l.rapid_horizon, span, centre, rng));
            }
            residual_pair(r, label, nl, s.T, v, sup, sub);
            sandwich_stage(r, label, nl, s.T, *phi0, l.rapid_horizon, m, v);
        };
        if (agg && l.wants("rapid")) {
            std::optional<RapidSchedule> s;
            if (stage(r, "rapid schedule", [&] { s = rapid_schedule(agg->T1 / l.rapid_divisor, m, *agg, phi0->speed); })) {
                run_part("rapid", *s);
            }
        }
        if (agg && l.wants("smoothed")) {
            std::optional<RapidSchedule> s;
            if (stage(r, "smoothed schedule", [&] {
                    const double T = smoothed_threshold(nl, *phi0, *agg) / l.rapid_divisor;
                    s = smoothed_rapid_schedule(T, m, *agg, phi0->speed, smoothed_load(nl, *phi0, *agg, T));
                })) {
                run_part("smoothed", *s);
            }
        }
    }

    if (l.wants("slow")) {
        std::shared_ptr<const FrozenSpeedCurve> curve;
        std::optional<SlowSchedule> s;
        double C1 = 0.0;
        const bool ok = stage(r, "slow schedule", [&] {
            CurveOptions o;
            o.jobs = c.jobs;
            o.keep_profiles = true;
            curve = std::make_shared<const FrozenSpeedCurve>(frozen_speed_curve(nl, c.resolution, o));
            r.report.cstar = slow_limit_speed(*curve);
            r.has_cstar = true;
            const auto agg = slow_aggregates(*curve, m, l.eps2_fraction * m.delta1);
            C1 = agg.C1;
            r.checks.push_back({"slow zone floor at least 2 eps2", agg.zone_ok, agg.zone_floor, 2 * agg.eps2,
                                "min of phi and 1 - phi over the middle zone", true});
            const double T = agg.T2 > 0.0 ? l.slow_multiplier * agg.T2 : l.slow_multiplier;
            s = slow_schedule(T, agg, curve);
        });
        if (ok) {
            const auto& sc = *s;
            const auto v = [&sc](double t, double x, Side side) { return slow_supersub_eval(sc, t, x, side); };
            const double span = C1 + l.residual_margin;
            std::vector<ResidualSpec> sup, sub;
            for (Side side : {Side::super, Side::sub}) {
                const double sg = side == Side::super ? 1.0 : -1.0;
                auto centre = [&sc, sg](double t) { return sc.X(t) - sg * sc.kappa(t); };
                auto& dst = side == Side::super ? sup : sub;
                dst.push_back(residual_spec(c, std::min(20.0, l.slow_periods * sc.T), span, centre, rng));
                dst.push_back(residual_spec(c, l.slow_periods * sc.T, span, centre, rng));
            }
            residual_pair(r, "slow", nl, sc.T, v, sup, sub);
            sandwich_stage(r, "slow", nl, sc.T, curve->profiles.front(), l.slow_periods * sc.T, m, v);
        }
    }
}

}  // namespace

RateFit fit_rate(const std::vector<RatePoint>& points) {
    RateFit fit;
    for (const auto& p : points) {
        const bool usable = p.scale > 0.0 && p.deviation > p.noise && p.deviation > 0.0 && std::isfinite(p.deviation);
        (usable ? fit.used : fit.dropped).push_back(p);
    }
    if (fit.used.size() < 3) {
        fail(ErrorKind::insufficient_data,
             std::to_string(fit.used.size()) + " points above the noise floor; widen the T range or refine the solver");
    }
    const double n = static_cast<double>(fit.used.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : fit.used) {
        mx += std::log(p.scale);
        my += std::log(p.deviation);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : fit.used) {
        const double dx = std::log(p.scale) - mx, dy = std::log(p.deviation) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) fail(ErrorKind::insufficient_data, "rate points share one scale");
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

bool RunRecord::ok() const {
    return std::all_of(stages.begin(), stages.end(), [](const StageRecord& s) { return s.ok(); });
}

int RunRecord::exit_code() const {
    for (const auto& s : stages) {
        if (s.error) return exit_code_for(*s.error);
    }
    return 0;
}

std::string RunRecord::summary() const {
    std::ostringstream out;
    out << "experiment " << to_string(config.kind) << " digest " << config_digest.substr(0, 16) << '\n';
    for (const auto& s : stages) {
        out << "stage " << s.name << ": " << (s.ok() ? "ok" : to_string(*s.error)) << " ("
            << format_number(s.seconds) << " s)";
        if (!s.ok()) out << ' ' << s.message;
        out << '\n';
    }
    if (has_c0) out << "c0 = " << format_number(report.c0) << '\n';
    if (has_cstar) out << "c* = " << format_number(report.cstar) << '\n';
    if (report.d0) out << "d0 = " << format_number(*report.d0) << '\n';
    if (report.dstar) out << "d* = " << format_number(*report.dstar) << '\n';
    for (const auto& e : report.estimates) {
        out << "T = " << format_number(e.T) << ": cbar = " << format_number(e.cbar) << " +- "
            << format_number(e.uncertainty) << '\n';
    }
    if (rate) {
        out << "rate exponent " << format_number(rate->exponent) << " r2 " << format_number(rate->r2) << " ("
            << rate->used.size() << " points, " << rate->dropped.size() << " dropped)\n";
    }
    for (const auto& c : checks) {
        out << (c.passed ? "PASS " : c.informational ? "NOTE " : "FAIL ") << c.name << ": " << format_number(c.value) << " vs "
            << format_number(c.threshold);
        if (!c.detail.empty()) out << " [" << c.detail << ']';
        out << '\n';
    }
    return out.str();
}

RunRecord run_experiment(const ExperimentConfig& config) {
    validate(config);
    RunRecord r;
    r.config = config;
    r.config_digest = sha256_hex(config.canonical());
    std::optional<Nonlinearity> nl;
    if (!stage(r, "nonlinearity", [&] { nl = config.nonlinearity(); })) return r;

    switch (config.kind) {
        case ExperimentKind::lemma_check:
            run_lemmas(r, *nl);
            break;
        case ExperimentKind::frozen_curve:
            stage(r, "frozen speed curve", [&] {
                CurveOptions o;
                o.jobs = config.jobs;
                r.curve = frozen_speed_curve(*nl, config.resolution, o);
                const auto sl = slow_limit(*r.curve);
                r.report.cstar = sl.value;
                r.cstar_error = sl.error;
                r.has_cstar = true;
            });
            break;
        default: {
            compute_limits(r, *nl);
            std::optional<StabilityMargins> margins;
            stage(r, "stability margins", [&] { margins = stability_margins(*nl); });
            run_sweep(r, *nl, margins);
            if (config.kind == ExperimentKind::rapid_rate || config.kind == ExperimentKind::slow_rate) {
                fit_stage(r, config.kind == ExperimentKind::rapid_rate);
                coherence(r);
            }
            if (config.kind == ExperimentKind::sign_reversal) sign_checks(r);
            break;
        }
    }
    return r;
}

}  // namespace wavespeed

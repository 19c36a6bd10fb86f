#include "doctest.h"
#include "support.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/limits.hpp"

#include <cmath>
#include <numbers>

using namespace wavespeed;
using testing_support::Gen;
using testing_support::simpson;

namespace {

constexpr double pi = std::numbers::pi;

Nonlinearity step_reaction(double width) {
    return Nonlinearity::cubic(testing_support::sign_reversal_a(width), testing_support::sign_reversal_b());
}

/// √(2a)(1/2 − b) integrated interval by interval with Simpson, then averaged.
double dstar_oracle(const TemporalCoefficient& a, const TemporalCoefficient& b, std::vector<double> cuts) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k];
        const double hi = cuts[k + 1];
        // Stay strictly inside so step values come from this interval.
        const double e = 1e-15;
        total += simpson([&](double s) { return std::sqrt(2 * a.value(s)) * (0.5 - b.value(s)); }, lo + e,
                         hi - e, 4000);
    }
    return total / (cuts.back() - cuts.front());
}

TemporalCoefficient random_trig(Gen& g, double mean, double amp) {
    std::vector<TrigMode> modes;
    const int n = g.integer(1, 3);
    double budget = amp;
    for (int k = 1; k <= n; ++k) {
        const double c = g.uniform(-1, 1) * budget / n;
        const double s = g.uniform(-1, 1) * budget / n;
        modes.push_back({static_cast<double>(k), c, s});
    }
    return TemporalCoefficient::trig_polynomial(mean, modes);
}

CurveOptions with_jobs(unsigned jobs, bool keep_profiles = false) {
    CurveOptions o;
    o.jobs = jobs;
    o.keep_profiles = keep_profiles;
    return o;
}

}  // namespace

TEST_CASE("step coefficient limits d0 and d*") {
    const auto a = testing_support::sign_reversal_a(0.0);
    const auto b = testing_support::sign_reversal_b();
    CHECK(TimeSignal::from_coefficient(a, std::nullopt).mean() == doctest::Approx(145.0 / 36).epsilon(1e-14));
    CHECK(TimeSignal::product(a, b, std::nullopt).mean() ==
          doctest::Approx(145.0 / 72 + 1 / (72 * pi)).epsilon(1e-14));

    const double d0 = cubic_d0(a, b);
    CHECK(std::abs(d0 - (-1 / (6 * std::sqrt(290.0) * pi))) <= 1e-9);
    const double ds = cubic_dstar(a, b);
    CHECK(std::abs(ds - std::sqrt(2.0) / (24 * pi)) <= 1e-9);
    CHECK(std::abs(ds - dstar_oracle(a, b, {0, 0.25, 0.5, 1})) <= 1e-10);
}

TEST_CASE("smoothed step limits stay close to the exact-step values") {
    const auto nl = step_reaction(0.02);
    const double d0_exact = -1 / (6 * std::sqrt(290.0) * pi);
    const double ds_exact = std::sqrt(2.0) / (24 * pi);

    const double c0 = homogenized_speed(nl);
    CHECK(std::abs(c0 - d0_exact) <= 1e-3);
    // The averaged cubic is again a cubic, so shooting must reproduce d0.
    CHECK(std::abs(c0 - cubic_d0(nl.a(), nl.b())) <= 1e-8);

    const auto curve = frozen_speed_curve(nl, 256, with_jobs(4));
    const double cs = slow_limit_speed(curve);
    CHECK(std::abs(cs - ds_exact) <= 1e-3);
    const double ds_smooth = cubic_dstar(nl.a(), nl.b());
    CHECK(std::abs(cs - ds_smooth) <= 2e-5);
    CHECK(slow_limit(curve).error == 0.0);

    // Every frozen speed is the closed-form cubic speed at that s.
    double worst = 0.0;
    for (std::size_t i = 0; i < curve.s.size(); ++i) {
        const double s = curve.s[i];
        const double exact = std::sqrt(2 * nl.a().value(s)) * (0.5 - nl.b().value(s));
        worst = std::max(worst, std::abs(curve.speeds[i] - exact));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("exact step curve keeps both one-sided limits at each jump") {
    const auto nl = step_reaction(0.0);
    const auto curve = frozen_speed_curve(nl, 64, with_jobs(4));
    int jumps = 0;
    for (std::size_t i = 0; i + 1 < curve.s.size(); ++i) {
        if (curve.s[i + 1] == curve.s[i]) ++jumps;
    }
    CHECK(jumps == 2);
    CHECK(std::abs(slow_limit_speed(curve) - std::sqrt(2.0) / (24 * pi)) <= 1e-4);
}

TEST_CASE("constant coefficients") {
    const auto nl = testing_support::cubic_const(1.0, 0.3);
    const double exact = 0.2 * std::sqrt(2.0);
    CHECK(std::abs(homogenized_speed(nl) - exact) <= 1e-8);
    CHECK(std::abs(cubic_d0(nl.a(), nl.b()) - exact) <= 1e-12);
    CHECK(std::abs(cubic_dstar(nl.a(), nl.b()) - exact) <= 1e-12);
}

TEST_CASE("sine-modulated threshold") {
    const auto nl = testing_support::cubic_sine_b(0.25);
    CHECK(std::abs(homogenized_speed(nl)) <= 1e-10);
    const auto curve = frozen_speed_curve(nl, 64, with_jobs(4));
    double worst = 0.0;
    for (std::size_t i = 0; i < curve.s.size(); ++i) {
        const double exact = -std::sqrt(2.0) / 4 * std::sin(2 * pi * curve.s[i]);
        worst = std::max(worst, std::abs(curve.speeds[i] - exact));
    }
    CHECK(worst <= 1e-6);
    CHECK(std::abs(slow_limit_speed(curve)) <= 1e-8);
    CHECK(curve.lipschitz == doctest::Approx(std::sqrt(2.0) / 4 * 2 * pi).epsilon(0.01));
    CHECK(curve.lipschitz <= std::sqrt(2.0) / 4 * 2 * pi);
}

TEST_CASE("frozen speed curve with constant coefficients is flat") {
    const auto nl = Nonlinearity::cubic(TemporalCoefficient::constant(2.0),
                                        TemporalCoefficient::constant(0.4));
    const auto curve = frozen_speed_curve(nl, 16);
    for (double c : curve.speeds) CHECK(c == curve.speeds.front());
    CHECK(curve.lipschitz == 0.0);
    CHECK(std::abs(curve.speeds.front() - 2.0 * 0.1) <= 1e-8);
}

TEST_CASE("frozen speed curve rejects coarse resolutions") {
    CHECK_THROWS_AS(frozen_speed_curve(testing_support::cubic_sine_b(0.25), 15), Error);
}

TEST_CASE("frozen speeds are periodic in s") {
    const auto nl = testing_support::cubic_rate_pair();
    Gen g(41);
    for (int k = 0; k < 8; ++k) {
        const double s = g.uniform(0, 1);
        const double c1 = solve_frozen_wave(nl.frozen(s)).speed;
        const double c2 = solve_frozen_wave(nl.frozen(s + 1.0)).speed;
        CHECK(std::abs(c1 - c2) <= 1e-8);
    }
}

TEST_CASE("Lipschitz estimate is stable under refinement") {
    const auto nl = testing_support::cubic_rate_pair();
    const auto coarse = frozen_speed_curve(nl, 32, with_jobs(4));
    const auto fine = frozen_speed_curve(nl, 64, with_jobs(4));
    CHECK(coarse.lipschitz > 0.0);
    CHECK(std::abs(fine.lipschitz - coarse.lipschitz) < 0.2 * fine.lipschitz);
}

TEST_CASE("curve construction is independent of the job count") {
    const auto nl = testing_support::cubic_rate_pair();
    const auto one = frozen_speed_curve(nl, 32, with_jobs(1));
    const auto many = frozen_speed_curve(nl, 32, with_jobs(8));
    CHECK(one.s == many.s);
    CHECK(one.speeds == many.speeds);
}

TEST_CASE("curve interpolation and integral") {
    const auto nl = testing_support::cubic_sine_b(0.25);
    auto curve = frozen_speed_curve(nl, 64, with_jobs(4, true));
    CHECK(curve.profiles.size() == curve.s.size());
    CHECK(curve.speed_at(0.3) == doctest::Approx(curve.speed_at(1.3)).epsilon(1e-12));
    CHECK(curve.speed_at(curve.s[5]) == curve.speeds[5]);
    // One period integrates to ~0; a quarter period to −(√2/4)/(2π)·(1 − cos(π/2)).
    CHECK(std::abs(curve.integral(3.0)) <= 1e-8);
    CHECK(curve.integral(0.25) == doctest::Approx(-std::sqrt(2.0) / 4 / (2 * pi)).epsilon(1e-3));
}

TEST_CASE("quasi-periodic slow limit reports a window error") {
    const auto b = TemporalCoefficient::quasi_periodic(0.5, {{1.0, 0.0, 0.1}, {std::sqrt(2.0), 0.0, 0.1}},
                                                       {1.0, std::sqrt(2.0)});
    const auto nl = Nonlinearity::cubic(TemporalCoefficient::constant(1.0), b, 200.0);
    CurveOptions opts;
    opts.window = 10.0;
    opts.jobs = 4;
    const auto curve = frozen_speed_curve(nl, 24, opts);
    CHECK_FALSE(curve.periodic);
    const auto lim = slow_limit(curve);
    const auto exact = [&](double s) { return std::sqrt(2.0) * (0.5 - b.value(s)); };
    CHECK(std::abs(lim.value - simpson(exact, 0, 10, 10000) / 10) <= 1e-4);
    const double half = simpson(exact, 0, 5, 5000) / 5;
    CHECK(std::abs(lim.error - std::abs(lim.value - half)) <= 1e-4);
    CHECK(lim.error > 0.0);
}

TEST_CASE("d0 and d* coincide for constant a") {
    Gen g(7);
    for (int k = 0; k < 20; ++k) {
        const auto a = TemporalCoefficient::constant(g.uniform(0.2, 5));
        const auto b = random_trig(g, g.uniform(0.3, 0.7), 0.25);
        CHECK(std::abs(cubic_d0(a, b) - cubic_dstar(a, b)) <= 1e-10);
    }
}

TEST_CASE("d0 exceeds d* for constant b below one half") {
    Gen g(8);
    for (int k = 0; k < 20; ++k) {
        const double b0 = g.uniform(0.05, 0.45);
        const auto a = random_trig(g, g.uniform(1.0, 3.0), 0.9);
        const auto b = TemporalCoefficient::constant(b0);
        const double d0 = cubic_d0(a, b);
        const double ds = cubic_dstar(a, b);
        CHECK(ds > 0.0);
        CHECK(d0 - ds > 1e-10);

        const auto bm = TemporalCoefficient::constant(1.0 - b0);
        CHECK(cubic_dstar(a, bm) < 0.0);
        CHECK(cubic_dstar(a, bm) - cubic_d0(a, bm) > 1e-10);
    }
}

TEST_CASE("d0 of a symmetric threshold vanishes") {
    CHECK(std::abs(cubic_d0(TemporalCoefficient::constant(3.0), testing_support::sign_reversal_b())) <= 1e-15);
    CHECK(std::abs(cubic_dstar(testing_support::sign_reversal_a(0.0), TemporalCoefficient::constant(0.5))) ==
          0.0);
}

TEST_CASE("d0 rejects a nonpositive mean") {
    const auto a = TemporalCoefficient::trig_polynomial(-1.0, {{1.0, 0.5, 0.0}});
    try {
        cubic_d0(a, TemporalCoefficient::constant(0.3));
        FAIL("expected a domain error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::domain);
    }
}

TEST_CASE("homogenized sign agrees with the classifier") {
    Gen g(9);
    int conclusive = 0;
    for (int k = 0; k < 15; ++k) {
        const auto a = random_trig(g, g.uniform(1.0, 3.0), 0.8);
        const auto b = random_trig(g, g.uniform(0.3, 0.7), 0.2);
        const auto nl = Nonlinearity::cubic(a, b);
        const auto sign = speed_sign_classifier([&](double u) { return nl.mean(u); });
        const double c0 = homogenized_speed(nl);
        if (sign == SpeedSign::positive) CHECK(c0 > 0.0);
        if (sign == SpeedSign::negative) CHECK(c0 < 0.0);
        if (sign == SpeedSign::positive || sign == SpeedSign::negative) ++conclusive;
    }
    CHECK(conclusive >= 10);
}

TEST_CASE("KPP spreading speed") {
    CHECK(kpp_spreading_speed(1.0) == 2.0);
    CHECK(kpp_spreading_speed(4.0) == 4.0);
    CHECK_THROWS_AS(kpp_spreading_speed(0.0), Error);
    CHECK_THROWS_AS(kpp_spreading_speed(-1.0), Error);

    Gen g(10);
    for (int k = 0; k < 10; ++k) {
        const double m = g.uniform(0.01, 10);
        const auto cost = [m](double mu) { return (m + mu * mu) / mu; };
        // Coarse grid, then golden-section on the best cell.
        double best = 1e-3;
        for (double mu = 1e-3; mu < 20; mu += 1e-3) {
            if (cost(mu) < cost(best)) best = mu;
        }
        double lo = best - 1e-3, hi = best + 1e-3;
        const double r = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 200; ++it) {
            const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
            if (cost(x1) < cost(x2)) hi = x2;
            else lo = x1;
        }
        CHECK(std::abs(kpp_spreading_speed(m) - cost(0.5 * (lo + hi))) <= 1e-8);
    }
}

TEST_CASE("speed report CSV layout") {
    SpeedReport r;
    r.c0 = -0.5;
    r.cstar = 0.25;
    r.dstar = 0.1;
    r.rate_rapid = 1.0;
    r.estimates = {{0.1, 0.001, 1e-5}, {0.2, 0.002, 2e-5}};
    CHECK(r.speeds_csv() == "T,cbar,uncertainty\n0.1,0.001,1e-05\n0.2,0.002,2e-05\n");
    CHECK(r.limits_csv() == "c0,cstar,d0,dstar,kpp,rate_rapid,rate_slow\n-0.5,0.25,,0.1,,1,\n");
    CHECK(format_number(0.1 + 0.2) == "0.30000000000000004");
}

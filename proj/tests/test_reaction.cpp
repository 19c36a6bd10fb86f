#include "doctest.h"
#include "support.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/reaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace wavespeed;
using testing_support::Gen;
using testing_support::simpson;

namespace {

constexpr double pi = std::numbers::pi;

// ∫ a(t) h(t) over one period for a piecewise-constant a, h given by its
// antiderivative H; evaluated interval by interval.
double step_weighted(const std::vector<StepInterval>& steps, const std::function<double(double)>& H) {
    double s = 0.0;
    for (const auto& st : steps) s += st.value * (H(st.t1) - H(st.t0));
    return s;
}

}  // namespace

TEST_SUITE("reaction") {

TEST_CASE("eval_f substitutes into the cubic") {
    CHECK(eval_f(testing_support::cubic_const(1.0, 0.3), 0.7, 0.5) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(eval_f(testing_support::cubic_const(4.0, 0.25), 12.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(eval_f(testing_support::cubic_sine_b(0.25), 0.3, 0.0) == 0.0);
    CHECK_THROWS_AS(eval_f(testing_support::cubic_const(1.0, 0.3), 0.0, std::nan("")), Error);
}

TEST_CASE("partials match finite differences") {
    auto nl = testing_support::cubic_rate_pair();
    Gen g(7);
    for (int i = 0; i < 50; ++i) {
        const double t = g.uniform(-3, 3);
        const double u = g.uniform(-1, 2);
        const double h = 1e-5;
        const double fd1 = (nl.f(t, u + h) - nl.f(t, u - h)) / (2 * h);
        const double fd2 = (nl.du(t, u + h) - nl.du(t, u - h)) / (2 * h);
        CHECK(nl.du(t, u) == doctest::Approx(fd1).epsilon(1e-8));
        CHECK(nl.duu(t, u) == doctest::Approx(fd2).epsilon(1e-8));
    }
}

TEST_CASE("temporal_mean of the sine-modulated threshold") {
    auto nl = testing_support::cubic_sine_b(0.25);
    CHECK(temporal_mean(nl, 0.25) == doctest::Approx(-0.046875).epsilon(1e-14));
}

TEST_CASE("temporal_mean of the step coefficient uses exact interval integrals") {
    std::vector<StepInterval> steps{{0.0, 0.25, 1.0}, {0.25, 0.5, 64.0 / 9.0}, {0.5, 1.0, 4.0}};
    const double abar = step_weighted(steps, [](double t) { return t; });
    const double absin = step_weighted(steps, [](double t) { return -std::cos(2 * pi * t) / (2 * pi); });
    const double abbar = 0.5 * abar + 0.25 * absin;
    CHECK(abar == doctest::Approx(145.0 / 36.0).epsilon(1e-15));
    CHECK(abbar == doctest::Approx(145.0 / 72.0 + 1.0 / (72.0 * pi)).epsilon(1e-14));

    auto nl = Nonlinearity::cubic(testing_support::sign_reversal_a(0.0), testing_support::sign_reversal_b());
    for (double u : {-0.3, 0.2, 0.5, 0.9, 1.4}) {
        const double expected = abar * u * u * (1 - u) - abbar * u * (1 - u);
        CHECK(temporal_mean(nl, u) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("temporal_mean of a constant-in-time reaction is the reaction") {
    auto nl = testing_support::cubic_const(2.5, 0.4);
    for (double u : {-0.5, 0.1, 0.6, 1.3}) CHECK(temporal_mean(nl, u) == doctest::Approx(nl.f(0.0, u)).epsilon(1e-15));
}

TEST_CASE("periodic means equal one-period window averages from any start") {
    Gen g(11);
    const std::vector<Nonlinearity> cases{
        testing_support::cubic_rate_pair(),
        Nonlinearity::cubic(testing_support::sign_reversal_a(0.02), testing_support::sign_reversal_b())};
    for (const auto& nl : cases) {
        const double P = *nl.period();
        for (int k = 0; k < 8; ++k) {
            const double start = g.uniform(-5, 5);
            const double u = g.uniform(-0.2, 1.2);
            // 0.02-wide ramps need a fine Simpson grid to reach 1e-10.
            const double window = simpson([&](double t) { return nl.f(t, u); }, start, start + P, 200000) / P;
            CHECK(temporal_mean(nl, u) == doctest::Approx(window).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("quasi-periodic mean needs an ergodic horizon") {
    auto a = TemporalCoefficient::quasi_periodic(2.0, {{1.0, 0.5, 0.0}, {std::sqrt(2.0), 0.0, 0.3}},
                                                 {1.0, std::sqrt(2.0)});
    auto b = TemporalCoefficient::constant(0.4);
    auto without = Nonlinearity::cubic(a, b);
    try {
        (void)temporal_mean(without, 0.5);
        FAIL("expected a configuration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
    auto with = Nonlinearity::cubic(a, b, 1e4);
    const double exact = 2.0 * 0.25 * (0.5 - 0.4);
    CHECK(temporal_mean(with, 0.5) == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("primitive_F vanishes at t = 0") {
    Gen g(3);
    auto nl = testing_support::cubic_rate_pair();
    for (int i = 0; i < 20; ++i) CHECK(primitive_F(nl, 0.0, g.uniform(-1, 2)) == 0.0);
}

TEST_CASE("primitive_F of a sine mode has the closed antiderivative") {
    auto nl = testing_support::cubic_sine_b(0.25);
    Gen g(5);
    for (int i = 0; i < 50; ++i) {
        const double t = g.uniform(-10, 10);
        const double u = g.uniform(-0.5, 1.5);
        // f − f̄ = sin(2πt)·g(u) with g(u) = −u(1−u)/4
        const double gu = -u * (1 - u) / 4;
        CHECK(primitive_F(nl, t, u) == doctest::Approx(gu * (1 - std::cos(2 * pi * t)) / (2 * pi)).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("primitive_F with two incommensurate frequencies matches quadrature") {
    auto a = TemporalCoefficient::quasi_periodic(2.0, {{1.0, 0.5, 0.2}, {std::sqrt(2.0), -0.3, 0.4}});
    auto b = TemporalCoefficient::quasi_periodic(0.45, {{std::sqrt(2.0), 0.1, 0.05}});
    auto nl = Nonlinearity::cubic(a, b, 1e4);
    Gen g(17);
    for (int i = 0; i < 10; ++i) {
        const double t = g.uniform(0.5, 15);
        const double u = g.uniform(0.0, 1.0);
        const double fbar = temporal_mean(nl, u);
        const double oracle = simpson([&](double tau) { return nl.f(tau, u) - fbar; }, 0.0, t, 20000);
        CHECK(primitive_F(nl, t, u) == doctest::Approx(oracle).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("primitive_F on a smoothed step matches quadrature and stays bounded") {
    auto nl = Nonlinearity::cubic(testing_support::sign_reversal_a(0.02), testing_support::sign_reversal_b());
    Gen g(19);
    for (int i = 0; i < 10; ++i) {
        const double t = g.uniform(0.0, 3.0);
        const double u = g.uniform(0.0, 1.0);
        const double fbar = temporal_mean(nl, u);
        const double oracle = simpson([&](double tau) { return nl.f(tau, u) - fbar; }, 0.0, t, 400000);
        CHECK(primitive_F(nl, t, u) == doctest::Approx(oracle).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("primitive_F is bounded on long windows for trig forcing") {
    auto nl = testing_support::cubic_rate_pair();
    Gen g(23);
    // f − f̄ = P1(u)(a − ā) + P2(u)(ab − ab̄): bound each part by Σ|amp|/(π·min freq)
    double sup = 0.0;
    double bound = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double t = g.uniform(0.0, 1e4);
        const double u = g.uniform(0.0, 1.0);
        sup = std::max(sup, std::abs(primitive_F(nl, t, u)));
    }
    const double amp_a = 1.0;
    const double amp_ab = 0.4 + 0.5 + 0.1;  // modes of (2 + cos)(1/2 + sin/5)
    const double g1 = 4.0 / 27.0;           // sup of u²(1−u) on [0,1]
    const double g2 = 0.25;                 // sup of u(1−u)
    bound = (amp_a * g1 + amp_ab * g2) / pi;
    CHECK(sup <= bound);
    CHECK(sup > 0.0);
}

TEST_CASE("smoothed_primitive_F_T of a sine mode") {
    auto nl = testing_support::cubic_sine_b(0.25);
    Gen g(29);
    const double w = 2 * pi;
    for (double T : {0.5, 0.05, 3.0}) {
        for (int i = 0; i < 20; ++i) {
            const double t = g.uniform(-5, 5);
            const double u = g.uniform(-0.5, 1.5);
            const double gu = -u * (1 - u) / 4;
            const double expected = gu * (T * std::sin(w * t) - w * std::cos(w * t)) / (T * T + w * w);
            CHECK(smoothed_primitive_F_T(nl, T, t, u) == doctest::Approx(expected).epsilon(1e-13).scale(1.0));
        }
    }
    CHECK_THROWS_AS(smoothed_primitive_F_T(nl, 0.0, 1.0, 0.5), Error);
}

TEST_CASE("smoothed_primitive_F_T vanishes without oscillation") {
    auto nl = testing_support::cubic_const(1.7, 0.35);
    CHECK(smoothed_primitive_F_T(nl, 0.3, 2.0, 0.4) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("F_T satisfies its evolution identity") {
    std::vector<Nonlinearity> cases{
        testing_support::cubic_rate_pair(),
        Nonlinearity::cubic(testing_support::sign_reversal_a(0.02), testing_support::sign_reversal_b())};
    Gen g(31);
    for (const auto& nl : cases) {
        for (int i = 0; i < 40; ++i) {
            const double T = g.uniform(0.05, 2.0);
            const double t = g.uniform(0.0, 4.0);
            const double u = g.uniform(0.0, 1.0);
            const double h = 1e-5;  // the 0.02 ramps have large higher derivatives
            const double dt = (smoothed_primitive_F_T(nl, T, t + h, u) - smoothed_primitive_F_T(nl, T, t - h, u)) / (2 * h);
            const double rhs = -T * smoothed_primitive_F_T(nl, T, t, u) + nl.f(t, u) - temporal_mean(nl, u);
            CHECK(std::abs(dt - rhs) <= 1e-6);
        }
    }
}

TEST_CASE("T·F_T decreases as T shrinks") {
    auto nl = testing_support::cubic_rate_pair();
    Gen g(37);
    std::vector<double> sups;
    for (double T : {1e-1, 1e-2, 1e-3}) {
        double s = 0.0;
        for (int i = 0; i < 500; ++i) s = std::max(s, std::abs(T * smoothed_primitive_F_T(nl, T, g.uniform(0, 5), g.uniform(0, 1))));
        sups.push_back(s);
    }
    CHECK(sups[1] < sups[0]);
    CHECK(sups[2] < sups[1]);
}

TEST_CASE("coefficients are periodic and bounded") {
    Gen g(41);
    std::vector<TemporalCoefficient> cs{
        TemporalCoefficient::trig_polynomial(2.0, {{1.0, 1.0, 0.0}, {3.0, 0.2, -0.1}}),
        testing_support::sign_reversal_a(0.02), TemporalCoefficient::constant(0.3)};
    for (const auto& c : cs) {
        const double P = *c.period();
        for (int i = 0; i < 100; ++i) {
            const double t = g.uniform(-20, 20);
            CHECK(c.value(t + P) == doctest::Approx(c.value(t)).epsilon(1e-12));
            CHECK(std::abs(c.value(t)) <= c.amplitude_bound() + 1e-12);
        }
    }
    auto two = TemporalCoefficient::trig_polynomial(0.0, {{2.0, 1.0, 0.0}, {3.0, 1.0, 0.0}});
    CHECK(*two.period() == doctest::Approx(1.0));
    CHECK_THROWS_AS(TemporalCoefficient::trig_polynomial(0.0, {{1.0, 1.0, 0.0}, {std::sqrt(2.0), 1.0, 0.0}}), Error);
}

TEST_CASE("smoothed steps keep interval means and are C1") {
    auto c = testing_support::sign_reversal_a(0.02);
    CHECK(c.mean() == doctest::Approx(145.0 / 36.0).epsilon(1e-15));
    const double integral = simpson([&](double t) { return c.value(t); }, 0.0, 1.0, 400000);
    CHECK(integral == doctest::Approx(145.0 / 36.0).epsilon(1e-10));
    // derivative continuity at a ramp edge
    const double e = 0.25 + 0.01;
    const double h = 1e-9;
    CHECK(std::abs((c.value(e + h) - c.value(e)) / h) < 1e-4);
    CHECK(std::abs((c.value(e) - c.value(e - h)) / h) < 1e-4);
    CHECK(c.value(0.25) == doctest::Approx(0.5 * (1.0 + 64.0 / 9.0)));
}

TEST_CASE("f vanishes at both limit states") {
    Gen g(43);
    std::vector<Nonlinearity> cases{testing_support::cubic_rate_pair(), testing_support::cubic_sine_b(0.25),
                                    Nonlinearity::cubic(testing_support::sign_reversal_a(0.02), testing_support::sign_reversal_b())};
    for (const auto& nl : cases) {
        (void)stability_margins(nl);
        for (int i = 0; i < 1000; ++i) {
            const double t = g.uniform(-100, 100);
            CHECK(std::abs(nl.f(t, 0.0)) <= 1e-12);
            CHECK(std::abs(nl.f(t, 1.0)) <= 1e-12);
        }
    }
}

TEST_CASE("stability margins of constant cubic") {
    auto m = stability_margins(testing_support::cubic_const(1.0, 0.5));
    CHECK(m.gamma1 <= 0.5 + 1e-12);
    CHECK(m.gamma1 > 0.35);
    CHECK(m.delta1 <= m.delta0);
    CHECK(m.gamma1 <= m.gamma0);
    CHECK(m.delta0 <= 0.25);
    // K1 = sup |∂_u f| on [−1,2]; for a=1, b=1/2 the maximum sits at u = −1 and u = 2
    CHECK(m.K1 == doctest::Approx(6.5).epsilon(1e-12));
}

TEST_CASE("stability margins over a range of coefficients") {
    // a spans [1,4] and b spans [0.3,0.7], with a = 1 and b = 0.3 together at t = 0,
    // so the edge ratio −∂_u f(t,0) = a·b bottoms out at 0.3
    auto a = TemporalCoefficient::trig_polynomial(2.5, {{1.0, -1.5, 0.0}});
    auto b = TemporalCoefficient::trig_polynomial(0.5, {{1.0, -0.2, 0.0}});
    auto nl = Nonlinearity::cubic(a, b);
    auto m = stability_margins(nl);
    CHECK(m.gamma0 <= 0.3 + 1e-9);
    CHECK(m.gamma0 > 0.2);
    // the certified inequalities hold on a fresh sample
    Gen g(47);
    for (int i = 0; i < 2000; ++i) {
        const double t = g.uniform(0, 1);
        const double e = g.uniform(-m.delta0, m.delta0);
        if (e == 0.0) continue;
        CHECK(-nl.f(t, e) / e >= m.gamma0 * (1 - 1e-2));
        CHECK(nl.f(t, 1 + e) / (-e) >= m.gamma0 * (1 - 1e-2));
        const double e1 = g.uniform(-m.delta1, m.delta1);
        CHECK(nl.du(t, e1) <= -m.gamma1 * (1 - 1e-2));
    }
}

TEST_CASE("stability margins reject an unstable zero") {
    GeneralReaction r;
    // bump makes f positive at u = 0.001
    auto bump = [](double u) { return 0.01 * u * std::exp(-std::pow((u - 0.001) / 0.0005, 2)) * 1e3; };
    r.f = [bump](double, double u) { return u * (1 - u) * (u - 0.3) + bump(u) * (1 - u); };
    r.du = [](double, double) { return 0.0; };
    r.duu = [](double, double) { return 0.0; };
    r.period = 1.0;
    auto nl = Nonlinearity::general(r);
    CHECK(nl.f(0.0, 0.001) > 0.0);
    try {
        (void)stability_margins(nl);
        FAIL("expected validation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::validation);
    }
}

TEST_CASE("diophantine margin") {
    const double one[] = {1.0};
    CHECK(diophantine_margin(one, 5) == doctest::Approx(1.0));
    const double resonant[] = {1.0, 1.0};
    CHECK(diophantine_margin(resonant, 2) == 0.0);

    const double w[] = {1.0, std::sqrt(2.0)};
    double oracle = 1e300;
    for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
            if (i == 0 && j == 0) continue;
            const double n2 = static_cast<double>(i * i + j * j);
            oracle = std::min(oracle, std::abs(i + j * std::sqrt(2.0)) * n2);
        }
    }
    const double got = diophantine_margin(w, 10);
    CHECK(got > 0.0);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
}

}  // TEST_SUITE

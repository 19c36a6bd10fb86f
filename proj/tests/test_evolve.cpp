#include "doctest.h"
#include "support.hpp"

#include "wavespeed/errors.hpp"
#include "wavespeed/evolve.hpp"

#include <algorithm>
#include <cmath>

using namespace wavespeed;
using testing_support::Gen;

namespace {

Nonlinearity zero_reaction() {
    GeneralReaction g;
    g.f = [](double, double) { return 0.0; };
    g.du = [](double, double) { return 0.0; };
    g.duu = [](double, double) { return 0.0; };
    return Nonlinearity::general(g);
}

/// ½ erfc(x / (2√t)) solves the heat equation with limits 1 and 0.
double heat_front(double x, double t) { return 0.5 * std::erfc(x / (2.0 * std::sqrt(t))); }

State sampled(const Grid1D& g, const std::function<double(double)>& u0) {
    State s;
    s.grid = g;
    s.u.resize(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) s.u[i] = u0(g.x(i));
    return s;
}

CauchyOptions small_domain() {
    CauchyOptions o;
    o.half_width = 30.0;
    return o;
}

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("grid geometry") {
    auto g = Grid1D::make(60.0, 0.05);
    CHECK(g.nodes == 2401);
    CHECK(g.nodes % 2 == 1);
    CHECK(static_cast<double>(g.nodes - 1) * g.dx == doctest::Approx(120.0));
    CHECK(g.x(1200) == doctest::Approx(0.0).scale(1.0));
    CHECK_THROWS_AS(Grid1D::make(1.0, 0.3), Error);
    CHECK_THROWS_AS(Grid1D::make(1.0, -0.1), Error);
}

TEST_CASE("diffusion step matches the heat kernel") {
    const auto nl = zero_reaction();
    for (double dx : {0.1, 0.05}) {
        const double dt = 1e-3;
        auto g = Grid1D::make(20.0, dx);
        State s = sampled(g, [](double x) { return heat_front(x, 1.0); });
        s.time = 1.0;
        State next = step_imex(s, nl, 1.0, dt);
        double err = 0.0;
        for (std::size_t i = 1; i + 1 < g.nodes; ++i)
            err = std::max(err, std::abs(next.u[i] - heat_front(g.x(i), 1.0 + dt)));
        CHECK(err <= dt * dt * dt + dt * dx * dx);
        CHECK(next.time == doctest::Approx(1.0 + dt));
    }
}

TEST_CASE("zero state is an equilibrium") {
    auto g = Grid1D::make(10.0, 0.05);
    State s = sampled(g, [](double) { return 0.0; });
    auto nl = testing_support::cubic_rate_pair();
    State next = step_imex(s, nl, 1.0, 1e-3);
    for (double v : next.u) CHECK(v == 0.0);
}

TEST_CASE("frozen cubic wave translates at its speed") {
    auto nl = testing_support::cubic_const(1.0, 0.3);
    auto g = Grid1D::make(30.0, 0.05);
    const auto psi = cubic_closed_form(1.0, 0.3);
    State s = sampled(g, [&](double x) { return psi.value(x); });
    ImexStepper stepper(nl, 1.0, 2e-3, g, {});
    for (int k = 0; k < 5000; ++k) stepper.step(s);
    const double shift = 0.2 * std::sqrt(2.0) * 10.0;
    double err = 0.0;
    for (std::size_t i = 0; i < g.nodes; ++i) err = std::max(err, std::abs(s.u[i] - psi.value(g.x(i) - shift)));
    CHECK(err <= 5e-3);
}

TEST_CASE("stepper preconditions and corridor") {
    auto nl = testing_support::cubic_const(1.0, 0.3);
    auto g = Grid1D::make(10.0, 0.05);
    CHECK_THROWS_AS(ImexStepper(nl, 0.1, 0.01, g, {}), Error);
    ImexStepper::Options capped;
    capped.K1 = 100.0;
    CHECK_THROWS_AS(ImexStepper(nl, 1.0, 0.01, g, capped), Error);
    State s = sampled(g, [](double x) { return x < 0 ? 1.0 : 0.0; });
    s.u[50] = 5.0;
    try {
        (void)step_imex(s, nl, 1.0, 1e-3);
        FAIL("expected instability");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::instability);
    }
}

TEST_CASE("level position") {
    const auto psi = cubic_closed_form(1.0, 0.3);
    auto g = Grid1D::make(20.0, 0.05);
    State s = sampled(g, [&](double x) { return psi.value(x); });
    const double curvature_bound = 0.1;  // sup|ψ″| for a₀ = 1
    CHECK(std::abs(level_position(s, 0.5)) <= g.dx * g.dx * curvature_bound);
    CHECK(std::abs(level_position(s, 0.25) - std::sqrt(2.0) * std::log(3.0)) <= g.dx * g.dx * curvature_bound * 10);
    State moved = sampled(g, [&](double x) { return psi.value(x - 3.7); });
    CHECK(level_position(moved, 0.5) == doctest::Approx(3.7).epsilon(1e-4));
    State bumpy = sampled(g, [&](double x) { return std::abs(x) < 2 ? 0.7 : (x < 0 ? 0.3 : 0.0); });
    try {
        (void)level_position(bumpy, 0.5);
        FAIL("expected front-shape error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::front_shape);
    }
}

TEST_CASE("average speed on synthetic traces") {
    FrontTrace line;
    for (int i = 0; i <= 1000; ++i) {
        line.times.push_back(0.1 * i);
        line.positions.push_back(3.0 * 0.1 * i);
    }
    auto [c, u] = average_speed(line);
    CHECK(c == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(u <= 1e-10);

    FrontTrace wobble;
    const double H = 2000.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = H * i / 20000.0;
        wobble.times.push_back(t);
        wobble.positions.push_back(3.0 * t + 0.1 * std::sin(t));
    }
    auto [cw, uw] = average_speed(wobble);
    CHECK(std::abs(cw - 3.0) <= 1.0 / H);
    CHECK(uw >= 0.0);

    FrontTrace short_trace;
    for (int i = 0; i < 50; ++i) {
        short_trace.times.push_back(i);
        short_trace.positions.push_back(i);
    }
    try {
        (void)average_speed(short_trace);
        FAIL("expected insufficient data");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::insufficient_data);
    }
}

TEST_CASE("uncertainty covers the split-halves discrepancy") {
    FrontTrace tr;
    for (int i = 0; i <= 2000; ++i) {
        const double t = 0.05 * i;
        tr.times.push_back(t);
        tr.positions.push_back(t + 0.002 * t * t);
    }
    tr.burn_in = 10.0;
    auto [c, u] = average_speed(tr);
    // halves of [10,100] have slopes 1 + 0.004·(mean time of each half)
    const double s1 = 1.0 + 0.004 * 32.5;
    const double s2 = 1.0 + 0.004 * 77.5;
    CHECK(u >= 0.5 * std::abs(s1 - s2) - 1e-9);
    CHECK(c == doctest::Approx(1.0 + 0.004 * 55.0).epsilon(1e-6));
}

TEST_CASE("frozen cubic run recovers the wave speed") {
    auto nl = testing_support::cubic_const(1.0, 0.3);
    auto tr = run_cauchy(nl, 1.0, cubic_closed_form(1.0, 0.3), 60.0, small_domain());
    CHECK(std::abs(tr.speed - 0.2 * std::sqrt(2.0)) <= 2e-3);
    CHECK(tr.uncertainty < 2e-3);
    // front moved 17 units on a 30-wide window, so the grid was re-centred
    CHECK(tr.positions.back() > 15.0);
    for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
}

TEST_CASE("sine-modulated threshold has zero average speed for every T") {
    auto nl = testing_support::cubic_sine_b(0.25);
    std::vector<std::pair<double, double>> est;
    for (double T : {0.1, 1.0, 10.0}) {
        auto tr = run_cauchy(nl, T, cubic_closed_form(1.0, 0.5), std::max(50.0, 10 * T), small_domain());
        CHECK(std::abs(tr.speed) <= 2e-3);
        est.emplace_back(tr.speed, tr.uncertainty);
    }
    for (std::size_t i = 0; i < est.size(); ++i)
        for (std::size_t j = i + 1; j < est.size(); ++j)
            CHECK(std::abs(est[i].first - est[j].first) <= est[i].second + est[j].second);
}

TEST_CASE("comparison principle and corridor along runs") {
    auto nl = testing_support::cubic_sine_b(0.25);
    const auto m = stability_margins(nl);
    const auto psi = cubic_closed_form(1.0, 0.5);
    std::vector<std::vector<double>> lower, upper;
    CauchyOptions o = small_domain();
    o.margins = m;
    bool corridor = true;
    o.observer = [&](const State& s) {
        lower.push_back(s.u);
        for (double v : s.u) corridor = corridor && v >= -m.delta0 && v <= 1 + m.delta0;
    };
    (void)run_cauchy(nl, 1.0, psi, 25.0, o);
    auto shifted = psi;
    o.observer = [&](const State& s) { upper.push_back(s.u); };
    std::vector<double> init(Grid1D::make(30.0, 0.05).nodes);
    auto g = Grid1D::make(30.0, 0.05);
    for (std::size_t i = 0; i < g.nodes; ++i) init[i] = psi.value(g.x(i) - 1.0);
    (void)run_cauchy(nl, 1.0, init, 25.0, o);
    REQUIRE(lower.size() == upper.size());
    bool ordered = true;
    for (std::size_t k = 0; k < lower.size(); ++k)
        for (std::size_t i = 0; i < lower[k].size(); ++i) ordered = ordered && lower[k][i] <= upper[k][i] + 1e-10;
    CHECK(ordered);
    CHECK(corridor);
}

TEST_CASE("shifting initial data by whole cells shifts every level sample") {
    auto nl = testing_support::cubic_const(1.0, 0.3);
    const auto psi = cubic_closed_form(1.0, 0.3);
    auto g = Grid1D::make(30.0, 0.05);
    const int k = 7;
    std::vector<double> a(g.nodes), b(g.nodes);
    for (std::size_t i = 0; i < g.nodes; ++i) {
        a[i] = psi.value(g.x(i));
        b[i] = psi.value(g.x(i) - k * g.dx);
    }
    auto ta = run_cauchy(nl, 1.0, a, 30.0, small_domain());
    auto tb = run_cauchy(nl, 1.0, b, 30.0, small_domain());
    REQUIRE(ta.positions.size() == tb.positions.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ta.positions.size(); ++i)
        worst = std::max(worst, std::abs(tb.positions[i] - ta.positions[i] - k * g.dx));
    CHECK(worst <= 1e-9);
}

TEST_CASE("refinement reduces the speed error at second order") {
    auto nl = testing_support::cubic_const(1.0, 0.3);
    const double exact = 0.2 * std::sqrt(2.0);
    std::vector<double> err;
    for (double h : {1.0, 0.5, 0.25}) {
        CauchyOptions o = small_domain();
        o.dx = 0.1 * h;
        o.dt = 0.04 * h;
        o.compact = false;
        auto tr = run_cauchy(nl, 1.0, cubic_closed_form(1.0, 0.3), 40.0, o);
        err.push_back(std::abs(tr.speed - exact));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.35));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.35));
}

TEST_CASE("level sets travel at one average speed") {
    auto nl = testing_support::cubic_const(1.0, 0.3);
    std::vector<std::pair<double, double>> est;
    for (double alpha : {0.25, 0.5, 0.75}) {
        CauchyOptions o = small_domain();
        o.level = alpha;
        auto tr = run_cauchy(nl, 1.0, cubic_closed_form(1.0, 0.3), 60.0, o);
        est.emplace_back(tr.speed, tr.uncertainty);
    }
    for (std::size_t i = 0; i < est.size(); ++i)
        for (std::size_t j = i + 1; j < est.size(); ++j)
            CHECK(std::abs(est[i].first - est[j].first) <= est[i].second + est[j].second);
}

TEST_CASE("trace CSV layout") {
    FrontTrace tr;
    tr.times = {0.0, 0.1};
    tr.positions = {0.0, 0.25};
    const auto csv = trace_csv(tr);
    CHECK(csv.rfind("time,level,position\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find('\r') == std::string::npos);
}

}

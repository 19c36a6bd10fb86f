#pragma once

// Shared helpers for the test binaries: seeded generators and a plain
// composite Simpson rule used as an independent quadrature oracle.

#include "wavespeed/reaction.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace testing_support {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

private:
    std::mt19937_64 rng_;
};

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

inline wavespeed::Nonlinearity cubic_const(double a, double b) {
    using wavespeed::TemporalCoefficient;
    return wavespeed::Nonlinearity::cubic(TemporalCoefficient::constant(a), TemporalCoefficient::constant(b));
}

/// a ≡ 1, b(t) = 1/2 + amp·sin(2πt).
inline wavespeed::Nonlinearity cubic_sine_b(double amp) {
    using wavespeed::TemporalCoefficient;
    return wavespeed::Nonlinearity::cubic(TemporalCoefficient::constant(1.0),
                                          TemporalCoefficient::trig_polynomial(0.5, {{1.0, 0.0, amp}}));
}

/// a = 2 + cos 2πt, b = 1/2 + (1/5) sin 2πt.
inline wavespeed::Nonlinearity cubic_rate_pair() {
    using wavespeed::TemporalCoefficient;
    return wavespeed::Nonlinearity::cubic(TemporalCoefficient::trig_polynomial(2.0, {{1.0, 1.0, 0.0}}),
                                          TemporalCoefficient::trig_polynomial(0.5, {{1.0, 0.0, 0.2}}));
}

/// Step coefficient 1 on (0,1/4], 64/9 on (1/4,1/2], 4 on (1/2,1].
inline wavespeed::TemporalCoefficient sign_reversal_a(double width) {
    return wavespeed::TemporalCoefficient::smoothed_step(
        {{0.0, 0.25, 1.0}, {0.25, 0.5, 64.0 / 9.0}, {0.5, 1.0, 4.0}}, width);
}

inline wavespeed::TemporalCoefficient sign_reversal_b() {
    return wavespeed::TemporalCoefficient::trig_polynomial(0.5, {{1.0, 0.0, 0.25}});
}

}  // namespace testing_support

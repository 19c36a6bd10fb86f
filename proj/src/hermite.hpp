#pragma once

// Quintic Hermite interpolation on one cell from value, slope and curvature
// at both ends. Internal to the library.

namespace wavespeed::detail {

struct HermiteJet {
    double value;
    double slope;
    double curvature;
};

inline HermiteJet quintic_hermite(double h, double y0, double d0, double c0, double y1, double d1,
                                  double c1, double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double s4 = s3 * s;
    const double s5 = s4 * s;

    const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    const double h4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double h5 = 0.5 * (s3 - 2 * s4 + s5);

    const double p0 = -30 * s2 + 60 * s3 - 30 * s4;
    const double p1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    const double p2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4);
    const double p4 = -12 * s2 + 28 * s3 - 15 * s4;
    const double p5 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);

    const double q0 = -60 * s + 180 * s2 - 120 * s3;
    const double q1 = -36 * s + 96 * s2 - 60 * s3;
    const double q2 = 0.5 * (2 - 18 * s + 36 * s2 - 20 * s3);
    const double q4 = -24 * s + 84 * s2 - 60 * s3;
    const double q5 = 0.5 * (6 * s - 24 * s2 + 20 * s3);

    const double dy = y1 - y0;
    HermiteJet out{};
    out.value = y0 + dy * (1 - h0) + h * (d0 * h1 + d1 * h4) + h * h * (c0 * h2 + c1 * h5);
    out.slope = (-dy * p0) / h + d0 * p1 + d1 * p4 + h * (c0 * p2 + c1 * p5);
    out.curvature = (-dy * q0) / (h * h) + (d0 * q1 + d1 * q4) / h + c0 * q2 + c1 * q5;
    return out;
}

}  // namespace wavespeed::detail

#include "wavespeed/quadrature.hpp"

#include "wavespeed/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>

namespace wavespeed {

namespace {

// Kronrod 15-point abscissae and weights; odd entries are the Gauss 7 nodes.
constexpr std::array<double, 8> xgk{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a;
    double b;
    double value;
    double error;
    double l1;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * wgk[7];
    double g = fc * wg[3];
    double l1 = std::abs(fc) * wgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * xgk[static_cast<std::size_t>(j)];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        k += wgk[static_cast<std::size_t>(j)] * (f1 + f2);
        l1 += wgk[static_cast<std::size_t>(j)] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1) g += wg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
    }
    return {a, b, k * h, std::abs((k - g) * h), l1 * std::abs(h)};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol) {
    if (a == b) return 0.0;
    std::priority_queue<Panel> heap;
    Panel first = gk15(f, a, b);
    heap.push(first);
    double value = first.value;
    double error = first.error;
    double l1 = first.l1;
    constexpr int max_panels = 4000;
    int panels = 1;
    while (error > std::max(abs_tol, rel_tol * l1) && panels < max_panels) {
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        const Panel left = gk15(f, worst.a, mid);
        const Panel right = gk15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        heap.push(left);
        heap.push(right);
        ++panels;
    }
    if (!std::isfinite(value)) fail(ErrorKind::numeric, "quadrature produced a non-finite value");
    // recompute the running sums to shed accumulated cancellation
    value = 0.0;
    error = 0.0;
    l1 = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        l1 += heap.top().l1;
        heap.pop();
    }
    const double allowed = std::max(abs_tol, rel_tol * l1) * 100.0;
    if (error > allowed) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] reached error " << error
            << " above tolerance " << allowed;
        fail(ErrorKind::numeric, msg.str());
    }
    return value;
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double abs_tol, double rel_tol) {
    double total = 0.0;
    double left = a;
    for (double p : breakpoints) {
        if (p <= left || p >= b) continue;
        total += integrate(f, left, p, abs_tol, rel_tol);
        left = p;
    }
    total += integrate(f, left, b, abs_tol, rel_tol);
    return total;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        double max_panel, double abs_tol) {
    if (a == b) return 0.0;
    const auto n = static_cast<long>(std::ceil(std::abs(b - a) / max_panel));
    const double h = (b - a) / static_cast<double>(n);
    double total = 0.0;
    for (long k = 0; k < n; ++k) {
        const double lo = a + h * static_cast<double>(k);
        const double hi = (k + 1 == n) ? b : lo + h;
        total += integrate(f, lo, hi, abs_tol, 1e-12);
    }
    return total;
}

}  // namespace wavespeed

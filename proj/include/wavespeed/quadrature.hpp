#pragma once

#include <functional>
#include <span>

namespace wavespeed {

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Throws a numeric error when the
/// estimated error stays above max(abs_tol, rel_tol·|I|).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-13, double rel_tol = 1e-12);

/// Same, split at every breakpoint strictly inside (a, b). Breakpoints must
/// be sorted; they mark kinks or ramp edges of the integrand.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints,
                           double abs_tol = 1e-13, double rel_tol = 1e-12);

/// Integral over [a, b] split into panels no longer than max_panel.
/// Used for long oscillatory windows.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        double max_panel, double abs_tol = 1e-13);

}  // namespace wavespeed

#pragma once

#include <functional>

namespace loopmass::quad {

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
};

struct QuadOptions {
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  // Bisection depth at which an interval is no longer split.
  int max_depth = 60;
  int max_intervals = 20000;
};

using Integrand = std::function<double(double)>;

/// Integrand that also receives the distances x - a and b - x, computed
/// without cancellation. Needed for endpoint singularities of the form
/// (b - x)^p, where forming b - x from x loses all digits.
using EndpointIntegrand = std::function<double(double x, double from_a, double to_b)>;

/// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
/// Endpoints are never evaluated. Throws NonConvergenceError when the
/// interval budget or depth limit is exhausted before the tolerance is met.
QuadResult integrate_1d(const Integrand& f, double a, double b, double tol);
QuadResult integrate_1d(const Integrand& f, double a, double b, const QuadOptions& opts);

/// Integral over the whole real line through x = center + scale * tan(theta).
QuadResult integrate_real_line(const Integrand& f, double center, double scale,
                               const QuadOptions& opts);

/// Double-exponential (tanh-sinh) rule; robust for integrable algebraic
/// singularities at either endpoint. Refines until two successive levels
/// agree to rel_tol.
QuadResult integrate_tanh_sinh(const EndpointIntegrand& f, double a, double b, double rel_tol,
                               int max_level = 12);

}  // namespace loopmass::quad

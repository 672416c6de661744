#pragma once

// Quadrature evaluation of the loop mass through its decomposition into
// Brownian bubbles rooted at the lowest point of the loop. These routes are
// independent of the hypergeometric closed forms and serve to check them.

#include "loopmass/geometry.hpp"
#include "loopmass/quadrature.hpp"

namespace loopmass::quad {

struct IntegratedMass {
  Mass mass;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
};

/// Numerical integral over x in R of
///   f(x, y) = a b / ([(x0 - x)^2 + a^2] [(u0 - x)^2 + b^2]),  a = y0 - y, b = v0 - y.
/// Requires 0 < y < min(y0, v0).
QuadResult inner_integral_f(double y, const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                            double rel_tol = 1e-12);

/// Closed form (2a + d) pi / (c^2 + (2a + d)^2), with c = u0 - x0, d = v0 - y0.
double inner_integral_f_exact(double y, const UpperHalfPoint& z0, const UpperHalfPoint& w0);

/// Full two-dimensional bubble integral: outer y over (0, y0), inner x over R of
///   (8 / 5 pi) (1/4) Im(1/(z0 - p)) Im(1/(w0 - p)) G(sigma(z0 - p, w0 - p)),  p = x + iy,
/// with the points ordered so that y0 <= v0. `tol` is relative.
IntegratedMass mass_via_double_integral(const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                                        double tol = 1e-7);

/// Same integral using that sigma(z0 - p, w0 - p) depends on y only: G is
/// evaluated once per outer node and the inner integral is inner_integral_f.
IntegratedMass mass_via_reduced_integral(const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                                         double tol = 1e-9);

/// The G-free part of the outer integral; compare with loop::a_term.
QuadResult a_term_quadrature(const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                             double tol = 1e-12);

/// The G part of the outer integral; compare with loop::b_term.
QuadResult b_term_quadrature(const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                             double tol = 1e-12);

}  // namespace loopmass::quad

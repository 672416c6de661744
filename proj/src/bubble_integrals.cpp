#include "loopmass/bubble_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "loopmass/error.hpp"
#include "loopmass/loopmeasure.hpp"
#include "loopmass/specialfn.hpp"

namespace loopmass::quad {
namespace {

constexpr double kPi = std::numbers::pi;

struct Frame {
  double x0, y0, u0, v0;
};

// Orders the pair so that y0 <= v0 and rejects coincident points.
Frame frame(const UpperHalfPoint& z0, const UpperHalfPoint& w0) {
  if (z0 == w0) throw DegenerateError("degenerate pair: z and w coincide");
  if (z0.y() <= w0.y()) return {z0.x(), z0.y(), w0.x(), w0.y()};
  return {w0.x(), w0.y(), z0.x(), z0.y()};
}

double f_xy(const Frame& fr, double x, double y) {
  const double a = fr.y0 - y;
  const double b = fr.v0 - y;
  const double dx0 = fr.x0 - x;
  const double du0 = fr.u0 - x;
  return a * b / ((dx0 * dx0 + a * a) * (du0 * du0 + b * b));
}

// 1 - sigma of the pair shifted down by height y: 4 a b / (c^2 + (a + b)^2).
double one_minus_sigma_at(const Frame& fr, double y) {
  const double a = fr.y0 - y;
  const double b = fr.v0 - y;
  const double c = fr.u0 - fr.x0;
  return 4.0 * a * b / (c * c + (a + b) * (a + b));
}

double outer_weight(const Frame& fr, double y) {
  const double c = fr.u0 - fr.x0;
  const double s = 2.0 * (fr.y0 - y) + (fr.v0 - fr.y0);
  return s / (c * c + s * s);
}

QuadResult inner_integral(const Frame& fr, double y, double rel_tol,
                          const std::function<double(double)>& extra) {
  const double a = fr.y0 - y;
  const double b = fr.v0 - y;
  QuadOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = rel_tol;
  auto integrand = [&](double x) { return f_xy(fr, x, y) * extra(x); };
  // Peaks sit at x0 (width a) and u0 (width b); center the tangent map between them.
  const double center = 0.5 * (fr.x0 + fr.u0);
  const double scale = std::max({a, b, 0.5 * std::abs(fr.u0 - fr.x0)});
  return integrate_real_line(integrand, center, scale, opts);
}

}  // namespace

QuadResult inner_integral_f(double y, const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                            double rel_tol) {
  const Frame fr = frame(z0, w0);
  if (!(y > 0.0 && y < fr.y0)) {
    throw DomainError("inner_integral_f: y = " + std::to_string(y) + " outside (0, min(y0, v0))");
  }
  return inner_integral(fr, y, rel_tol, [](double) { return 1.0; });
}

double inner_integral_f_exact(double y, const UpperHalfPoint& z0, const UpperHalfPoint& w0) {
  const Frame fr = frame(z0, w0);
  const double c = fr.u0 - fr.x0;
  const double s = 2.0 * (fr.y0 - y) + (fr.v0 - fr.y0);
  return s * kPi / (c * c + s * s);
}

IntegratedMass mass_via_double_integral(const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                                        double tol) {
  const Frame fr = frame(z0, w0);
  const double prefactor = 8.0 / (5.0 * kPi) * 0.25;
  long evaluations = 0;
  double inner_error = 0.0;

  auto outer = [&](double y) {
    // G of the translated pair, evaluated at every (x, y) node.
    auto g_at = [&](double x) {
      const UpperHalfPoint zs(fr.x0 - x, fr.y0 - y);
      const UpperHalfPoint ws(fr.u0 - x, fr.v0 - y);
      return loop::g_connect_complement(one_minus_sigma(zs, ws));
    };
    const QuadResult inner = inner_integral(fr, y, 0.01 * tol, g_at);
    evaluations += inner.evaluations;
    inner_error = std::max(inner_error, inner.abs_error_estimate);
    return prefactor * inner.value;
  };
  QuadOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = tol;
  const QuadResult res = integrate_1d(outer, 0.0, fr.y0, opts);
  return {{res.value, Mass::Method::quadrature},
          res.abs_error_estimate + prefactor * fr.y0 * inner_error,
          evaluations};
}

IntegratedMass mass_via_reduced_integral(const UpperHalfPoint& z0, const UpperHalfPoint& w0,
                                         double tol) {
  const Frame fr = frame(z0, w0);
  const double prefactor = 8.0 / (5.0 * kPi) * 0.25;
  long evaluations = 0;
  double inner_error = 0.0;
  auto outer = [&](double y) {
    const QuadResult inner =
        inner_integral(fr, y, 0.01 * tol, [](double) { return 1.0; });
    evaluations += inner.evaluations;
    inner_error = std::max(inner_error, inner.abs_error_estimate);
    return prefactor * inner.value * loop::g_connect_complement(one_minus_sigma_at(fr, y));
  };
  QuadOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = tol;
  const QuadResult res = integrate_1d(outer, 0.0, fr.y0, opts);
  return {{res.value, Mass::Method::quadrature},
          res.abs_error_estimate + prefactor * fr.y0 * inner_error,
          evaluations};
}

QuadResult a_term_quadrature(const UpperHalfPoint& z0, const UpperHalfPoint& w0, double tol) {
  const Frame fr = frame(z0, w0);
  QuadOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = tol;
  return integrate_1d([&](double y) { return outer_weight(fr, y); }, 0.0, fr.y0, opts);
}

QuadResult b_term_quadrature(const UpperHalfPoint& z0, const UpperHalfPoint& w0, double tol) {
  const Frame fr = frame(z0, w0);
  QuadOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = tol;
  auto integrand = [&](double y) {
    // g(y) = sigma_y 2F1(1, 4/3; 5/3; 1 - sigma_y) = 1 - G(sigma_y)
    const double s = one_minus_sigma_at(fr, y);
    const double g = (1.0 - s) * special::hyp2f1_c(1.0, 4.0 / 3.0, 5.0 / 3.0, s, 1.0 - s);
    return outer_weight(fr, y) * g;
  };
  return integrate_1d(integrand, 0.0, fr.y0, opts);
}

}  // namespace loopmass::quad

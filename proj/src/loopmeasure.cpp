#include "loopmass/loopmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "loopmass/error.hpp"
#include "loopmass/quadrature.hpp"
#include "loopmass/specialfn.hpp"

namespace loopmass::loop {
namespace {

using special::hyp2f1_c;
using special::hyp3f2_c;

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kFourThirds = 4.0 / 3.0;
constexpr double kFiveThirds = 5.0 / 3.0;

// Gamma(2/3)^2 / Gamma(4/3)
double gamma_ratio() {
  const long double g = std::tgamma(2.0L / 3.0L);
  return static_cast<double>(g * g / std::tgamma(4.0L / 3.0L));
}

// (2F1(1, 4/3; 5/3; s) - 1) / s for s in [0, 1/2] as the series
// sum_{n>=1} (4/3)_n / (5/3)_n s^{n-1}.
double f_minus_one_over_s(double s) {
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < 2000; ++n) {
    term *= (kFourThirds + n - 1) / (kFiveThirds + n - 1);
    const double contrib = term * std::pow(s, n - 1);
    sum += contrib;
    if (contrib <= 1e-17 * sum) break;
  }
  return sum;
}

// Im(1/z) in magnitude: y / |z|^2.
double inv_im(const UpperHalfPoint& z) {
  return z.y() / (z.x() * z.x() + z.y() * z.y());
}

// A/B derivation assumes the lower point comes first.
std::pair<UpperHalfPoint, UpperHalfPoint> oriented(const UpperHalfPoint& z,
                                                   const UpperHalfPoint& w) {
  if (z.y() <= w.y()) return {z, w};
  return {w, z};
}

}  // namespace

double g_connect_complement(double s) {
  if (!(s >= 0.0 && s < 1.0)) {
    throw DomainError("g_connect: 1 - t = " + std::to_string(s) + " outside [0, 1)");
  }
  const double t = 1.0 - s;
  if (s <= special::kDirectSeriesMax) {
    // G = 1 - t (1 + s q) = s - t s q with q = (F - 1)/s; no cancellation as s -> 0.
    return s * (1.0 - t * f_minus_one_over_s(s));
  }
  return 1.0 - t * hyp2f1_c(1.0, kFourThirds, kFiveThirds, s, t);
}

double g_connect(double t, bool allow_zero_limit) {
  if (t == 0.0 && allow_zero_limit) return 1.0;
  if (!(t > 0.0 && t <= 1.0)) {
    throw DomainError("g_connect: t = " + std::to_string(t) + " outside (0, 1]");
  }
  return g_connect_complement(1.0 - t);
}

double mass_from_sigma(double sigma, double one_minus_sigma) {
  if (!(sigma > 0.0)) throw DegenerateError("degenerate pair: sigma = 0");
  const double s = one_minus_sigma;
  if (s <= special::kDirectSeriesMax) {
    // log(1 - s) + s 3F2(s) = sum_{n>=2} (r_{n-1} - 1) s^n / n with
    // r_k = (4/3)_k / (5/3)_k; summing directly avoids the cancellation
    // between the two terms as sigma -> 1.
    double r = 1.0;
    double power = s;
    double sum = 0.0;
    for (int n = 2; n < 4000; ++n) {
      r *= (kFourThirds + n - 2) / (kFiveThirds + n - 2);
      power *= s;
      const double contrib = (r - 1.0) * power / n;
      sum += contrib;
      if (std::abs(contrib) <= 1e-17 * std::abs(sum)) break;
    }
    return -0.1 * sum;
  }
  const double f = hyp3f2_c(1.0, kFourThirds, 1.0, kFiveThirds, 2.0, s, sigma);
  return -0.1 * (std::log(sigma) + s * f);
}

Mass mass_disconnect_two_han(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  return {mass_from_sigma(sigma(z, w), one_minus_sigma(z, w)), Mass::Method::closed_form};
}

Mass mass_disconnect_two_cardy(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const double e = eta(z, w);
  const double ec = one_minus_eta(z, w);
  const double neg_e = -e;
  // eta (eta - 1) = (-eta)(1 - eta) > 0: real cube root, no branch choice.
  const double f3 = hyp3f2_c(1.0, kFourThirds, 1.0, kFiveThirds, 2.0, e, ec);
  const double f2 = hyp2f1_c(1.0, 2.0 / 3.0, kFourThirds, e, ec);
  // The terms cancel to the mass; sum them in extended precision.
  using ld = long double;
  const ld value = -std::numbers::pi_v<ld> / (5.0L * std::sqrt(3.0L)) - 0.1L * ld(e) * f3 -
                   0.1L * (std::log(ld(neg_e)) + std::log(ld(ec))) +
                   ld(gamma_ratio()) / 5.0L * std::cbrt(ld(neg_e)) * std::cbrt(ld(ec)) * f2;
  // Rounding of the cancelling terms can dip a hair below zero far apart.
  return {std::max(static_cast<double>(value), 0.0), Mass::Method::closed_form};
}

Mass mass_disconnect_two_disk(const UnitDiskPoint& z, const UnitDiskPoint& w) {
  return {mass_from_sigma(sigma_disk(z, w), one_minus_sigma_disk(z, w)),
          Mass::Method::closed_form};
}

double schramm_left_pass(const UpperHalfPoint& z, double kappa) {
  if (!(kappa > 0.0 && kappa <= 4.0)) {
    throw DomainError("schramm_left_pass: kappa = " + std::to_string(kappa) +
                      " outside (0, 4]");
  }
  const double p = 4.0 / kappa;
  // With t = -cot(phi) the integrand (1 + t^2)^{-p} dt becomes sin^{2p-2}, and
  // the smaller tail runs over phi in (0, atan2(y, |x|)).
  const double norm = std::exp(std::lgamma(p) - std::lgamma(p - 0.5)) / std::sqrt(kPi);
  const double exponent = 2.0 * p - 2.0;
  auto integrand = [exponent](double phi) { return std::pow(std::sin(phi), exponent); };
  const double alpha = std::atan2(z.y(), std::abs(z.x()));
  quad::QuadOptions opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-14;
  const double tail = norm * quad::integrate_1d(integrand, 0.0, alpha, opts).value;
  const double s = z.x();
  return (s <= 0.0) ? tail : 1.0 - tail;
}

Mass sle_bubble_one_point(const UpperHalfPoint& z) {
  const double q = inv_im(z);
  return {0.25 * q * q, Mass::Method::closed_form};
}

Mass sle_bubble_two_point(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const double g = g_connect_complement(one_minus_sigma(z, w));
  return {0.25 * inv_im(z) * inv_im(w) * g, Mass::Method::closed_form};
}

Mass brownian_bubble_two_point(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  return {1.6 * sle_bubble_two_point(z, w).value, Mass::Method::closed_form};
}

double sle_pass_combo(const UpperHalfPoint& z, const UpperHalfPoint& w, PassageSide sides) {
  const double g = g_connect_complement(one_minus_sigma(z, w));
  const double rz = std::hypot(z.x(), z.y());
  const double rw = std::hypot(w.x(), w.y());
  const double a = z.x() / rz;
  const double b = w.x() / rw;
  // (1 -+ x/|z|) * y/(|z| -+ x) = y/|z|, so the correction is written without
  // the removable quotient.
  const double cross = (z.y() / rz) * (w.y() / rw) * g;
  const double fz = (sides.side_z == Side::left) ? 1.0 + a : 1.0 - a;
  const double fw = (sides.side_w == Side::left) ? 1.0 + b : 1.0 - b;
  const double sign = (sides.side_z == sides.side_w) ? 1.0 : -1.0;
  return 0.25 * (fz * fw + sign * cross);
}

Mass sle_bubble_one_sided(const UpperHalfPoint& z, const UpperHalfPoint& w, OneSided which) {
  if (which == OneSided::neither) return Mass::infinite();
  const double qz = inv_im(z);
  const double qw = inv_im(w);
  const double g = g_connect_complement(one_minus_sigma(z, w));
  const double own = (which == OneSided::z_only) ? qz : qw;
  return {0.25 * (own * own - qz * qw * g), Mass::Method::closed_form};
}

Mass bubble_one_sided(const UpperHalfPoint& z, const UpperHalfPoint& w, OneSided which,
                      OneSidedCoefficient coefficient) {
  const Mass sle = sle_bubble_one_sided(z, w, which);
  if (sle.is_infinite()) return sle;
  const double scale = (coefficient == OneSidedCoefficient::two_fifths) ? 1.6 : 0.4;
  return {scale * sle.value, Mass::Method::closed_form};
}

double a_term(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const auto [lo, hi] = oriented(z, w);
  const double s = one_minus_sigma(lo, hi);
  if (s < 0.5) return -0.25 * std::log1p(-s);
  return -0.25 * std::log(sigma(lo, hi));
}

double b_term(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const auto [lo, hi] = oriented(z, w);
  const double s = one_minus_sigma(lo, hi);
  return 0.25 * s * hyp3f2_c(1.0, kFourThirds, 1.0, kFiveThirds, 2.0, s, sigma(lo, hi));
}

Mass mass_via_ab(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  return {0.4 * (a_term(z, w) - b_term(z, w)), Mass::Method::closed_form};
}

double phi_fn(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw DomainError("phi_fn: t = " + std::to_string(t) + " outside (0, 1)");
  }
  const double tc = 1.0 - t;
  const double e = -t / tc;  // t / (t - 1)
  const double ec = 1.0 / tc;
  const double f3_eta = hyp3f2_c(1.0, kFourThirds, 1.0, kFiveThirds, 2.0, e, ec);
  const double f3_tc = hyp3f2_c(1.0, kFourThirds, 1.0, kFiveThirds, 2.0, tc, t);
  const double f2 = hyp2f1_c(1.0, 2.0 / 3.0, kFourThirds, e, ec);
  return 2.0 * kPi / kSqrt3 + e * f3_eta - tc * f3_tc - 2.0 * std::log1p(-t) -
         2.0 * gamma_ratio() * std::cbrt(t / (tc * tc)) * f2;
}

double phi_derivative_residual(double t) {
  if (!(t >= 0.0 && t < 1.0)) {
    throw DomainError("phi_derivative_residual: t = " + std::to_string(t) + " outside [0, 1)");
  }
  const double tc = 1.0 - t;
  return 2.0 - hyp2f1_c(1.0, 1.0 / 3.0, kFiveThirds, t, tc) -
         tc * hyp2f1_c(1.0, kFourThirds, kFiveThirds, t, tc);
}

double restriction_radius_mass(double r, double eps) {
  if (!(r > 0.0)) throw DomainError("restriction_radius_mass: r must be positive");
  if (!(eps > 0.0) || !(eps < r)) {
    throw DomainError("restriction_radius_mass: need 0 < eps < r");
  }
  const double r2 = r * r;
  const double e2 = eps * eps;
  const double center = -r2 / (r2 - e2);
  const double radius = eps * r / (r2 - e2);
  const double q = (radius * radius) / (center * center);  // = eps^2 / r^2
  // 1 - (1 - q)^{5/8} without cancellation
  return -std::expm1(0.625 * std::log1p(-q)) / e2;
}

namespace detail {

double sle_bubble_prefactor(double kappa) {
  if (!(kappa > 0.0 && kappa < 8.0)) throw DomainError("sle_bubble_prefactor: kappa in (0, 8)");
  return std::tgamma(4.0 / kappa) /
         (std::sqrt(kPi) * std::tgamma((8.0 - kappa) / (2.0 * kappa)) * (8.0 / kappa - 1.0));
}

}  // namespace detail

}  // namespace loopmass::loop

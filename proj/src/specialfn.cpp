#include "loopmass/specialfn.hpp"

#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include "loopmass/error.hpp"
#include "loopmass/quadrature.hpp"

namespace loopmass::special {
namespace {

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(double v) {
  return v <= 0.0 && v == std::nearbyint(v);
}

bool is_integer(double v, double tol = 1e-13) {
  return std::abs(v - std::nearbyint(v)) <= tol * std::max(1.0, std::abs(v));
}

std::string fmt(double v) {
  return std::to_string(v);
}

// Internal working precision. The transformations below combine several
// terms of similar size; x87 extended precision keeps their rounding well
// under one double ulp.
using real = long double;

// Plain pFq power series. Terminates exactly when an upper parameter is a
// non-positive integer; otherwise stops once the geometric tail bound
// |term| r / (1 - r) on the remainder falls below tol * |sum|.
real pfq_series(std::span<const real> upper, std::span<const real> lower, real x,
                const EvalOptions& opts) {
  real term = 1.0L;
  real sum = 1.0L;
  for (int k = 0; k < opts.max_terms; ++k) {
    real ratio = x / (k + 1.0L);
    for (real a : upper) ratio *= (a + k);
    for (real b : lower) ratio /= (b + k);
    term *= ratio;
    sum += term;
    if (term == 0.0L) return sum;
    const real r = std::abs(ratio);
    if (r < 1.0L && std::abs(term) * r <= 0.01L * opts.series_tol * std::abs(sum) * (1.0L - r)) {
      return sum;
    }
  }
  throw NonConvergenceError("hypergeometric series did not converge in " +
                            std::to_string(opts.max_terms) + " terms at x = " +
                            fmt(static_cast<double>(x)));
}

// Gamma(n_1)...Gamma(n_k) / (Gamma(d_1)...Gamma(d_m)) in extended precision.
// Zero when some d_j is a pole.
real gamma_quotient(std::initializer_list<real> num, std::initializer_list<real> den) {
  real q = 1.0L;
  for (real d : den) {
    if (d <= 0.0L && d == std::nearbyint(d)) return 0.0L;
    q /= std::tgamma(d);
  }
  for (real n : num) {
    if (n <= 0.0L && n == std::nearbyint(n)) {
      throw PoleError("gamma_fn: pole at x = " + fmt(static_cast<double>(n)));
    }
    q *= std::tgamma(n);
  }
  return q;
}

real hyp2f1_impl(real a, real b, real c, real x, real xc, const EvalOptions& opts, int depth);

// Gauss connection formula around x = 1; x in (1/2, 1).
real hyp2f1_connection(real a, real b, real c, real x, real xc, const EvalOptions& opts,
                       int depth) {
  const real d = c - a - b;
  if (is_integer(static_cast<double>(d))) {
    throw UnsupportedParametersError("hyp2f1: integer c-a-b = " + fmt(static_cast<double>(d)) +
                                     " needs the logarithmic connection formula");
  }
  real result = 0.0L;
  const real w1 = gamma_quotient({c, d}, {c - a, c - b});
  if (w1 != 0.0L) result += w1 * hyp2f1_impl(a, b, a + b + 1.0L - c, xc, x, opts, depth + 1);
  const real w2 = gamma_quotient({c, -d}, {a, b});
  if (w2 != 0.0L) {
    result += w2 * std::pow(xc, d) *
              hyp2f1_impl(c - a, c - b, c + 1.0L - a - b, xc, x, opts, depth + 1);
  }
  return result;
}

bool nonpositive_integer(real v) { return v <= 0.0L && v == std::nearbyint(v); }

real hyp2f1_impl(real a, real b, real c, real x, real xc, const EvalOptions& opts, int depth) {
  if (depth > 8) throw NonConvergenceError("hyp2f1: transformation recursion too deep");
  if (nonpositive_integer(c)) {
    throw DomainError("hyp2f1: c = " + fmt(static_cast<double>(c)) + " is a non-positive integer");
  }
  if (x == 0.0L) return 1.0L;
  if (x > 1.0L || xc < 0.0L) {
    throw DomainError("hyp2f1: argument " + fmt(static_cast<double>(x)) + " > 1");
  }
  if (nonpositive_integer(a) || nonpositive_integer(b)) {
    const std::array<real, 2> up{a, b};
    const std::array<real, 1> lo{c};
    return pfq_series(up, lo, x, opts);
  }
  if (xc == 0.0L) {
    const real d = c - a - b;
    if (d <= 0.0L) {
      throw DivergenceError("hyp2f1: divergent at x = 1 (c-a-b = " + fmt(static_cast<double>(d)) +
                            ")");
    }
    return gamma_quotient({c, d}, {c - a, c - b});
  }
  if (x < 0.0L) {
    // Pfaff: (1-x)^{-b} 2F1(c-a, b; c; x/(x-1)); the mapped argument lies in (0, 1).
    const real z = -x / xc;
    const real zc = 1.0L / xc;
    return std::pow(xc, -b) * hyp2f1_impl(c - a, b, c, z, zc, opts, depth + 1);
  }
  if (x <= kDirectSeriesMax) {
    const std::array<real, 2> up{a, b};
    const std::array<real, 1> lo{c};
    return pfq_series(up, lo, x, opts);
  }
  return hyp2f1_connection(a, b, c, x, xc, opts, depth);
}

struct EulerPair {
  int upper = -1;
  int lower = -1;
};

// Picks (a_i, b_j) with b_j > a_i > 0 for the Euler integral
//   3F2 = G(b_j) / (G(a_i) G(b_j - a_i)) int_0^1 t^{a_i-1} (1-t)^{b_j-a_i-1} 2F1(rest; x t) dt,
// preferring the pair whose weight is closest to constant. Pairs whose
// remaining 2F1 would need the unsupported logarithmic case are skipped.
EulerPair choose_euler_pair(const std::array<double, 3>& up, const std::array<double, 2>& lo,
                            double x) {
  EulerPair best;
  double best_score = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double ai = up[i];
      const double bj = lo[j];
      if (!(ai > 0.0 && bj > ai)) continue;
      const double r1 = up[(i + 1) % 3];
      const double r2 = up[(i + 2) % 3];
      const double rc = lo[1 - j];
      const bool polynomial = is_nonpositive_integer(r1) || is_nonpositive_integer(r2);
      if (!polynomial && x > kDirectSeriesMax && is_integer(rc - r1 - r2)) continue;
      if (!polynomial && x < 0.0 && x / (x - 1.0) > kDirectSeriesMax && is_integer(r1 - r2)) {
        continue;
      }
      const double score = std::abs(ai - 1.0) + std::abs(bj - ai - 1.0);
      if (score < best_score) {
        best_score = score;
        best = {i, j};
      }
    }
  }
  return best;
}

double hyp3f2_euler(const std::array<double, 3>& up, const std::array<double, 2>& lo, double x,
                    double xc, EulerPair pair, const EvalOptions& opts) {
  const double a = up[pair.upper];
  const double b = lo[pair.lower];
  const double r1 = up[(pair.upper + 1) % 3];
  const double r2 = up[(pair.upper + 2) % 3];
  const double rc = lo[1 - pair.lower];
  const double left_exp = a - 1.0;
  const double right_exp = b - a - 1.0;
  const double prefactor = static_cast<double>(gamma_quotient({b}, {a, b - a}));

  auto integrand = [&](double t, double t_from0, double t_to1) {
    const double y = x * t;
    // 1 - x t without cancellation: (1 - x) + x (1 - t) for x > 0.
    const double yc = (x > 0.0) ? xc + x * t_to1 : 1.0 - y;
    double w = 1.0;
    if (left_exp != 0.0) w *= std::pow(t_from0, left_exp);
    if (right_exp != 0.0) w *= std::pow(t_to1, right_exp);
    return w * static_cast<double>(hyp2f1_impl(r1, r2, rc, y, yc, opts, 0));
  };
  const auto res = quad::integrate_tanh_sinh(integrand, 0.0, 1.0, opts.quad_tol);
  return prefactor * res.value;
}

double hyp3f2_impl(double a1, double a2, double a3, double b1, double b2, double x, double xc,
                   const EvalOptions& opts) {
  opts.validate();
  if (is_nonpositive_integer(b1) || is_nonpositive_integer(b2)) {
    throw DomainError("hyp3f2: lower parameter is a non-positive integer");
  }
  if (x == 0.0) return 1.0;
  if (x > 1.0 || xc < 0.0) throw DomainError("hyp3f2: argument " + fmt(x) + " > 1");
  const std::array<double, 3> up{a1, a2, a3};
  const std::array<double, 2> lo{b1, b2};
  const std::array<real, 3> up_r{a1, a2, a3};
  const std::array<real, 2> lo_r{b1, b2};
  auto series = [&] { return static_cast<double>(pfq_series(up_r, lo_r, x, opts)); };
  const bool polynomial =
      is_nonpositive_integer(a1) || is_nonpositive_integer(a2) || is_nonpositive_integer(a3);
  if (polynomial) return series();
  if (xc == 0.0) {
    const double excess = b1 + b2 - a1 - a2 - a3;
    if (excess <= 0.0) {
      throw DivergenceError("hyp3f2: divergent at x = 1 (parameter excess " + fmt(excess) + ")");
    }
  }
  if (std::abs(x) <= k3F2SeriesRadius) return series();
  const EulerPair pair = choose_euler_pair(up, lo, x);
  if (pair.upper >= 0) return hyp3f2_euler(up, lo, x, xc, pair, opts);
  if (x <= -1.0) {
    throw UnsupportedParametersError("hyp3f2: no convergent evaluation path for x = " + fmt(x));
  }
  return series();
}

}  // namespace

void EvalOptions::validate() const {
  if (!(series_tol > 0.0)) throw DomainError("EvalOptions: series_tol must be positive");
  if (max_terms < 64) throw DomainError("EvalOptions: max_terms must be at least 64");
  if (!(quad_tol > 0.0)) throw DomainError("EvalOptions: quad_tol must be positive");
}

double gamma_fn(double x, const EvalOptions& /*opts*/) {
  if (is_nonpositive_integer(x)) throw PoleError("gamma_fn: pole at x = " + fmt(x));
  return static_cast<double>(gamma_quotient({x}, {}));
}

double rgamma(double x) { return static_cast<double>(gamma_quotient({}, {x})); }

double digamma(double x, const EvalOptions& opts) {
  if (is_nonpositive_integer(x)) throw PoleError("digamma: pole at x = " + fmt(x));
  if (x < 0.5) {
    // psi(x) = psi(1 - x) - pi cot(pi x)
    return digamma(1.0 - x, opts) - kPi / std::tan(kPi * x);
  }
  double shift = 0.0;
  while (x < 12.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic expansion with Bernoulli coefficients B_{2k} / (2k).
  const double inv2 = 1.0 / (x * x);
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

double hyp2f1(double a, double b, double c, double x, const EvalOptions& opts) {
  return hyp2f1_c(a, b, c, x, 1.0 - x, opts);
}

double hyp2f1_c(double a, double b, double c, double x, double one_minus_x,
                const EvalOptions& opts) {
  opts.validate();
  return static_cast<double>(hyp2f1_impl(a, b, c, x, one_minus_x, opts, 0));
}

double hyp3f2(double a1, double a2, double a3, double b1, double b2, double x,
              const EvalOptions& opts) {
  return hyp3f2_impl(a1, a2, a3, b1, b2, x, 1.0 - x, opts);
}

double hyp3f2_c(double a1, double a2, double a3, double b1, double b2, double x,
                double one_minus_x, const EvalOptions& opts) {
  return hyp3f2_impl(a1, a2, a3, b1, b2, x, one_minus_x, opts);
}

double hyp3f2_unit_11a(double a, double b) {
  if (!(a > 0.0) || !(b > a)) {
    throw DomainError("hyp3f2_unit_11a: requires b > a > 0 (a = " + fmt(a) + ", b = " + fmt(b) +
                      ")");
  }
  if (a == 1.0) throw DomainError("hyp3f2_unit_11a: removable singularity at a = 1");
  return (b - 1.0) / (a - 1.0) * (digamma(b - 1.0) - digamma(b - a));
}

double thomae_transform(double a, double b, double c, double e, double f,
                        const EvalOptions& opts) {
  const double s = e + f - a - b - c;
  if (!(a > 0.0)) throw DomainError("thomae_transform: requires a > 0");
  if (!(s > 0.0)) throw DomainError("thomae_transform: requires e+f-a-b-c > 0");
  const double prefactor = static_cast<double>(gamma_quotient({e, f, s}, {a, s + b, s + c}));
  return prefactor * hyp3f2_c(e - a, f - a, s, s + b, s + c, 1.0, 0.0, opts);
}

double integral_2f1(double a, double b, double c, double x, const EvalOptions& opts) {
  opts.validate();
  if (x > 1.0) throw DomainError("integral_2f1: upper limit " + fmt(x) + " > 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0 && c - a - b <= -1.0) {
    throw DivergenceError("integral_2f1: non-integrable singularity at y = 1");
  }
  if (x > 0.0) {
    const double xc = 1.0 - x;
    auto integrand = [&](double y, double /*from0*/, double to_x) {
      return static_cast<double>(hyp2f1_impl(a, b, c, y, xc + to_x, opts, 0));
    };
    return quad::integrate_tanh_sinh(integrand, 0.0, x, opts.quad_tol).value;
  }
  auto integrand = [&](double y, double /*from_x*/, double /*to0*/) {
    return static_cast<double>(hyp2f1_impl(a, b, c, y, 1.0 - y, opts, 0));
  };
  return -quad::integrate_tanh_sinh(integrand, x, 0.0, opts.quad_tol).value;
}

}  // namespace loopmass::special

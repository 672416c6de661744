#include "loopmass/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "loopmass/error.hpp"

namespace loopmass::quad {
namespace {

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value, error;
  int depth;
};

struct ByError {
  bool operator()(const Segment& l, const Segment& r) const {
    if (l.error != r.error) return l.error < r.error;
    return l.a > r.a;  // deterministic tie break
  }
};

Segment gk15(const Integrand& f, double a, double b, int depth, long& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    fv1[j] = f1;
    fv2[j] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  evals += 15;
  const double value = resk * half;
  // QUADPACK scaling of |K - G| by the spread of f about its mean.
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));
  }
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double roundoff = 10.0 * std::numeric_limits<double>::epsilon() * resabs * std::abs(half);
  err = std::max(err, roundoff);
  if (!std::isfinite(value)) {
    throw NonConvergenceError("integrate_1d: non-finite integrand value on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]");
  }
  return {a, b, value, err, depth};
}

}  // namespace

QuadResult integrate_1d(const Integrand& f, double a, double b, double tol) {
  QuadOptions opts;
  opts.abs_tol = tol;
  return integrate_1d(f, a, b, opts);
}

QuadResult integrate_1d(const Integrand& f, double a, double b, const QuadOptions& opts) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("integrate_1d: need finite a < b");
  }
  long evals = 0;
  std::priority_queue<Segment, std::vector<Segment>, ByError> heap;
  Segment first = gk15(f, a, b, 0, evals);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int intervals = 1;

  auto target = [&] { return std::max(opts.abs_tol, opts.rel_tol * std::abs(total)); };

  while (total_err > target()) {
    Segment worst = heap.top();
    if (worst.depth >= opts.max_depth || intervals >= opts.max_intervals) {
      throw NonConvergenceError("integrate_1d: tolerance not reached (error estimate " +
                                std::to_string(total_err) + ")");
    }
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = gk15(f, worst.a, mid, worst.depth + 1, evals);
    Segment right = gk15(f, mid, worst.b, worst.depth + 1, evals);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Re-sum in interval order so the result does not depend on the update path.
  std::vector<Segment> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
  double value = 0.0;
  double err = 0.0;
  for (const auto& s : segs) {
    value += s.value;
    err += s.error;
  }
  return {value, err, evals};
}

QuadResult integrate_real_line(const Integrand& f, double center, double scale,
                               const QuadOptions& opts) {
  if (!(scale > 0.0)) throw DomainError("integrate_real_line: scale must be positive");
  const double half_pi = 0.5 * std::numbers::pi;
  auto mapped = [&](double theta) {
    const double c = std::cos(theta);
    const double x = center + scale * std::tan(theta);
    return f(x) * scale / (c * c);
  };
  return integrate_1d(mapped, -half_pi, half_pi, opts);
}

QuadResult integrate_tanh_sinh(const EndpointIntegrand& f, double a, double b, double rel_tol,
                               int max_level) {
  if (!(a < b)) throw DomainError("integrate_tanh_sinh: need a < b");
  const double half = 0.5 * (b - a);
  const double half_pi = 0.5 * std::numbers::pi;
  constexpr double t_limit = 6.5;
  long evals = 0;

  // Contribution of abscissa t (weight included); returns 0 where the node
  // collapses onto an endpoint in double precision.
  auto term = [&](double t) -> double {
    const double u = half_pi * std::sinh(t);
    const double from_a = 2.0 * half / (1.0 + std::exp(-2.0 * u));
    const double to_b = 2.0 * half / (1.0 + std::exp(2.0 * u));
    if (from_a <= 0.0 || to_b <= 0.0) return 0.0;
    const double x = (u < 0.0) ? a + from_a : b - to_b;
    const double cu = std::cosh(u);
    const double w = half * half_pi * std::cosh(t) / (cu * cu);
    if (w == 0.0) return 0.0;
    ++evals;
    const double fx = f(x, from_a, to_b);
    if (!std::isfinite(fx)) {
      throw NonConvergenceError("integrate_tanh_sinh: non-finite integrand near endpoint");
    }
    return w * fx;
  };

  // Sum over t = k*h for odd k (new nodes) or all k at level 0.
  auto level_sum = [&](double h, bool odd_only) {
    double sum = odd_only ? 0.0 : term(0.0);
    const int step = odd_only ? 2 : 1;
    for (int k = 1;; k += step) {
      const double t = k * h;
      if (t > t_limit) break;
      const double tp = term(t);
      const double tm = term(-t);
      sum += tp + tm;
      if (t > 3.0 && std::abs(tp) + std::abs(tm) == 0.0) break;
    }
    return sum;
  };

  double h = 1.0;
  double sum = level_sum(h, false);
  double estimate = h * sum;
  double err = std::abs(estimate);
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    sum += level_sum(h, true);
    const double next = h * sum;
    err = std::abs(next - estimate);
    estimate = next;
    if (level >= 3 && err <= rel_tol * std::abs(estimate)) {
      return {estimate, err, evals};
    }
  }
  if (err <= 10.0 * rel_tol * std::abs(estimate)) return {estimate, err, evals};
  throw NonConvergenceError("integrate_tanh_sinh: tolerance not reached (relative error " +
                            std::to_string(err / std::abs(estimate)) + ")");
}

}  // namespace loopmass::quad

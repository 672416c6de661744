#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "loopmass/error.hpp"
#include "loopmass/loopmeasure.hpp"
#include "loopmass/montecarlo.hpp"
#include "loopmass/quadrature.hpp"

using namespace loopmass;
using namespace loopmass::mc;
using std::numbers::pi;

namespace {

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Critical value at level 0.001.
double ks_critical(std::size_t n, std::size_t m) {
  return 1.949 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

LoopSample circle(Point2 c, double r, int n, bool ccw = true) {
  LoopSample s;
  for (int k = 0; k <= n; ++k) {
    const double a = (ccw ? 2 : -2) * pi * (k % n) / n;
    s.path.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  s.root = s.path.front();
  s.duration = 1.0;
  return s;
}

double seg_distance(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double l2 = dx * dx + dy * dy;
  double t = l2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

double path_distance(const LoopSample& s, Point2 p) {
  double d = INFINITY;
  for (std::size_t k = 0; k + 1 < s.path.size(); ++k)
    d = std::min(d, seg_distance(p, s.path[k], s.path[k + 1]));
  return d;
}

// Breadth-first fill on a fine grid; walls are cells touched by dense
// samples of every segment. Returns true when p cannot reach the grid border.
bool bfs_enclosed(const LoopSample& s, Point2 p, double cell) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (auto q : s.path) {
    x0 = std::min(x0, q.x), x1 = std::max(x1, q.x), y0 = std::min(y0, q.y), y1 = std::max(y1, q.y);
  }
  x0 -= 3 * cell, y0 -= 3 * cell, x1 += 3 * cell, y1 += 3 * cell;
  const int nx = static_cast<int>((x1 - x0) / cell) + 1, ny = static_cast<int>((y1 - y0) / cell) + 1;
  std::vector<char> wall(static_cast<std::size_t>(nx) * ny, 0), seen(wall.size(), 0);
  auto id = [&](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };
  for (std::size_t k = 0; k + 1 < s.path.size(); ++k) {
    const Point2 a = s.path[k], b = s.path[k + 1];
    const int m = static_cast<int>(4 * std::hypot(b.x - a.x, b.y - a.y) / cell) + 2;
    for (int q = 0; q <= m; ++q) {
      const double f = static_cast<double>(q) / m;
      wall[id(static_cast<int>((a.x + f * (b.x - a.x) - x0) / cell),
              static_cast<int>((a.y + f * (b.y - a.y) - y0) / cell))] = 1;
    }
  }
  if (p.x <= x0 || p.x >= x1 || p.y <= y0 || p.y >= y1) return false;
  std::vector<std::pair<int, int>> queue{{static_cast<int>((p.x - x0) / cell),
                                          static_cast<int>((p.y - y0) / cell)}};
  seen[id(queue[0].first, queue[0].second)] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [i, j] = queue[head];
    if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) return false;
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const auto n = id(i + di, j + dj);
      if (seen[n] || wall[n]) continue;
      seen[n] = 1;
      queue.push_back({i + di, j + dj});
    }
  }
  return true;
}

SoupConfig small_soup() {
  SoupConfig c;
  c.box_halfwidth = 2.0;
  c.box_height = 3.0;
  c.t_min = 0.01;
  c.t_max = 1.0;
  c.steps_per_loop = 64;
  c.n_samples = 20000;
  return c;
}

}  // namespace

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  Rng s1 = Rng::stream(7, 3), s2 = Rng::stream(7, 3), s3 = Rng::stream(7, 4);
  const double u1 = s1.normal();
  CHECK(u1 == s2.normal());
  CHECK(u1 != s3.normal());
  Rng c(1);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double g = c.normal();
    sum += g;
    sum2 += g * g;
  }
  CHECK(std::fabs(sum / n) < 4 / std::sqrt(n));
  CHECK(std::fabs(sum2 / n - 1) < 4 * std::sqrt(2.0 / n));
}

TEST_CASE("bridge endpoints and midpoint variance") {
  Rng rng(5);
  const Point2 root{0.3, 1.7};
  const auto s = sample_bridge(root, 2.0, 100, rng);
  CHECK(s.path.size() == 101);
  CHECK(s.path.front().x == root.x);
  CHECK(s.path.front().y == root.y);
  CHECK(s.path.back().x == root.x);
  CHECK(s.path.back().y == root.y);
  CHECK(s.duration == 2.0);

  const double t = 3.0;
  const int n = 100000;
  double sx = 0, sxx = 0, sy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    const auto b = sample_bridge({0, 0}, t, 2, rng);
    REQUIRE(b.path.size() == 3);
    sx += b.path[1].x, sxx += b.path[1].x * b.path[1].x;
    sy += b.path[1].y, syy += b.path[1].y * b.path[1].y;
  }
  const double want = t / 4;
  const double se = want * std::sqrt(2.0 / n);
  CHECK(std::fabs(sxx / n - (sx / n) * (sx / n) - want) < 3 * se);
  CHECK(std::fabs(syy / n - (sy / n) * (sy / n) - want) < 3 * se);
  CHECK_THROWS_AS(sample_bridge(root, 0.0, 10, rng), DomainError);
  CHECK_THROWS_AS(sample_bridge(root, 1.0, 1, rng), DomainError);
}

TEST_CASE("bridge Brownian scaling") {
  Rng rng(9);
  const int n = 10000;
  std::vector<double> small, large;
  for (int i = 0; i < n; ++i) {
    const auto a = sample_bridge({0, 0}, 1.0, 64, rng);
    const auto b = sample_bridge({0, 0}, 4.0, 64, rng);
    double ma = 0, mb = 0;
    for (auto p : a.path) ma = std::max(ma, std::hypot(p.x, p.y));
    for (auto p : b.path) mb = std::max(mb, std::hypot(p.x, p.y));
    small.push_back(2 * ma);
    large.push_back(mb);
  }
  CHECK(ks_statistic(small, large) < ks_critical(n, n));
}

TEST_CASE("disconnects on hand-built loops") {
  const auto c = circle({0, 2}, 1, 64);
  CHECK(disconnects(c, {0, 2}, 0.02));
  CHECK_FALSE(disconnects(c, {0, 0.5}, 0.02));
  CHECK_FALSE(disconnects(c, {3, 2}, 0.02));
  CHECK_THROWS_AS(disconnects(c, {std::sqrt(0.5), 2 + std::sqrt(0.5)}, 0.02), IndeterminateError);
  CHECK_THROWS_AS(disconnects(c, {0, 2}, 0.0), DomainError);

  // Two turns in opposite directions: winding number zero at the centre.
  LoopSample twice = circle({0, 2}, 1, 64, true);
  const auto outer = circle({0, 2}, 1.5, 96, false);
  twice.path.insert(twice.path.end(), outer.path.begin(), outer.path.end());
  twice.path.push_back(twice.path.front());
  CHECK(disconnects(twice, {0, 2}, 0.02));
  CHECK(disconnects(twice, {0, 3.25}, 0.02));

  // A thick C open to the right: outer arc, mouth, inner arc back.
  LoopSample cee;
  const int m = 80;
  for (int k = 0; k <= m; ++k) {
    const double a = 0.3 + (2 * pi - 0.6) * k / m;
    cee.path.push_back({1.2 * std::cos(a), 2 + 1.2 * std::sin(a)});
  }
  for (int k = m; k >= 0; --k) {
    const double a = 0.3 + (2 * pi - 0.6) * k / m;
    cee.path.push_back({0.8 * std::cos(a), 2 + 0.8 * std::sin(a)});
  }
  cee.path.push_back(cee.path.front());
  cee.root = cee.path.front();
  CHECK_FALSE(disconnects(cee, {0, 2}, 0.02));
  CHECK(disconnects(cee, {-1.0, 2}, 0.02));

  // A spiral-closed pocket compared against a fine breadth-first fill.
  LoopSample hook;
  for (int k = 0; k <= 120; ++k) {
    const double a = 2.2 * pi * k / 120;
    const double r = 1.5 - 0.6 * k / 120;
    hook.path.push_back({r * std::cos(a), 2 + r * std::sin(a)});
  }
  hook.path.push_back({1.6, 2.0});
  hook.path.push_back(hook.path.front());
  hook.root = hook.path.front();
  const double h = 0.02;
  int compared = 0;
  for (const LoopSample* loop : std::vector<const LoopSample*>{&c, &twice, &cee, &hook}) {
    for (int i = -10; i <= 10; ++i)
      for (int j = 0; j <= 20; ++j) {
        const Point2 p{0.2 * i + 0.013, 0.2 + 0.2 * j + 0.007};
        if (path_distance(*loop, p) < 3 * h) continue;
        CHECK(disconnects(*loop, p, h) == bfs_enclosed(*loop, p, h / 10));
        ++compared;
      }
  }
  CHECK(compared > 1000);
}

TEST_CASE("flood fill resolution convergence") {
  Rng rng(31);
  int decided = 0, disagree = 0, enclosed = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point2 root{0, 2};
    const auto s = sample_bridge(root, 1.0, 256, rng);
    const Point2 p{root.x + 0.5 * rng.normal(), root.y + 0.5 * rng.normal()};
    try {
      const bool a = disconnects(s, p, 0.02);
      const bool b = disconnects(s, p, 0.01);
      ++decided;
      enclosed += b;
      disagree += (a != b);
    } catch (const IndeterminateError&) {
    }
  }
  CHECK(decided > 8000);
  CHECK(enclosed > 500);
  CHECK(disagree < 0.01 * decided);
}

TEST_CASE("soup configuration checks") {
  SoupConfig c = small_soup();
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.t_min = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.steps_per_loop = 8;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.grid_resolution = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.box_height = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(estimate_disconnect_mass({0, 1}, {0, 5}, c), ConfigError);
  CHECK_THROWS_AS(estimate_disconnect_mass({3, 1}, {0, 2}, c), ConfigError);
  CHECK_THROWS_AS(estimate_disconnect_mass({0, 1}, {0, 1}, c), DegenerateError);
  CHECK(truncated_measure(c) == doctest::Approx(2 * 2 * 3 / (2 * pi) * 99).epsilon(1e-14));
}

TEST_CASE("empty duration range gives no mass") {
  SoupConfig c;
  c.t_max = c.t_min * (1 + 1e-9);
  c.n_samples = 20000;
  const auto r = estimate_disconnect_mass({0, 1}, {0, 2}, c);
  CHECK(r.estimate.mass_scale < 1e-4);
  CHECK(r.estimate.mean == 0.0);
  CHECK(r.estimate.std_error == 0.0);
}

TEST_CASE("estimates are bit-reproducible across runs and workers") {
  SoupConfig c;
  c.t_min = 0.05;
  c.n_samples = 100000;
  c.seed = 77;
  const auto a = estimate_disconnect_mass({0, 1}, {0, 2}, c);
  const auto b = estimate_disconnect_mass({0, 1}, {0, 2}, c);
  c.workers = 3;
  const auto d = estimate_disconnect_mass({0, 1}, {0, 2}, c);
  CHECK(a.estimate.mean == b.estimate.mean);
  CHECK(a.estimate.std_error == b.estimate.std_error);
  CHECK(a.estimate.mean == d.estimate.mean);
  CHECK(a.estimate.std_error == d.estimate.std_error);
  CHECK(a.discretization_budget == d.discretization_budget);
  CHECK(a.estimate.n == 100000);
  CHECK(a.estimate.mean > 0.0);
  c.seed = 78;
  CHECK(estimate_disconnect_mass({0, 1}, {0, 2}, c).estimate.mean != a.estimate.mean);
}

TEST_CASE("standard error follows the square-root law") {
  SoupConfig c = small_soup();
  std::vector<double> logn, logse;
  for (std::int64_t n : {10000, 20000, 40000, 100000}) {
    c.n_samples = n;
    const auto r = estimate_soup_event({0, 1}, {0, 2}, c, SoupEvent::neither);
    REQUIRE(r.estimate.std_error > 0.0);
    logn.push_back(std::log(static_cast<double>(n)));
    logse.push_back(std::log(r.estimate.std_error));
  }
  // Doubling n divides the error by sqrt 2, quadrupling halves it.
  CHECK(std::exp(logse[1] - logse[0]) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(0.1));
  CHECK(std::exp(logse[2] - logse[0]) == doctest::Approx(0.5).epsilon(0.1));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logn.size(); ++i) mx += logn[i], my += logse[i];
  mx /= logn.size(), my /= logn.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < logn.size(); ++i) {
    sxy += (logn[i] - mx) * (logse[i] - my);
    sxx += (logn[i] - mx) * (logn[i] - mx);
  }
  CHECK(std::fabs(sxy / sxx + 0.5) < 0.05);
}

TEST_CASE("fixed-root survival matches a one-dimensional integral") {
  SoupConfig c = small_soup();
  const double y0 = 0.3;
  const auto exact = quad::integrate_1d(
      [&](double t) { return (1 - std::exp(-2 * y0 * y0 / t)) / (2 * pi * t * t); }, c.t_min,
      c.t_max, quad::QuadOptions{0.0, 1e-12});
  for (std::int64_t n : {20000, 200000}) {
    c.n_samples = n;
    const auto e = estimate_fixed_root_survival({0.0, y0}, c);
    CHECK(std::fabs(e.mean - exact.value) < 3 * e.std_error);
    CHECK(e.std_error < 0.05 * exact.value);
  }
  CHECK_THROWS_AS(estimate_fixed_root_survival({0.0, 0.0}, c), ConfigError);
}

TEST_CASE("loop soup estimate covers the closed form") {
  SoupConfig c;
  c.n_samples = 2'000'000;
  const auto r = estimate_disconnect_mass({0, 1}, {0, 2}, c);
  const double closed = loop::mass_disconnect_two_han({0, 1}, {0, 2}).value;
  REQUIRE(r.truncation_budget.has_value());
  const double budget = *r.truncation_budget + r.discretization_budget;
  CHECK(std::fabs(r.estimate.mean - closed) <= 3 * r.estimate.std_error + budget);
  CHECK(r.indeterminate == 0);
  CHECK(r.estimate.mass_scale == doctest::Approx(truncated_measure(c)));
  CHECK(r.estimate.mean > 0.0);
}

TEST_CASE("truncation budget shrinks with the sampled region") {
  SoupConfig c;
  const UpperHalfPoint z{0, 1}, w{0, 2};
  const double base = truncation_budget(z, w, c);
  CHECK(base > 0.0);
  // Longer loops also leave the box more often, so grow both together.
  auto more = c;
  more.t_max = 4 * c.t_max;
  more.box_halfwidth = 2 * c.box_halfwidth;
  more.box_height = 2 * c.box_height;
  CHECK(truncation_budget(z, w, more) < base);
  more = c;
  more.box_halfwidth = 16;
  more.box_height = 20;
  CHECK(truncation_budget(z, w, more) < base);
  more = c;
  more.t_min = 0.01;
  CHECK(truncation_budget(z, w, more) > base);
  // Events with a divergent truncated mass carry no truncation bound.
  auto small = small_soup();
  small.n_samples = 1000;
  CHECK_FALSE(estimate_soup_event(z, w, small, SoupEvent::neither).truncation_budget.has_value());
}

TEST_CASE("SLE trace basics") {
  Rng rng(3);
  const auto straight = sle_trace(1e-12, 1.0, 1000, rng);
  CHECK(straight.size() == 1001);
  CHECK(straight.front() == std::complex<double>(0, 0));
  CHECK(std::abs(straight.back() - std::complex<double>(0, 2)) < 1e-5);
  for (const auto& p : straight) CHECK(std::fabs(p.real()) < 1e-5);
  CHECK_THROWS_AS(sle_trace(5.0, 1.0, 1000, rng), DomainError);
  CHECK_THROWS_AS(sle_trace(8.0 / 3, 1.0, 99, rng), DomainError);
  CHECK_THROWS_AS(sle_trace(8.0 / 3, 0.0, 1000, rng), DomainError);
}

TEST_CASE("half-plane capacity") {
  const Polyline slit{{0, 0}, {0, 1.5}};
  CHECK(half_plane_capacity(slit) == doctest::Approx(1.5 * 1.5 / 2).epsilon(1e-12));
  Rng rng(12);
  for (double T : {0.5, 2.0}) {
    const auto trace = sle_trace(8.0 / 3, T, 10000, rng);
    CHECK(std::fabs(half_plane_capacity(trace) - 2 * T) < 0.02 * 2 * T);
  }
  CHECK_THROWS_AS(half_plane_capacity(Polyline{{0, 0}}), DomainError);
  CHECK_THROWS_AS(half_plane_capacity(Polyline{{0, 1}, {0, 2}}), DomainError);
}

TEST_CASE("SLE Brownian scaling") {
  Rng rng(44);
  const int n = 10000;
  std::vector<double> small, large;
  for (int i = 0; i < n; ++i) {
    small.push_back(2 * std::abs(sle_trace(8.0 / 3, 1.0, 100, rng).back()));
    large.push_back(std::abs(sle_trace(8.0 / 3, 4.0, 100, rng).back()));
  }
  CHECK(ks_statistic(small, large) < ks_critical(n, n));
}

TEST_CASE("pass combos on the symmetry axis") {
  SleConfig c;
  c.n_traces = 20000;
  c.step_check = false;
  const auto r = estimate_pass_combo({0, 1}, {0, 2}, c);
  CHECK(r.decided + r.undecided == c.n_traces);
  CHECK(r.counts[0] + r.counts[1] + r.counts[2] + r.counts[3] == r.decided);
  CHECK(std::fabs(r.left_z.mean - 0.5) < 3 * r.left_z.std_error + r.bias_budget);
  CHECK(std::fabs(r.left_w.mean - 0.5) < 3 * r.left_w.std_error + r.bias_budget);
  const double n = static_cast<double>(r.decided);
  const double p1 = r.counts[1] / n, p2 = r.counts[2] / n;
  const double se = std::sqrt((p1 + p2 - (p1 - p2) * (p1 - p2)) / n);
  CHECK(std::fabs(p1 - p2) < 3 * se);
  const double q0 = r.counts[0] / n, q3 = r.counts[3] / n;
  CHECK(std::fabs(q0 - q3) < 3 * std::sqrt((q0 + q3 - (q0 - q3) * (q0 - q3)) / n));
}

TEST_CASE("pass marginals follow Schramm's formula for other kappa") {
  SleConfig c;
  c.kappa = 2.0;
  c.n_traces = 20000;
  c.seed = 5;
  const UpperHalfPoint z{1, 1}, w{-0.5, 2};
  const auto r = estimate_pass_combo(z, w, c);
  CHECK(std::fabs(r.left_z.mean - loop::schramm_left_pass(z, 2.0)) <
        3 * r.left_z.std_error + r.bias_budget);
  CHECK(std::fabs(r.left_w.mean - loop::schramm_left_pass(w, 2.0)) <
        3 * r.left_w.std_error + r.bias_budget);
  CHECK(r.bias_budget >= 0.0);
  SleConfig bad;
  bad.kappa = 6;
  CHECK_THROWS_AS(estimate_pass_combo(z, w, bad), ConfigError);
  CHECK_THROWS_AS(estimate_pass_combo(z, z, SleConfig{}), DegenerateError);
}

TEST_CASE("pass combos are reproducible") {
  SleConfig c;
  c.n_traces = 2000;
  c.step_check = false;
  const auto a = estimate_pass_combo({1, 1}, {-0.5, 2}, c);
  c.workers = 2;
  const auto b = estimate_pass_combo({1, 1}, {-0.5, 2}, c);
  for (int k = 0; k < 4; ++k) CHECK(a.counts[k] == b.counts[k]);
  CHECK(a.left_z.mean == b.left_z.mean);
}

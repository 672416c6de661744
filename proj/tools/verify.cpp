#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "loopmass/bubble_integrals.hpp"
#include "loopmass/geometry.hpp"
#include "loopmass/loopmeasure.hpp"
#include "loopmass/montecarlo.hpp"
#include "loopmass/quadrature.hpp"
#include "loopmass/specialfn.hpp"

namespace loopmass::cli {
namespace {

using special::gamma_fn;
using special::hyp2f1;
using special::hyp3f2;

constexpr double kPi = std::numbers::pi;
const double kUnit3F2 = 2.0 * kPi / std::sqrt(3.0);

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

// Seeded pairs with x in [-3, 3], y in [0.05, 3].
std::vector<std::pair<UpperHalfPoint, UpperHalfPoint>> random_pairs(int n, std::uint64_t seed) {
  mc::Rng rng(seed);
  std::vector<std::pair<UpperHalfPoint, UpperHalfPoint>> out;
  while (static_cast<int>(out.size()) < n) {
    const UpperHalfPoint z(6.0 * rng.uniform() - 3.0, 0.05 + 2.95 * rng.uniform());
    const UpperHalfPoint w(6.0 * rng.uniform() - 3.0, 0.05 + 2.95 * rng.uniform());
    if (!(z == w)) out.emplace_back(z, w);
  }
  return out;
}

// Evenly spaced grid of n points strictly inside (a, b).
std::vector<double> open_grid(double a, double b, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = a + (b - a) * (k + 1) / (n + 1);
  return g;
}

std::vector<double> phi_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 99; ++k) g.push_back(k / 100.0);
  return g;
}

double worst(const std::vector<double>& xs, const std::function<double(double)>& f) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, f(x));
  return m;
}

struct Collector {
  double scale;
  std::vector<Check> checks;
  void add(std::string name, double residual, double threshold) {
    const double t = threshold * scale;
    checks.push_back({std::move(name), residual, t, residual < t});
  }
};

void identities(Collector& c) {
  c.add("gamma_reflection max rel", worst(open_grid(0.0, 1.0, 50), [](double x) {
          return rel(gamma_fn(x) * gamma_fn(1.0 - x), kPi / std::sin(kPi * x));
        }), 1e-12);
  {
    const double a = 1.0 / 3.0, b = 1.0, cc = 5.0 / 3.0;
    c.add("pfaff max rel", worst(open_grid(-5.0, 0.9, 60), [&](double x) {
            return rel(std::pow(1.0 - x, -b) * hyp2f1(cc - a, b, cc, x / (x - 1.0)),
                       hyp2f1(a, b, cc, x));
          }), 1e-11);
  }
  {
    const double a = 1.0, b = 4.0 / 3.0, cc = 5.0 / 3.0;
    const double g1 = gamma_fn(cc) * gamma_fn(cc - a - b) / (gamma_fn(cc - a) * gamma_fn(cc - b));
    const double g2 = gamma_fn(cc) * gamma_fn(a + b - cc) / (gamma_fn(a) * gamma_fn(b));
    c.add("connection max rel", worst(open_grid(0.05, 0.95, 60), [&](double x) {
            const double rhs = g1 * hyp2f1(a, b, a + b - cc + 1.0, 1.0 - x) +
                               std::pow(1.0 - x, cc - a - b) * g2 *
                                   hyp2f1(cc - a, cc - b, cc - a - b + 1.0, 1.0 - x);
            return rel(rhs, hyp2f1(a, b, cc, x));
          }), 1e-10);
  }
  {
    const double a = 1.0 / 3.0, b = 2.0 / 3.0, cc = 1.0 / 3.0;
    c.add("euler max rel", worst(open_grid(0.0, 0.9, 60), [&](double x) {
            return rel(std::pow(1.0 - x, cc - a - b) * hyp2f1(cc - a, cc - b, cc, x),
                       hyp2f1(a, b, cc, x));
          }), 1e-11);
  }
  std::vector<double> identity_grid = open_grid(0.0, 0.95, 95);
  identity_grid.insert(identity_grid.begin(), 0.0);
  identity_grid.push_back(0.95);
  c.add("phi derivative identity residual max", worst(identity_grid, [](double t) {
          return std::abs(loop::phi_derivative_residual(t));
        }), 1e-12);
  c.add("phi derivative identity residual on phi grid max", worst(phi_grid(), [](double t) {
          return std::abs(loop::phi_derivative_residual(t));
        }), 1e-12);
  c.add("phi_grid max |φ|", worst(phi_grid(), [](double t) { return std::abs(loop::phi_fn(t)); }),
        1e-7);
  c.add("3F2(1,4/3,1;5/3,2;1) rel to 2π/√3",
        rel(hyp3f2(1.0, 4.0 / 3.0, 1.0, 5.0 / 3.0, 2.0, 1.0), kUnit3F2), 1e-10);
  c.add("digamma gap rel to π/√3",
        rel(special::digamma(2.0 / 3.0) - special::digamma(1.0 / 3.0), kPi / std::sqrt(3.0)),
        1e-12);
  c.add("partial-fraction sum vs 3F2(1,1,4/3;2,5/3;1)",
        rel(special::hyp3f2_unit_11a(4.0 / 3.0, 5.0 / 3.0),
            hyp3f2(1.0, 1.0, 4.0 / 3.0, 2.0, 5.0 / 3.0, 1.0)),
        1e-9);
  c.add("thomae(1,4/3,1;5/3,2) rel to 2π/√3",
        rel(special::thomae_transform(1.0, 4.0 / 3.0, 1.0, 5.0 / 3.0, 2.0), kUnit3F2), 1e-9);
  c.add("thomae(1,1,4/3;2,5/3) vs 3F2 at 1",
        rel(special::thomae_transform(1.0, 1.0, 4.0 / 3.0, 2.0, 5.0 / 3.0),
            hyp3f2(1.0, 1.0, 4.0 / 3.0, 2.0, 5.0 / 3.0, 1.0)),
        1e-9);
}

void theorem(Collector& c) {
  double cardy = 0.0, ab = 0.0, combo = 0.0, additivity = 0.0, invariance = 0.0;
  for (const auto& [z, w] : random_pairs(200, 20240521)) {
    const double han = loop::mass_disconnect_two_han(z, w).value;
    cardy = std::max(cardy, rel(loop::mass_disconnect_two_cardy(z, w).value, han));
    ab = std::max(ab, rel(loop::mass_via_ab(z, w).value, han));
    double sum = 0.0;
    for (auto sz : {loop::Side::left, loop::Side::right}) {
      for (auto sw : {loop::Side::left, loop::Side::right}) sum += loop::sle_pass_combo(z, w, {sz, sw});
    }
    combo = std::max(combo, std::abs(sum - 1.0));
    const double one_sided = loop::sle_bubble_one_sided(z, w, loop::OneSided::z_only).value;
    additivity = std::max(additivity, std::abs(loop::sle_bubble_two_point(z, w).value + one_sided -
                                               loop::sle_bubble_one_point(z).value));
    const double s = 2.5, t = -1.25;
    const UpperHalfPoint zs(s * z.x() + t, s * z.y());
    const UpperHalfPoint ws(s * w.x() + t, s * w.y());
    invariance = std::max(invariance, rel(loop::mass_disconnect_two_han(zs, ws).value, han));
  }
  c.add("cardy vs han max rel (200 pairs)", cardy, 1e-9);
  c.add("via_ab vs han max rel (200 pairs)", ab, 1e-10);
  c.add("translation/scaling invariance max rel", invariance, 1e-12);
  c.add("pass combos sum to 1 max dev", combo, 1e-12);
  c.add("bubble additivity max abs", additivity, 1e-13);

  mc::Rng rng(77);
  double disk = 0.0;
  for (int k = 0; k < 100; ++k) {
    auto draw = [&] {
      const double r = 0.95 * std::sqrt(rng.uniform());
      const double a = 2.0 * kPi * rng.uniform();
      return UnitDiskPoint(r * std::cos(a), r * std::sin(a));
    };
    const UnitDiskPoint z = draw();
    const UnitDiskPoint w = draw();
    disk = std::max(disk, rel(loop::mass_disconnect_two_disk(z, w).value,
                              loop::mass_disconnect_two_han(disk_to_half(z), disk_to_half(w)).value));
  }
  c.add("disk vs mapped half-plane max rel (100 pairs)", disk, 1e-11);
  c.add("schramm (1,1) rel to (1+1/√2)/2",
        rel(loop::schramm_left_pass(UpperHalfPoint(1.0, 1.0), 8.0 / 3.0),
            0.5 * (1.0 + 1.0 / std::numbers::sqrt2)),
        1e-12);
  c.add("sle bubble prefactor at 8/3 rel to 1/4",
        rel(loop::detail::sle_bubble_prefactor(8.0 / 3.0), 0.25), 1e-12);
}

void integrals(Collector& c) {
  double inner = 0.0;
  mc::Rng rng(99);
  for (const auto& [z, w] : random_pairs(10, 31337)) {
    const double ymin = std::min(z.y(), w.y());
    for (int k = 0; k < 5; ++k) {
      const double y = ymin * (0.02 + 0.96 * rng.uniform());
      inner = std::max(inner, rel(quad::inner_integral_f(y, z, w).value,
                                  quad::inner_integral_f_exact(y, z, w)));
    }
  }
  c.add("inner integral vs closed form max rel (50 samples)", inner, 1e-9);

  double a_err = 0.0, b_err = 0.0, reduced = 0.0;
  for (const auto& [z, w] : random_pairs(10, 4242)) {
    a_err = std::max(a_err, rel(quad::a_term_quadrature(z, w).value, loop::a_term(z, w)));
    b_err = std::max(b_err, rel(quad::b_term_quadrature(z, w).value, loop::b_term(z, w)));
    reduced = std::max(reduced, rel(quad::mass_via_reduced_integral(z, w).mass.value,
                                    loop::mass_disconnect_two_han(z, w).value));
  }
  c.add("A quadrature vs closed form max rel", a_err, 1e-8);
  c.add("B quadrature vs closed form max rel", b_err, 1e-8);
  c.add("reduced bubble integral vs closed form max rel", reduced, 1e-8);

  double full = 0.0;
  std::vector<std::pair<UpperHalfPoint, UpperHalfPoint>> pairs = random_pairs(2, 555);
  pairs.insert(pairs.begin(), {UpperHalfPoint(0.0, 1.0), UpperHalfPoint(0.0, 2.0)});
  for (const auto& [z, w] : pairs) {
    full = std::max(full, rel(quad::mass_via_double_integral(z, w).mass.value,
                              loop::mass_disconnect_two_han(z, w).value));
  }
  c.add("double bubble integral vs closed form max rel", full, 1e-6);

  const auto r = quad::integrate_tanh_sinh(
      [](double y, double, double to_one) {
        return special::hyp2f1_c(1.0, 4.0 / 3.0, 5.0 / 3.0, y, to_one);
      },
      0.0, 1.0, 1e-13);
  c.add("∫₀¹ 2F1(1,4/3;5/3;y) dy rel to 2π/√3", rel(r.value, kUnit3F2), 1e-9);
}

}  // namespace

std::vector<Check> run_suite(Suite suite, double threshold_scale) {
  Collector c{threshold_scale, {}};
  if (suite == Suite::identities || suite == Suite::all) identities(c);
  if (suite == Suite::theorem || suite == Suite::all) theorem(c);
  if (suite == Suite::integrals || suite == Suite::all) integrals(c);
  return c.checks;
}

std::string format_check(const Check& c) {
  char buf[64];
  const int e = static_cast<int>(std::lround(std::log10(c.threshold)));
  if (std::abs(c.threshold - std::pow(10.0, e)) <= 1e-9 * c.threshold) {
    std::snprintf(buf, sizeof buf, "1e%d", e);
  } else {
    std::snprintf(buf, sizeof buf, "%.3g", c.threshold);
  }
  char res[64];
  std::snprintf(res, sizeof res, "%.3e", c.residual);
  return c.name + " < " + buf + ": " + (c.pass ? "PASS" : "FAIL") + " (residual " + res + ")";
}

}  // namespace loopmass::cli

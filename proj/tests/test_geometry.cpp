#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "loopmass/error.hpp"
#include "loopmass/geometry.hpp"

using namespace loopmass;

namespace {
double rel(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

struct PairGen {
  std::mt19937_64 eng{20240611};
  std::uniform_real_distribution<double> ux{-5.0, 5.0};
  std::uniform_real_distribution<double> uy{0.01, 5.0};
  UpperHalfPoint next() { return {ux(eng), uy(eng)}; }
};
}  // namespace

TEST_CASE("point validation") {
  CHECK_THROWS_AS(UpperHalfPoint(0, 0), DomainError);
  CHECK_THROWS_AS(UpperHalfPoint(0, -1), DomainError);
  CHECK_THROWS_AS(UpperHalfPoint(NAN, 1), DomainError);
  CHECK_THROWS_AS(UpperHalfPoint(INFINITY, 1), DomainError);
  CHECK_NOTHROW(UpperHalfPoint(0, 1e-300));
  CHECK_THROWS_AS(UnitDiskPoint(1, 0), DomainError);
  CHECK_THROWS_AS(UnitDiskPoint(0.8, 0.6), DomainError);
  CHECK_NOTHROW(UnitDiskPoint(-0.999999, 0));
}

TEST_CASE("sigma examples") {
  const UpperHalfPoint z{0.3, 0.7}, w{-1.2, 2.0};
  CHECK(rel(sigma({0, 1}, {0, 2}), 1.0 / 9) < 1e-15);
  CHECK(sigma(z, w) == sigma(w, z));
  CHECK(rel(sigma({3.7 * 0.3, 3.7 * 0.7}, {3.7 * -1.2, 3.7 * 2.0}), sigma(z, w)) < 1e-14);
  CHECK(rel(one_minus_sigma({0, 1}, {0, 2}), 8.0 / 9) < 1e-15);
  CHECK_THROWS_AS(sigma(z, z), DegenerateError);
  CHECK_THROWS_AS(eta(z, z), DegenerateError);
}

TEST_CASE("eta examples") {
  CHECK(rel(eta({0, 1}, {0, 2}), -1.0 / 8) < 1e-15);
  const UpperHalfPoint z{1, 1}, w{-2, 3};
  const double s = sigma(z, w);
  CHECK(rel(eta(z, w), s / (s - 1)) < 1e-14);
  CHECK(rel(eta({0, 1}, {0, 1.01}), -0.01 * 0.01 / (4 * 1.01)) < 1e-12);
  CHECK(rel(one_minus_eta(z, w), 1 - eta(z, w)) < 1e-14);
}

TEST_CASE("disk quantities") {
  CHECK(rel(sigma_disk({0, 0}, {0.5, 0}), 0.25) < 1e-15);
  const UnitDiskPoint z{0.1, 0.2}, w{-0.3, 0.4};
  // Oracle: Cayley map written out in complex arithmetic.
  const auto cayley = [](const UnitDiskPoint& p) {
    const std::complex<double> q{p.re(), p.im()};
    const auto h = std::complex<double>{0, 1} * (1.0 + q) / (1.0 - q);
    return UpperHalfPoint{h.real(), h.imag()};
  };
  CHECK(rel(sigma_disk(z, w), sigma(cayley(z), cayley(w))) < 1e-14);
  CHECK(sigma_disk(z, w) == sigma_disk(w, z));
  CHECK(rel(one_minus_sigma_disk(z, w), 1 - sigma_disk(z, w)) < 1e-14);
  CHECK_THROWS_AS(sigma_disk(z, z), DegenerateError);
}

TEST_CASE("disk_to_half") {
  const auto o = disk_to_half({0, 0});
  CHECK(o.x() == 0.0);
  CHECK(o.y() == doctest::Approx(1.0).epsilon(1e-15));
  const auto h = disk_to_half({0.5, 0});
  CHECK(std::fabs(h.x()) < 1e-15);
  CHECK(rel(h.y(), 3.0) < 1e-15);
  const double eps = 1e-6;
  const auto b = disk_to_half({-1 + eps, 0});
  CHECK(rel(b.y(), eps / (2 - eps)) < 1e-9);
}

TEST_CASE("parsing") {
  const auto p = parse_upper_half_point("1.5,2");
  CHECK(p.x() == 1.5);
  CHECK(p.y() == 2.0);
  CHECK(parse_upper_half_point(" -0.25 , 1e-3 ").y() == 1e-3);
  CHECK_THROWS_AS(parse_upper_half_point("1;2"), DomainError);
  CHECK_THROWS_AS(parse_upper_half_point("1,2,3"), DomainError);
  CHECK_THROWS_AS(parse_upper_half_point("1,0"), DomainError);
  CHECK_THROWS_AS(parse_upper_half_point("a,b"), DomainError);
  CHECK_THROWS_AS(parse_unit_disk_point("1,0"), DomainError);
  CHECK(parse_unit_disk_point("0.1,-0.2").im() == -0.2);
}

TEST_CASE("sigma and eta properties on random pairs") {
  PairGen gen;
  for (int i = 0; i < 1000; ++i) {
    const auto z = gen.next();
    const auto w = gen.next();
    const double s = sigma(z, w);
    const double e = eta(z, w);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    CHECK(sigma(w, z) == s);
    CHECK(eta(w, z) == e);
    CHECK(e * (e - 1) > 0.0);
    // sigma - 1 and eta - 1 taken from the cancellation-free complements.
    CHECK(rel(e, -s / one_minus_sigma(z, w)) < 1e-14);
    CHECK(rel(s, -e / one_minus_eta(z, w)) < 1e-14);
    const double t = 2.5;
    const UpperHalfPoint zt{z.x() + t, z.y()}, wt{w.x() + t, w.y()};
    CHECK(rel(sigma(zt, wt), s) < 1e-14);
    CHECK(rel(eta(zt, wt), e) < 1e-14);
    // Power-of-two scalings are exact, so the check isolates the formula.
    const double r = (i % 2) ? 0.25 : 8.0;
    const UpperHalfPoint zr{r * z.x(), r * z.y()}, wr{r * w.x(), r * w.y()};
    CHECK(rel(sigma(zr, wr), s) < 1e-14);
    CHECK(rel(eta(zr, wr), e) < 1e-14);
  }
}

TEST_CASE("mass method names") {
  CHECK(to_string(Mass::Method::closed_form) == "closed_form");
  CHECK(to_string(Mass::Method::monte_carlo) == "monte_carlo");
  CHECK(Mass::infinite().is_infinite());
}

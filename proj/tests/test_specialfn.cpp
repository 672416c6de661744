#include <cmath>
#include <numbers>

#include "doctest.h"
#include "loopmass/error.hpp"
#include "loopmass/quadrature.hpp"
#include "loopmass/specialfn.hpp"
#include "oracle.hpp"

using namespace loopmass;
using namespace loopmass::special;
using std::numbers::pi;

namespace {
double rel(double got, double want) { return std::fabs(got - want) / std::fabs(want); }
const double kSqrt3 = std::sqrt(3.0);
}  // namespace

TEST_CASE("gamma_fn classical values") {
  CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rel(gamma_fn(0.5), std::sqrt(pi)) < 1e-14);
  CHECK(rel(gamma_fn(2.0 / 3.0) * gamma_fn(1.0 / 3.0), 2 * pi / kSqrt3) < 1e-14);
  CHECK(rel(gamma_fn(5.0), 24.0) < 1e-14);
  CHECK(rel(gamma_fn(-0.5), -2 * std::sqrt(pi)) < 1e-14);
}

TEST_CASE("gamma_fn poles") {
  for (double x : {0.0, -1.0, -2.0, -7.0}) CHECK_THROWS_AS(gamma_fn(x), PoleError);
  for (double x : {0.0, -1.0, -3.0}) CHECK(rgamma(x) == 0.0);
}

TEST_CASE("gamma reflection on a grid") {
  for (int k = 1; k <= 50; ++k) {
    const double x = k / 51.0;
    const double want = pi / std::sin(pi * x);
    CHECK(rel(gamma_fn(x) * gamma_fn(1 - x), want) < 1e-12);
  }
}

TEST_CASE("digamma") {
  CHECK(std::fabs(digamma(2.75) - digamma(1.75) - 1 / 1.75) < 1e-14);
  CHECK(rel(digamma(2.0 / 3.0) - digamma(1.0 / 3.0), pi / kSqrt3) < 1e-12);
  const double gamma_e = static_cast<double>(oracle::euler_gamma());
  CHECK(rel(digamma(1.0), -gamma_e) < 1e-14);
  for (double z : {0.3, 1.7, 4.2}) {
    const double want = static_cast<double>(oracle::digamma_series(z));
    CHECK(std::fabs(digamma(z) - want) < 1e-12);
  }
  for (double x : {0.0, -1.0, -4.0}) CHECK_THROWS_AS(digamma(x), PoleError);
}

TEST_CASE("hyp2f1 examples") {
  CHECK(hyp2f1(1, 4.0 / 3, 5.0 / 3, 0.0) == 1.0);
  CHECK(rel(hyp2f1(1.0 / 3, 2.0 / 3, 1.0 / 3, 0.4), std::pow(0.6, -2.0 / 3)) < 1e-14);
  const double brute = static_cast<double>(oracle::pfq({1.0L, 4.0L / 3}, {5.0L / 3}, 0.75L));
  CHECK(rel(hyp2f1(1, 4.0 / 3, 5.0 / 3, 0.75), brute) < 1e-13);
  // Gauss summation at x = 1.
  const double gauss = std::tgamma(5.0 / 3) * std::tgamma(1.0) /
                       (std::tgamma(4.0 / 3) * std::tgamma(4.0 / 3));
  CHECK(rel(hyp2f1(1.0 / 3, 1.0 / 3, 5.0 / 3, 1.0), gauss) < 1e-13);
}

TEST_CASE("hyp2f1 against the plain series off the direct region") {
  for (double x : {-0.9, -0.4, 0.55, 0.8, 0.9, 0.97}) {
    const double want =
        static_cast<double>(oracle::pfq({1.0L / 3, 1.0L}, {5.0L / 3}, x, 100'000'000));
    CHECK(rel(hyp2f1(1.0 / 3, 1, 5.0 / 3, x), want) < 1e-12);
  }
}

TEST_CASE("hyp2f1 errors") {
  CHECK_THROWS_AS(hyp2f1(1, 4.0 / 3, 5.0 / 3, 1.0), DivergenceError);
  CHECK_THROWS_AS(hyp2f1(1, 1, 2, 0.7), UnsupportedParametersError);
  CHECK_THROWS_AS(hyp2f1(1, 1, -2, 0.3), DomainError);
  CHECK_THROWS_AS(hyp2f1(1, 1, 2.5, 1.2), DomainError);
  EvalOptions tiny;
  tiny.max_terms = 64;
  tiny.series_tol = 1e-300;
  CHECK_THROWS_AS(hyp2f1(1, 4.0 / 3, 5.0 / 3, 0.5, tiny), NonConvergenceError);
}

TEST_CASE("EvalOptions validation") {
  EvalOptions o;
  CHECK_NOTHROW(o.validate());
  o.series_tol = 0;
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = {};
  o.max_terms = 63;
  CHECK_THROWS_AS(o.validate(), DomainError);
  o = {};
  o.quad_tol = -1;
  CHECK_THROWS_AS(o.validate(), DomainError);
  CHECK_THROWS_AS(hyp2f1(1, 1, 2.5, 0.3, o), DomainError);
}

TEST_CASE("Pfaff transformation") {
  const double a = 1.0 / 3, b = 1, c = 5.0 / 3;
  for (int k = 0; k <= 58; ++k) {
    const double x = -5.0 + k * 0.1;
    if (x >= 0.9) break;
    const double lhs = hyp2f1(a, b, c, x);
    const double rhs = std::pow(1 - x, -b) * hyp2f1(c - a, b, c, x / (x - 1));
    CHECK(rel(lhs, rhs) < 1e-11);
  }
}

TEST_CASE("connection formula") {
  const double a = 1, b = 4.0 / 3, c = 5.0 / 3;
  const auto G = [](double v) { return std::tgamma(v); };
  for (int k = 1; k <= 19; ++k) {
    const double x = 0.05 * k;
    const double rhs =
        G(c) * G(c - a - b) / (G(c - a) * G(c - b)) * hyp2f1(a, b, a + b - c + 1, 1 - x) +
        std::pow(1 - x, c - a - b) * G(c) * G(a + b - c) / (G(a) * G(b)) *
            hyp2f1(c - a, c - b, c - a - b + 1, 1 - x);
    CHECK(rel(hyp2f1(a, b, c, x), rhs) < 1e-10);
  }
}

TEST_CASE("Euler transformation") {
  const double a = 1.0 / 3, b = 2.0 / 3, c = 1.0 / 3;
  for (int k = 1; k <= 17; ++k) {
    const double x = 0.05 * k;
    const double rhs = std::pow(1 - x, c - a - b) * hyp2f1(c - a, c - b, c, x);
    CHECK(rel(hyp2f1(a, b, c, x), rhs) < 1e-11);
  }
}

TEST_CASE("two 2F1 values add up to 2") {
  for (int k = 0; k <= 95; ++k) {
    const double t = k / 100.0;
    const double r =
        2 - hyp2f1(1, 1.0 / 3, 5.0 / 3, t) - (1 - t) * hyp2f1(1, 4.0 / 3, 5.0 / 3, t);
    CHECK(std::fabs(r) < 1e-12);
  }
}

TEST_CASE("hyp3f2 examples") {
  CHECK(hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, 0.0) == 1.0);
  CHECK(rel(hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, 1.0), 2 * pi / kSqrt3) < 1e-10);
  const double x = 8.0 / 9;
  const double brute =
      static_cast<double>(oracle::pfq({1.0L, 4.0L / 3, 1.0L}, {5.0L / 3, 2.0L}, 8.0L / 9));
  CHECK(rel(hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, x), brute) < 1e-13);
}

TEST_CASE("hyp3f2 outside the series radius") {
  for (double x : {0.92, 0.97, 0.995}) {
    const double want = static_cast<double>(
        oracle::pfq({1.0L, 4.0L / 3, 1.0L}, {5.0L / 3, 2.0L}, x, 100'000'000));
    CHECK(rel(hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, x), want) < 1e-11);
  }
  // Negative argument: x 3F2(a,b,1;c,2;x) is the integral of 2F1 over [x, 0] up to sign.
  const double x = -3.0;
  const auto q = quad::integrate_1d(
      [](double y) { return hyp2f1(1, 4.0 / 3, 5.0 / 3, y); }, x, 0.0,
      quad::QuadOptions{0.0, 1e-13});
  CHECK(rel(x * hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, x), -q.value) < 1e-11);
}

TEST_CASE("hyp3f2 parameter permutations") {
  const double a[3] = {0.5, 4.0 / 3, 1.0};
  const double b[2] = {5.0 / 3, 2.0};
  for (double x : {-2.0, 0.5, 0.95, 1.0}) {
    const double ref = hyp3f2(a[0], a[1], a[2], b[0], b[1], x);
    CHECK(rel(hyp3f2(a[1], a[0], a[2], b[0], b[1], x), ref) < 1e-13);
    CHECK(rel(hyp3f2(a[2], a[1], a[0], b[0], b[1], x), ref) < 1e-13);
    CHECK(rel(hyp3f2(a[1], a[2], a[0], b[1], b[0], x), ref) < 1e-13);
  }
}

TEST_CASE("hyp3f2 errors") {
  CHECK_THROWS_AS(hyp3f2(1, 1, 1, 1.5, 1.5, 1.0), DivergenceError);
  CHECK_THROWS_AS(hyp3f2(1, 1, 1, 1.5, 2.5, 1.5), DomainError);
  CHECK_THROWS_AS(hyp3f2(1, 1, 1, -1.0, 2.5, 0.5), DomainError);
}

TEST_CASE("hyp3f2_c matches hyp3f2") {
  const double x = 0.999;
  CHECK(rel(hyp3f2_c(1, 4.0 / 3, 1, 5.0 / 3, 2, x, 1 - x), hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, x)) <
        1e-13);
}

TEST_CASE("hyp3f2_unit_11a") {
  const double two_pi_over_sqrt3 = 2 * pi / kSqrt3;
  CHECK(rel(hyp3f2_unit_11a(4.0 / 3, 5.0 / 3), two_pi_over_sqrt3) < 1e-13);
  CHECK(rel(hyp3f2_unit_11a(4.0 / 3, 5.0 / 3), hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, 1.0)) < 1e-9);

  const double tail = static_cast<double>(oracle::pfq_unit({1.0L, 1.0L, 1.2L}, {2.0L, 2.5L}, 1'000'000));
  CHECK(rel(hyp3f2_unit_11a(1.2, 2.5), tail) < 1e-10);

  // Partial fractions: (b-1) sum 1/((n+b-1)(n+b-a)), midpoint integral for the tail.
  const long double a = 1.5L, b = 3.0L, p = b - 1, q = b - a;
  long double s = 0.0L;
  const long n = 1'000'000;
  for (long k = n - 1; k >= 0; --k) s += 1.0L / ((k + p) * (k + q));
  const long double m = n - 0.5L;
  s += std::log((m + p) / (m + q)) / (p - q);
  CHECK(rel(hyp3f2_unit_11a(1.5, 3.0), static_cast<double>((b - 1) * s)) < 1e-12);

  CHECK_THROWS_AS(hyp3f2_unit_11a(2.0, 2.0), DomainError);
  CHECK_THROWS_AS(hyp3f2_unit_11a(0.0, 2.0), DomainError);
  CHECK_THROWS_AS(hyp3f2_unit_11a(1.0, 2.0), DomainError);
}

TEST_CASE("thomae_transform") {
  CHECK(rel(thomae_transform(1, 1, 4.0 / 3, 2, 5.0 / 3), hyp3f2(1, 1, 4.0 / 3, 2, 5.0 / 3, 1.0)) <
        1e-9);
  CHECK(rel(thomae_transform(1, 4.0 / 3, 1, 5.0 / 3, 2), 2 * pi / kSqrt3) < 1e-9);
  const double lhs =
      static_cast<double>(oracle::pfq_unit({0.5L, 0.7L, 0.9L}, {1.8L, 1.6L}, 1'000'000));
  CHECK(rel(thomae_transform(0.5, 0.7, 0.9, 1.8, 1.6), lhs) < 1e-9);
  CHECK_THROWS_AS(thomae_transform(1, 1, 1, 1.5, 1.5), DomainError);
  CHECK_THROWS_AS(thomae_transform(-0.5, 1, 1, 3, 3), DomainError);
}

TEST_CASE("integral_2f1") {
  CHECK(integral_2f1(1, 4.0 / 3, 5.0 / 3, 0.0) == 0.0);
  CHECK(rel(integral_2f1(1, 4.0 / 3, 5.0 / 3, 0.6), 0.6 * hyp3f2(1, 4.0 / 3, 1, 5.0 / 3, 2, 0.6)) <
        1e-13);
  const auto q = quad::integrate_1d([](double y) { return hyp2f1(1, 4.0 / 3, 5.0 / 3, y); }, 0.0,
                                    0.3, quad::QuadOptions{0.0, 1e-14});
  CHECK(rel(integral_2f1(1, 4.0 / 3, 5.0 / 3, 0.3), q.value) < 1e-13);
  // x = 1 is allowed when the integrand singularity is integrable.
  CHECK(rel(integral_2f1(1, 4.0 / 3, 5.0 / 3, 1.0), 2 * pi / kSqrt3) < 1e-10);
}

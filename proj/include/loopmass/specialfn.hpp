#pragma once

// Real-argument special functions: Gamma, digamma, Gauss 2F1 with its
// linear transformations, and generalized 3F2 including unit argument.

namespace loopmass::special {

struct EvalOptions {
  double series_tol = 1e-14;  // relative truncation tolerance of power series
  int max_terms = 200000;     // hard cap on series length
  double quad_tol = 1e-14;    // relative tolerance of the integral fallbacks

  /// Throws DomainError unless series_tol > 0, max_terms >= 64, quad_tol > 0.
  void validate() const;
};

// Region thresholds of the evaluation paths.
/// 2F1: direct series on [0, kDirectSeriesMax]; Pfaff below 0; connection above.
inline constexpr double kDirectSeriesMax = 0.5;
/// 3F2: direct series for |x| <= k3F2SeriesRadius, Euler integral outside.
inline constexpr double k3F2SeriesRadius = 0.9;

double gamma_fn(double x, const EvalOptions& opts = {});

/// 1/Gamma(x), entire: exactly zero at the non-positive integers.
double rgamma(double x);

double digamma(double x, const EvalOptions& opts = {});

double hyp2f1(double a, double b, double c, double x, const EvalOptions& opts = {});

/// 2F1 where the caller also knows 1 - x to full relative precision.
/// Used when x is within rounding distance of 1.
double hyp2f1_c(double a, double b, double c, double x, double one_minus_x,
                const EvalOptions& opts = {});

double hyp3f2(double a1, double a2, double a3, double b1, double b2, double x,
              const EvalOptions& opts = {});

/// 3F2 with an accurately known 1 - x (see hyp2f1_c).
double hyp3f2_c(double a1, double a2, double a3, double b1, double b2, double x,
                double one_minus_x, const EvalOptions& opts = {});

/// 3F2(1, 1, a; 2, b; 1) = (b-1)/(a-1) * (psi(b-1) - psi(b-a)), for b > a > 0, a != 1.
double hyp3f2_unit_11a(double a, double b);

/// Right-hand side of Thomae's relation
///   3F2(a,b,c;e,f;1) = G(e)G(f)G(s) / (G(a)G(s+b)G(s+c)) * 3F2(e-a, f-a, s; s+b, s+c; 1)
/// with s = e + f - a - b - c > 0 and a > 0.
double thomae_transform(double a, double b, double c, double e, double f,
                        const EvalOptions& opts = {});

/// Integral of 2F1(a,b;c;y) over y from 0 to x (x < 1, or x = 1 when the
/// integrand singularity is integrable). Equals x * 3F2(a,b,1;c,2;x).
double integral_2f1(double a, double b, double c, double x, const EvalOptions& opts = {});

}  // namespace loopmass::special

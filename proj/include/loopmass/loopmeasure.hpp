#pragma once

// Closed-form masses of Brownian loops, Brownian bubbles and SLE(8/3)
// bubbles in the upper half-plane, and the quantities used to derive them.

#include "loopmass/geometry.hpp"

namespace loopmass::loop {

enum class Side { left, right };

/// Side of each point relative to a chordal SLE curve from 0 to infinity.
/// "left" means the curve passes to the left of the point, the event whose
/// probability is given by Schramm's formula.
struct PassageSide {
  Side side_z = Side::left;
  Side side_w = Side::left;
};

/// Which of the two points a bubble disconnects from infinity.
enum class OneSided { z_only, w_only, neither };

/// Normalization of the one-sided Brownian bubble masses. `two_fifths` is
/// 8/5 times the SLE(8/3) coefficient 1/4; `one_tenth` is the alternative
/// 1/10 normalization, a factor 4 smaller.
enum class OneSidedCoefficient { two_fifths, one_tenth };

/// G(t) = 1 - t 2F1(1, 4/3; 5/3; 1 - t) for t in (0, 1]. With allow_zero_limit
/// the continuous extension G(0) = 1 is returned at t = 0.
double g_connect(double t, bool allow_zero_limit = false);

/// G(1 - s) for s in [0, 1), accurate when s is small (G ~ s/5).
double g_connect_complement(double s);

/// Loop mass from sigma = sigma(z, w) and its complement:
///   -(1/10) [log sigma + (1 - sigma) 3F2(1, 4/3, 1; 5/3, 2; 1 - sigma)].
double mass_from_sigma(double sigma, double one_minus_sigma);

Mass mass_disconnect_two_han(const UpperHalfPoint& z, const UpperHalfPoint& w);
Mass mass_disconnect_two_cardy(const UpperHalfPoint& z, const UpperHalfPoint& w);
Mass mass_disconnect_two_disk(const UnitDiskPoint& z, const UnitDiskPoint& w);

/// Probability that chordal SLE(kappa) from 0 to infinity passes to the left
/// of z; kappa in (0, 4].
double schramm_left_pass(const UpperHalfPoint& z, double kappa);

/// (1/4) (Im 1/z)^2: SLE(8/3) bubble mass disconnecting z from infinity.
Mass sle_bubble_one_point(const UpperHalfPoint& z);

/// (1/4) Im(1/z) Im(1/w) G(sigma(z, w)).
Mass sle_bubble_two_point(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// 8/5 times the SLE(8/3) bubble mass.
Mass brownian_bubble_two_point(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// Joint side probabilities for chordal SLE(8/3). The four values sum to 1.
double sle_pass_combo(const UpperHalfPoint& z, const UpperHalfPoint& w, PassageSide sides);

/// SLE(8/3) bubble mass of the one-sided events (coefficient 1/4).
Mass sle_bubble_one_sided(const UpperHalfPoint& z, const UpperHalfPoint& w, OneSided which);

/// Brownian bubble mass of the one-sided events; `neither` is infinite.
Mass bubble_one_sided(const UpperHalfPoint& z, const UpperHalfPoint& w, OneSided which,
                      OneSidedCoefficient coefficient = OneSidedCoefficient::two_fifths);

/// (1/4) log(1/sigma): the part of the bubble integral without G.
double a_term(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// (1/4) (1 - sigma) 3F2(1, 4/3, 1; 5/3, 2; 1 - sigma): the G part.
double b_term(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// (2/5) (A - B).
Mass mass_via_ab(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// The difference between the two closed forms expressed in sigma = t;
/// identically zero on (0, 1). Throws DomainError at the endpoints.
double phi_fn(double t);

/// 2 - 2F1(1, 1/3; 5/3; t) - (1 - t) 2F1(1, 4/3; 5/3; t); zero for t in [0, 1).
double phi_derivative_residual(double t);

/// (1 - phi_eps'(0)^{5/8}) / eps^2 for the circle |z| = r; tends to 5/(8 r^2).
double restriction_radius_mass(double r, double eps);

namespace detail {
/// Gamma(4/k) / (sqrt(pi) Gamma((8-k)/(2k)) (8/k - 1)): prefactor of the
/// one-point SLE(kappa) bubble mass. Equals 1/4 at kappa = 8/3.
double sle_bubble_prefactor(double kappa);
}  // namespace detail

}  // namespace loopmass::loop

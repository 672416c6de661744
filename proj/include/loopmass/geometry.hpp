#pragma once

#include <limits>
#include <string>
#include <string_view>

namespace loopmass {

/// Point x + iy of the open upper half-plane.
class UpperHalfPoint {
 public:
  /// Throws DomainError unless y > 0 and both coordinates are finite.
  UpperHalfPoint(double x, double y);

  double x() const { return x_; }
  double y() const { return y_; }

  bool operator==(const UpperHalfPoint&) const = default;

 private:
  double x_;
  double y_;
};

/// Point of the open unit disk.
class UnitDiskPoint {
 public:
  /// Throws DomainError unless re^2 + im^2 < 1.
  UnitDiskPoint(double re, double im);

  double re() const { return re_; }
  double im() const { return im_; }

  bool operator==(const UnitDiskPoint&) const = default;

 private:
  double re_;
  double im_;
};

/// A total mass of a loop or bubble measure; +infinity is a legal value.
struct Mass {
  enum class Method { closed_form, quadrature, monte_carlo };

  double value = 0.0;
  Method method = Method::closed_form;

  static Mass infinite(Method m = Method::closed_form) {
    return {std::numeric_limits<double>::infinity(), m};
  }
  bool is_infinite() const { return value == std::numeric_limits<double>::infinity(); }
};

std::string_view to_string(Mass::Method m);

/// sigma = |z - w|^2 / |z - conj(w)|^2, in (0, 1). Throws DegenerateError if z == w.
double sigma(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// 1 - sigma = 4 y v / |z - conj(w)|^2, computed without cancellation.
double one_minus_sigma(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// eta = -|z - w|^2 / (4 y v) < 0; eta = sigma / (sigma - 1).
double eta(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// 1 - eta = |z - conj(w)|^2 / (4 y v).
double one_minus_eta(const UpperHalfPoint& z, const UpperHalfPoint& w);

/// Disk analogue |z - w|^2 / |1 - z conj(w)|^2.
double sigma_disk(const UnitDiskPoint& z, const UnitDiskPoint& w);

/// 1 - sigma_disk = (1 - |z|^2)(1 - |w|^2) / |1 - z conj(w)|^2.
double one_minus_sigma_disk(const UnitDiskPoint& z, const UnitDiskPoint& w);

/// Cayley map i (1 + z) / (1 - z) from the disk onto the upper half-plane.
UpperHalfPoint disk_to_half(const UnitDiskPoint& z);

/// Parses "x,y" (dot decimal separator). Throws DomainError on malformed input.
UpperHalfPoint parse_upper_half_point(std::string_view text);
UnitDiskPoint parse_unit_disk_point(std::string_view text);

/// Points this close to the real axis are accepted but worth flagging.
inline constexpr double kNearBoundaryHeight = 1e-12;

}  // namespace loopmass

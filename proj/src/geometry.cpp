#include "loopmass/geometry.hpp"

#include <charconv>
#include <cmath>
#include <string>
#include <utility>

#include "loopmass/error.hpp"

namespace loopmass {

UpperHalfPoint::UpperHalfPoint(double x, double y) : x_(x), y_(y) {
  if (!std::isfinite(x) || !std::isfinite(y) || !(y > 0.0)) {
    throw DomainError("point (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") is not in the upper half-plane");
  }
}

UnitDiskPoint::UnitDiskPoint(double re, double im) : re_(re), im_(im) {
  if (!std::isfinite(re) || !std::isfinite(im) || !(re * re + im * im < 1.0)) {
    throw DomainError("point (" + std::to_string(re) + ", " + std::to_string(im) +
                      ") is not in the open unit disk");
  }
}

std::string_view to_string(Mass::Method m) {
  switch (m) {
    case Mass::Method::closed_form:
      return "closed_form";
    case Mass::Method::quadrature:
      return "quadrature";
    case Mass::Method::monte_carlo:
      return "monte_carlo";
  }
  return "unknown";
}

namespace {

struct PairDistances {
  double near;  // |z - w|^2
  double far;   // |z - conj(w)|^2
};

PairDistances distances(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const double dx = z.x() - w.x();
  const double dy = z.y() - w.y();
  const double sy = z.y() + w.y();
  const PairDistances d{dx * dx + dy * dy, dx * dx + sy * sy};
  if (d.near == 0.0) throw DegenerateError("degenerate pair: z and w coincide");
  return d;
}

std::pair<double, double> parse_pair(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw DomainError("expected \"x,y\", got \"" + std::string(text) + "\"");
  }
  auto parse_one = [&](std::string_view part) {
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      throw DomainError("malformed coordinate \"" + std::string(part) + "\"");
    }
    return v;
  };
  return {parse_one(text.substr(0, comma)), parse_one(text.substr(comma + 1))};
}

}  // namespace

double sigma(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const auto d = distances(z, w);
  return d.near / d.far;
}

double one_minus_sigma(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const auto d = distances(z, w);
  return 4.0 * z.y() * w.y() / d.far;
}

double eta(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const auto d = distances(z, w);
  return -d.near / (4.0 * z.y() * w.y());
}

double one_minus_eta(const UpperHalfPoint& z, const UpperHalfPoint& w) {
  const auto d = distances(z, w);
  return d.far / (4.0 * z.y() * w.y());
}

namespace {

// |z - w|^2 and |1 - z conj(w)|^2 for disk points.
PairDistances disk_distances(const UnitDiskPoint& z, const UnitDiskPoint& w) {
  const double dr = z.re() - w.re();
  const double di = z.im() - w.im();
  // 1 - z conj(w) = 1 - (a + ib)(c - id) = (1 - ac - bd) + i(ad - bc)
  const double re = 1.0 - z.re() * w.re() - z.im() * w.im();
  const double im = z.re() * w.im() - z.im() * w.re();
  const PairDistances d{dr * dr + di * di, re * re + im * im};
  if (d.near == 0.0) throw DegenerateError("degenerate pair: z and w coincide");
  return d;
}

}  // namespace

double sigma_disk(const UnitDiskPoint& z, const UnitDiskPoint& w) {
  const auto d = disk_distances(z, w);
  return d.near / d.far;
}

double one_minus_sigma_disk(const UnitDiskPoint& z, const UnitDiskPoint& w) {
  const auto d = disk_distances(z, w);
  const double z2 = z.re() * z.re() + z.im() * z.im();
  const double w2 = w.re() * w.re() + w.im() * w.im();
  return (1.0 - z2) * (1.0 - w2) / d.far;
}

UpperHalfPoint disk_to_half(const UnitDiskPoint& z) {
  const double dr = 1.0 - z.re();
  const double den = dr * dr + z.im() * z.im();
  const double mod2 = z.re() * z.re() + z.im() * z.im();
  return {-2.0 * z.im() / den, (1.0 - mod2) / den};
}

UpperHalfPoint parse_upper_half_point(std::string_view text) {
  const auto [x, y] = parse_pair(text);
  return {x, y};
}

UnitDiskPoint parse_unit_disk_point(std::string_view text) {
  const auto [re, im] = parse_pair(text);
  return {re, im};
}

}  // namespace loopmass

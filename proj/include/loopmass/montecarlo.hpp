#pragma once

// Monte Carlo checks: a truncated Brownian loop-soup sampler for the loop
// measure of disconnection events, and a discretized Loewner evolution for
// chordal SLE passage probabilities.

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "loopmass/geometry.hpp"

namespace loopmass::mc {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Pseudo-random stream backed by std::mt19937_64. Uniform and normal
/// variates are produced here (not by <random> distributions) so that the
/// sequence is identical on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Independent stream for (seed, index): seeds are decorrelated by SplitMix64.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }
  /// Standard normal (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct LoopSample {
  Point2 root;
  double duration = 0.0;
  std::vector<Point2> path;  // closed: front() == back() == root
};

struct SoupConfig {
  double box_halfwidth = 8.0;
  double box_height = 10.0;
  double t_min = 1e-3;
  double t_max = 400.0;
  int steps_per_loop = 256;
  std::int64_t n_samples = 2'000'000;
  std::uint64_t seed = 1;
  /// Cell size of the flood-fill detector `disconnects`. The estimator
  /// itself decides enclosure exactly on the refined polyline.
  double grid_resolution = 0.02;
  int workers = 1;
  /// A sample is settled from coarse bridge vertices once the chance that
  /// the continuous path could change the outcome drops below this.
  double skip_tolerance = 1e-10;

  void validate() const;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n = 0;
  double mass_scale = 0.0;
};

/// Loop-soup events for a pair of points.
enum class SoupEvent { both, z_only, w_only, neither };

struct SoupResult {
  Estimate estimate;
  /// Bound on the mass of loops outside the sampled box or duration range;
  /// absent for events whose truncated mass diverges.
  std::optional<double> truncation_budget;
  /// Bias allowance for classifying polylines instead of continuous paths:
  /// the coupled step-halving shift extrapolated to zero step, plus the
  /// bound for samples settled at coarse levels and for indeterminate ones.
  double discretization_budget = 0.0;
  /// Mean of (estimate at N steps) minus (estimate at 2N steps, same bridge).
  double refinement_shift = 0.0;
  std::int64_t detailed = 0;       // samples classified on the full polyline
  std::int64_t ambiguous = 0;      // of those, outcome changed under refinement
  std::int64_t indeterminate = 0;  // a face walk did not close
  std::int64_t capped = 0;         // local refinement reached its depth limit
};

/// Mass of the sampled region: 2 L H (1 / 2 pi) (1/t_min - 1/t_max).
double truncated_measure(const SoupConfig& cfg);

/// Discrete Brownian bridge of duration t from root to root with `steps`
/// Gaussian increments; the last vertex equals the root exactly.
LoopSample sample_bridge(Point2 root, double t, int steps, Rng& rng);

/// Whether the polyline separates p from infinity, decided by a 4-connected
/// flood fill on cells of size h whose walls are the cells crossed by the
/// polyline. Throws IndeterminateError when p lies in a wall cell.
bool disconnects(const LoopSample& loop, Point2 p, double h);

/// Loop-measure estimate of the given event for loops that stay in the
/// upper half-plane. Throws ConfigError when z or w lies outside the box.
SoupResult estimate_soup_event(const UpperHalfPoint& z, const UpperHalfPoint& w,
                               const SoupConfig& cfg, SoupEvent event);

/// estimate_soup_event with SoupEvent::both.
SoupResult estimate_disconnect_mass(const UpperHalfPoint& z, const UpperHalfPoint& w,
                                    const SoupConfig& cfg);

/// Analytic bound on the mass of loops disconnecting both points whose root
/// lies outside the box or whose duration lies outside [t_min, t_max].
double truncation_budget(const UpperHalfPoint& z, const UpperHalfPoint& w,
                         const SoupConfig& cfg);

/// Loop-measure mass of bridges rooted at a fixed point that stay in the
/// upper half-plane, with durations in [t_min, t_max] drawn as in the soup
/// sampler. Checks the sampler against a one-dimensional integral.
Estimate estimate_fixed_root_survival(Point2 root, const SoupConfig& cfg);

// ---------------------------------------------------------------------------

using Polyline = std::vector<std::complex<double>>;

/// Discrete chordal SLE(kappa) trace from 0 up to capacity time T by the
/// zipper composition of vertical slit maps with constant driving per step.
/// Returns n_steps + 1 points, the first being 0.
Polyline sle_trace(double kappa, double T, int n_steps, Rng& rng);

/// Half-plane capacity of a polyline starting on the real axis, obtained by
/// unzipping it with vertical slit maps (g(z) = z + hcap / z + ...).
double half_plane_capacity(const Polyline& trace);

struct SleConfig {
  double kappa = 8.0 / 3.0;
  std::int64_t n_traces = 100'000;
  std::uint64_t seed = 1;
  int workers = 1;
  /// Loewner step size as a fraction of min |g_t(p) - xi_t|^2 over live points.
  double step_fraction = 0.01;
  /// A point is decided once arg(g_t(p) - xi_t) is within this angle of 0 or pi.
  double angle_threshold = 1e-3;
  std::int64_t max_steps = 200'000;
  /// Run a second, independent pass at twice the step to bound the step bias.
  bool step_check = true;

  void validate() const;
};

struct PassResult {
  /// Frequencies of (side_z, side_w) in the order LL, LR, RL, RR.
  std::array<Estimate, 4> combos;
  std::array<std::int64_t, 4> counts{};
  Estimate left_z;
  Estimate left_w;
  std::int64_t decided = 0;
  std::int64_t undecided = 0;
  /// Largest change of a combo frequency when the step is doubled.
  double step_shift = 0.0;
  /// Undecided fraction, plus the chance of a decided point reversing side,
  /// plus the extrapolated step bias.
  double bias_budget = 0.0;
};

/// Side of z and w relative to the SLE curve, obtained by running the
/// Loewner flow of the two points until their arguments settle.
PassResult estimate_pass_combo(const UpperHalfPoint& z, const UpperHalfPoint& w,
                               const SleConfig& cfg);

}  // namespace loopmass::mc

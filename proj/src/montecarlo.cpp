#include "loopmass/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <utility>

#include "loopmass/error.hpp"
#include "loopmass/loopmeasure.hpp"
#include "loopmass/quadrature.hpp"

namespace loopmass::mc {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs fn(block, begin, end) over fixed blocks of the index space. Block
// results are stored by index, so the reduction order does not depend on the
// number of workers.
template <class R, class F>
std::vector<R> run_blocks(std::int64_t n, std::int64_t block_size, int workers, F&& fn) {
  const std::int64_t n_blocks = (n + block_size - 1) / block_size;
  std::vector<R> out(static_cast<std::size_t>(n_blocks));
  const int n_workers =
      static_cast<int>(std::clamp<std::int64_t>(workers, 1, std::max<std::int64_t>(n_blocks, 1)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
  auto work = [&](int wi) {
    try {
      for (std::int64_t b = wi; b < n_blocks; b += n_workers) {
        const std::int64_t begin = b * block_size;
        out[static_cast<std::size_t>(b)] = fn(b, begin, std::min(n, begin + block_size));
      }
    } catch (...) {
      errors[static_cast<std::size_t>(wi)] = std::current_exception();
    }
  };
  if (n_workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int wi = 0; wi < n_workers; ++wi) threads.emplace_back(work, wi);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// Pairwise sum of a field over block results, in block order.
template <class R, class Get>
double pairwise_sum(const std::vector<R>& v, std::size_t lo, std::size_t hi, Get get) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += get(v[i]);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid, get) + pairwise_sum(v, mid, hi, get);
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments moments(double sum, double sum_sq, std::int64_t n) {
  Moments m;
  if (n == 0) return m;
  const double nd = static_cast<double>(n);
  m.mean = sum / nd;
  double var = 0.0;
  if (n > 1) var = std::max(0.0, (sum_sq - nd * m.mean * m.mean) / (nd - 1.0));
  m.std_error = std::sqrt(var / nd);
  return m;
}

Estimate make_estimate(double sum, double sum_sq, std::int64_t n, double scale) {
  const Moments m = moments(sum, sum_sq, n);
  return {scale * m.mean, scale * m.std_error, n, scale};
}

double point_segment_dist2(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  const double ex = ax + s * dx - px;
  const double ey = ay + s * dy - py;
  return ex * ex + ey * ey;
}

struct Box {
  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  bool strictly_contains(Point2 p) const {
    return p.x > xmin && p.x < xmax && p.y > ymin && p.y < ymax;
  }
};

Box bounding_box(const std::vector<Point2>& path) {
  Box b;
  for (const auto& p : path) {
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

// Grid over the loop's bounding box plus a free margin. Wall cells are those
// crossed by the polyline; a 4-connected fill from p that reaches the margin
// has reached the unbounded component, which contains the real axis.
class LoopGrid {
 public:
  static constexpr double kMaxCells = 16e6;

  LoopGrid(const std::vector<Point2>& path, const Box& box, double h) {
    const double w = box.xmax - box.xmin;
    const double ht = box.ymax - box.ymin;
    // Coarsen for very large loops to bound memory.
    h_ = std::max(h, std::sqrt((w + 6 * h) * (ht + 6 * h) / kMaxCells));
    x0_ = box.xmin - 2.0 * h_;
    y0_ = box.ymin - 2.0 * h_;
    nx_ = static_cast<int>(std::ceil(w / h_)) + 5;
    ny_ = static_cast<int>(std::ceil(ht / h_)) + 5;
    walls_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_), 0);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const Point2 a = path[k];
      const Point2 b = path[k + 1];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      // Samples less than a cell apart give edge- or corner-adjacent wall
      // cells, which a 4-connected fill cannot pass.
      const int m = static_cast<int>(std::ceil(2.0 * len / h_)) + 1;
      for (int s = 0; s <= m; ++s) {
        const double f = static_cast<double>(s) / m;
        walls_[index(col(a.x + f * (b.x - a.x)), row(a.y + f * (b.y - a.y)))] = 1;
      }
    }
  }

  double cell_size() const { return h_; }
  bool blocked(Point2 p) const { return walls_[index(col(p.x), row(p.y))] != 0; }

  /// Requires p inside the loop's bounding box and not in a wall cell.
  bool enclosed(Point2 p) {
    const int si = col(p.x);
    const int sj = row(p.y);
    visited_.assign(walls_.size(), 0);
    stack_.clear();
    stack_.push_back({si, sj});
    visited_[index(si, sj)] = 1;
    while (!stack_.empty()) {
      const auto [i, j] = stack_.back();
      stack_.pop_back();
      if (i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1) return false;
      const std::pair<int, int> next[4] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
      for (const auto& [ni, nj] : next) {
        const std::size_t id = index(ni, nj);
        if (visited_[id] || walls_[id]) continue;
        visited_[id] = 1;
        stack_.push_back({ni, nj});
      }
    }
    return true;
  }

 private:
  int col(double x) const { return static_cast<int>(std::floor((x - x0_) / h_)); }
  int row(double y) const { return static_cast<int>(std::floor((y - y0_) / h_)); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

  double h_ = 0.0;
  double x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> walls_, visited_;
  std::vector<std::pair<int, int>> stack_;
};

// ----- bridge construction -------------------------------------------------------

void bridge_coordinate(double start, double sd, int steps, Rng& rng, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(steps) + 1);
  out[0] = 0.0;
  for (int k = 1; k <= steps; ++k) out[k] = out[k - 1] + sd * rng.normal();
  const double end = out[steps];
  for (int k = 0; k <= steps; ++k) out[k] = start + (out[k] - (static_cast<double>(k) / steps) * end);
  out[steps] = start;
}

// Midpoint (Levy) construction of a bridge on steps + 1 vertices: level l
// fills the midpoints between the vertices known after level l - 1, using the
// exact conditional law of a Brownian bridge. Stopping after a level leaves
// the exact law of the coarse vertices.
class LevyPlan {
 public:
  explicit LevyPlan(int steps) : steps_(steps) {
    std::vector<int> known = {0, steps};
    known_.push_back(known);
    while (static_cast<int>(known.size()) < steps + 1) {
      std::vector<int> next;
      for (std::size_t k = 0; k + 1 < known.size(); ++k) {
        const int i = known[k];
        const int j = known[k + 1];
        next.push_back(i);
        if (j - i >= 2) {
          const int m = (i + j) / 2;
          const double span = j - i;
          fills_.push_back({m, i, j, (m - i) / span, std::sqrt((m - i) * (j - m) / span)});
          next.push_back(m);
        }
      }
      next.push_back(steps);
      known = std::move(next);
      level_end_.push_back(fills_.size());
      known_.push_back(known);
    }
  }

  int levels() const { return static_cast<int>(level_end_.size()); }
  const std::vector<int>& known(int level) const { return known_[static_cast<std::size_t>(level)]; }

  /// Fills levels (from, to] of one coordinate; v has steps + 1 entries.
  void fill(std::vector<double>& v, int from, int to, double sd, Rng& rng) const {
    const std::size_t a = (from == 0) ? 0 : level_end_[static_cast<std::size_t>(from - 1)];
    const std::size_t b = level_end_[static_cast<std::size_t>(to - 1)];
    for (std::size_t f = a; f < b; ++f) {
      const Fill& s = fills_[f];
      v[s.m] = v[s.i] + s.weight * (v[s.j] - v[s.i]) + sd * s.sd_factor * rng.normal();
    }
  }

 private:
  struct Fill {
    int m, i, j;
    double weight;
    double sd_factor;
  };
  int steps_;
  std::vector<Fill> fills_;
  std::vector<std::size_t> level_end_;
  std::vector<std::vector<int>> known_;
};

// Upper bound on the chance that the continuous bridge through the given
// vertices reaches `level` (upward or downward), from the exact crossing
// probability exp(-2 d_a d_b / tau) of each segment. Returns 1 when a vertex
// already reaches it.
double reach_bound(const std::vector<double>& v, const std::vector<int>& idx, double dt,
                   double level, bool upward) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double da = upward ? level - v[idx[k]] : v[idx[k]] - level;
    const double db = upward ? level - v[idx[k + 1]] : v[idx[k + 1]] - level;
    if (da <= 0.0 || db <= 0.0) return 1.0;
    const double e = 2.0 * da * db / ((idx[k + 1] - idx[k]) * dt);
    s += (e < 40.0) ? std::exp(-e) : 4.3e-18;
  }
  return std::min(1.0, s);
}

// Exact conditional probability that the bridge stays above 0 given the vertices.
double survival(const std::vector<double>& ys, const std::vector<int>& idx, double dt) {
  double log_w = 0.0;
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const double a = ys[idx[k]];
    const double b = ys[idx[k + 1]];
    if (a <= 0.0 || b <= 0.0) return 0.0;
    const double e = 2.0 * a * b / ((idx[k + 1] - idx[k]) * dt);
    if (e < 40.0) log_w += std::log1p(-std::exp(-e));
  }
  return std::exp(log_w);
}

// Bound on the chance that the continuous path can disconnect p: it must
// reach above and below p and to both sides of it.
double possible(Point2 p, const std::vector<double>& xs, const std::vector<double>& ys,
                bool have_x, const std::vector<int>& idx, double dt) {
  double b = std::min(reach_bound(ys, idx, dt, p.y, true), reach_bound(ys, idx, dt, p.y, false));
  if (have_x && b > 0.0) {
    b = std::min({b, reach_bound(xs, idx, dt, p.x, true), reach_bound(xs, idx, dt, p.x, false)});
  }
  return b;
}

// Winding number of a closed polyline around p (crossing rule, exact signs).
int winding_number(const std::vector<Point2>& path, Point2 p) {
  int w = 0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const Point2 a = path[k];
    const Point2 b = path[k + 1];
    const double side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0.0) ++w;
    } else if (b.y <= p.y && side < 0.0) {
      --w;
    }
  }
  return w;
}

// Crossings of a closed polyline, found lazily per segment through a uniform
// bucket grid over the bounding box.
class Crossings {
 public:
  struct Hit {
    double lambda;  // position along the queried segment
    int other;
    double mu;      // position along the other segment
  };

  explicit Crossings(const std::vector<Point2>& path)
      : path_(path), n_(static_cast<int>(path.size()) - 1), lists_(n_), done_(n_, 0),
        stamp_(n_, -1) {
    box_ = bounding_box(path);
    side_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n_))), 1, 256);
    cw_ = std::max(box_.xmax - box_.xmin, 1e-300) / side_;
    ch_ = std::max(box_.ymax - box_.ymin, 1e-300) / side_;
    buckets_.resize(static_cast<std::size_t>(side_) * side_);
    for (int k = 0; k < n_; ++k) {
      for_cells(k, [&](int cell) { buckets_[cell].push_back(k); });
    }
  }

  int segments() const { return n_; }

  const std::vector<Hit>& of(int s) {
    if (done_[s]) return lists_[s];
    done_[s] = 1;
    auto& out = lists_[s];
    const Point2 a = path_[s];
    const Point2 b = path_[s + 1];
    const double ex = b.x - a.x;
    const double ey = b.y - a.y;
    for_cells(s, [&](int cell) {
      for (int f : buckets_[cell]) {
        if (stamp_[f] == s || adjacent(s, f)) continue;
        stamp_[f] = s;
        const Point2 c = path_[f];
        const Point2 d = path_[f + 1];
        const double fx = d.x - c.x;
        const double fy = d.y - c.y;
        const double den = ex * fy - ey * fx;
        if (den == 0.0) continue;
        const double acx = c.x - a.x;
        const double acy = c.y - a.y;
        const double lambda = (acx * fy - acy * fx) / den;
        const double mu = (acx * ey - acy * ex) / den;
        if (lambda >= 0.0 && lambda <= 1.0 && mu >= 0.0 && mu <= 1.0) {
          out.push_back({lambda, f, mu});
        }
      }
    });
    std::sort(out.begin(), out.end(), [](const Hit& u, const Hit& v) { return u.lambda < v.lambda; });
    return out;
  }

 private:
  bool adjacent(int s, int f) const {
    return f == s || f == (s + 1) % n_ || s == (f + 1) % n_;
  }

  template <class F>
  void for_cells(int k, F&& fn) const {
    const Point2 a = path_[k];
    const Point2 b = path_[k + 1];
    auto col = [&](double x) {
      return std::clamp(static_cast<int>((x - box_.xmin) / cw_), 0, side_ - 1);
    };
    auto row = [&](double y) {
      return std::clamp(static_cast<int>((y - box_.ymin) / ch_), 0, side_ - 1);
    };
    const int i0 = col(std::min(a.x, b.x));
    const int i1 = col(std::max(a.x, b.x));
    const int j0 = row(std::min(a.y, b.y));
    const int j1 = row(std::max(a.y, b.y));
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) fn(j * side_ + i);
    }
  }

  const std::vector<Point2>& path_;
  int n_;
  Box box_{};
  int side_ = 1;
  double cw_ = 1.0;
  double ch_ = 1.0;
  std::vector<std::vector<int>> buckets_;
  std::vector<std::vector<Hit>> lists_;
  std::vector<char> done_;
  std::vector<int> stamp_;
};

// Whether p lies in a bounded face of the closed polyline. The face of p is
// found by a ray towards +x and its boundary is walked with the face on the
// left, taking the sharpest left turn at every crossing; a bounded face is
// traced counterclockwise. Returns nullopt if the walk does not close.
std::optional<bool> in_bounded_face(const std::vector<Point2>& path, Point2 p) {
  const int n = static_cast<int>(path.size()) - 1;
  int s0 = -1;
  double lambda0 = 0.0;
  double best = kInf;
  for (int k = 0; k < n; ++k) {
    const Point2 a = path[k];
    const Point2 b = path[k + 1];
    if ((a.y <= p.y) == (b.y <= p.y)) continue;
    const double t = (p.y - a.y) / (b.y - a.y);
    const double x = a.x + t * (b.x - a.x);
    if (x > p.x && x < best) {
      best = x;
      s0 = k;
      lambda0 = t;
    }
  }
  if (s0 < 0) return false;

  Crossings crossings(path);
  auto dir_of = [&](int s, int dir) {
    const Point2 a = path[s];
    const Point2 b = path[s + 1];
    return Point2{dir * (b.x - a.x), dir * (b.y - a.y)};
  };
  auto at = [&](int s, double lambda) {
    const Point2 a = path[s];
    const Point2 b = path[s + 1];
    return Point2{a.x + lambda * (b.x - a.x), a.y + lambda * (b.y - a.y)};
  };
  // Clockwise angle swept from u to v, in (0, 2 pi].
  auto cw_angle = [](Point2 u, Point2 v) {
    const double ccw = std::atan2(u.x * v.y - u.y * v.x, u.x * v.x + u.y * v.y);
    return ccw >= 0.0 ? 2.0 * std::numbers::pi - ccw : -ccw;
  };

  const int dir0 = path[s0 + 1].y > path[s0].y ? 1 : -1;
  int s = s0;
  int dir = dir0;
  double lambda = lambda0;
  int exclude = -1;
  const Point2 start = at(s0, lambda0);
  Point2 prev = start;
  double area2 = 0.0;
  auto advance = [&](Point2 q) {
    area2 += prev.x * q.y - q.x * prev.y;
    prev = q;
  };

  const long max_steps = 64L * n + 4096;
  for (long step = 0; step < max_steps; ++step) {
    const auto& hits = crossings.of(s);
    const Crossings::Hit* next = nullptr;
    if (dir > 0) {
      for (const auto& h : hits) {
        if (h.lambda > lambda && h.other != exclude) {
          next = &h;
          break;
        }
      }
    } else {
      for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
        if (it->lambda < lambda && it->other != exclude) {
          next = &*it;
          break;
        }
      }
    }
    const double reach = next ? next->lambda : (dir > 0 ? 1.0 : 0.0);
    if (step > 0 && s == s0 && dir == dir0 &&
        (dir > 0 ? (lambda0 >= lambda && lambda0 <= reach)
                 : (lambda0 <= lambda && lambda0 >= reach))) {
      advance(start);
      return area2 > 0.0;
    }
    if (!next) {
      if (dir > 0) {
        advance(path[s + 1]);
        s = (s + 1) % n;
        lambda = 0.0;
      } else {
        advance(path[s]);
        s = (s - 1 + n) % n;
        lambda = 1.0;
      }
      exclude = -1;
      continue;
    }
    advance(at(s, next->lambda));
    const Point2 in = dir_of(s, dir);
    const Point2 back{-in.x, -in.y};
    const int f = next->other;
    const double mu = next->mu;
    double best_angle = cw_angle(back, in);
    int new_s = s;
    int new_dir = dir;
    double new_lambda = next->lambda;
    for (int d : {1, -1}) {
      const double ang = cw_angle(back, dir_of(f, d));
      if (ang < best_angle) {
        best_angle = ang;
        new_s = f;
        new_dir = d;
        new_lambda = mu;
      }
    }
    exclude = new_s == s ? f : s;
    s = new_s;
    dir = new_dir;
    lambda = new_lambda;
  }
  return std::nullopt;
}

// Bridge pieces within kNearFactor sqrt(tau) of a target point are split at
// their exact conditional midpoint until none is. A piece then leaves the
// tube of that radius around its chord with probability below 4 exp(-16), so
// the polyline winds around each target like the continuous path.
constexpr double kNearFactor = 4.0;
constexpr int kMaxRefineDepth = 60;

struct Refiner {
  const std::array<Point2, 2>& targets;
  Rng& rng;
  std::vector<Point2>& out;
  double log_weight = 0.0;
  bool capped = false;

  void segment(Point2 a, Point2 b, double tau, int depth) {
    bool near = false;
    const double r2 = kNearFactor * kNearFactor * tau;
    for (const auto& p : targets) {
      if (point_segment_dist2(p.x, p.y, a.x, a.y, b.x, b.y) < r2) near = true;
    }
    if (near && depth < kMaxRefineDepth) {
      const double sd = 0.5 * std::sqrt(tau);
      const Point2 m{0.5 * (a.x + b.x) + sd * rng.normal(), 0.5 * (a.y + b.y) + sd * rng.normal()};
      segment(a, m, 0.5 * tau, depth + 1);
      segment(m, b, 0.5 * tau, depth + 1);
      return;
    }
    if (near) capped = true;
    out.push_back(b);
    if (a.y <= 0.0 || b.y <= 0.0) {
      log_weight = -kInf;
    } else {
      const double e = 2.0 * a.y * b.y / tau;
      if (e < 40.0) log_weight += std::log1p(-std::exp(-e));
    }
  }
};

struct EventEval {
  bool hit = false;
  bool capped = false;  // refinement stopped at kMaxRefineDepth
  bool failed = false;  // a face walk did not close; scored as not enclosed
  double weight = 0.0;
};

// Refines the bridge near the targets, then decides each point: a nonzero
// winding number settles enclosure; otherwise the face of the point is walked
// to find hull pockets.
EventEval evaluate_event(const std::vector<double>& xs, const std::vector<double>& ys, double dt,
                         const std::array<Point2, 2>& targets, SoupEvent event, Rng& rng, std::vector<Point2>& path) {
  EventEval out;
  path.clear();
  path.push_back({xs[0], ys[0]});
  Refiner ref{targets, rng, path};
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    ref.segment({xs[k], ys[k]}, {xs[k + 1], ys[k + 1]}, dt, 0);
  }
  path.back() = path.front();
  out.weight = std::exp(ref.log_weight);
  if (out.weight == 0.0) return out;
  out.capped = ref.capped;
  const Box box = bounding_box(path);
  auto disconnected = [&](Point2 p) {
    if (!box.strictly_contains(p)) return false;
    if (winding_number(path, p) != 0) return true;
    const std::optional<bool> inside = in_bounded_face(path, p);
    if (!inside) {
      out.failed = true;
      return false;
    }
    return *inside;
  };
  const bool dz = disconnected(targets[0]);
  switch (event) {
    case SoupEvent::both:
      out.hit = dz && disconnected(targets[1]);
      break;
    case SoupEvent::z_only:
      out.hit = dz && !disconnected(targets[1]);
      break;
    case SoupEvent::w_only:
      out.hit = !dz && disconnected(targets[1]);
      break;
    case SoupEvent::neither:
      out.hit = !dz && !disconnected(targets[1]);
      break;
  }
  return out;
}

// A coarse level settles the event when the continuous path almost surely
// cannot produce the disconnections it needs. Returns the bound on the chance
// that the settled outcome is wrong, or a negative value if not settled.
double settle_bound(SoupEvent event, double pz, double pw, double tol, bool& hit) {
  switch (event) {
    case SoupEvent::both:
      hit = false;
      return std::min(pz, pw) < tol ? std::min(pz, pw) : -1.0;
    case SoupEvent::z_only:
      hit = false;
      return pz < tol ? pz : -1.0;
    case SoupEvent::w_only:
      hit = false;
      return pw < tol ? pw : -1.0;
    case SoupEvent::neither:
      hit = true;
      return pz + pw < tol ? pz + pw : -1.0;
  }
  return -1.0;
}

void check_inside(const UpperHalfPoint& p, const SoupConfig& cfg, const char* name) {
  if (!(std::abs(p.x()) < cfg.box_halfwidth && p.y() < cfg.box_height)) {
    throw ConfigError(std::string("point ") + name + " lies outside the sampling box");
  }
}

struct SoupBlock {
  double sum = 0.0;
  double sum_sq = 0.0;
  double diff = 0.0;
  double diff_sq = 0.0;
  double settle = 0.0;
  std::int64_t detailed = 0;
  std::int64_t ambiguous = 0;
  std::int64_t indeterminate = 0;
  std::int64_t capped = 0;
};

}  // namespace

// ----- Rng ---------------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (index * 0xD1B54A32D192ED03ULL);
  const std::uint64_t b = splitmix64(state);
  const std::uint64_t c = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  Rng r(0);
  r.engine_.seed(seq);
  return r;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

// ----- configuration -------------------------------------------------------------

void SoupConfig::validate() const {
  if (!(box_halfwidth > 0.0 && box_height > 0.0)) throw ConfigError("box dimensions must be positive");
  if (!(t_min > 0.0 && t_min < t_max && std::isfinite(t_max))) {
    throw ConfigError("need 0 < t_min < t_max < inf");
  }
  if (steps_per_loop < 16) throw ConfigError("steps_per_loop must be at least 16");
  if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
  if (!(grid_resolution > 0.0)) throw ConfigError("grid_resolution must be positive");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(skip_tolerance >= 0.0 && skip_tolerance < 1.0)) {
    throw ConfigError("skip_tolerance must lie in [0, 1)");
  }
}

void SleConfig::validate() const {
  if (!(kappa > 0.0 && kappa <= 4.0)) throw ConfigError("kappa must lie in (0, 4]");
  if (n_traces < 1) throw ConfigError("n_traces must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (!(step_fraction > 0.0 && step_fraction < 1.0)) throw ConfigError("step_fraction in (0, 1)");
  if (!(angle_threshold > 0.0 && angle_threshold < 0.5)) {
    throw ConfigError("angle_threshold in (0, 0.5)");
  }
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
}

double truncated_measure(const SoupConfig& cfg) {
  return 2.0 * cfg.box_halfwidth * cfg.box_height / (2.0 * kPi) * (1.0 / cfg.t_min - 1.0 / cfg.t_max);
}

// ----- bridges and disconnection ----------------------------------------------

LoopSample sample_bridge(Point2 root, double t, int steps, Rng& rng) {
  if (!(t > 0.0)) throw DomainError("sample_bridge: duration must be positive");
  if (steps < 2) throw DomainError("sample_bridge: need at least 2 steps");
  const double sd = std::sqrt(t / steps);
  std::vector<double> xs, ys;
  bridge_coordinate(root.x, sd, steps, rng, xs);
  bridge_coordinate(root.y, sd, steps, rng, ys);
  LoopSample s;
  s.root = root;
  s.duration = t;
  s.path.resize(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) s.path[k] = {xs[k], ys[k]};
  s.path.back() = root;
  return s;
}

bool disconnects(const LoopSample& loop, Point2 p, double h) {
  if (!(h > 0.0)) throw DomainError("disconnects: cell size must be positive");
  if (loop.path.size() < 3) throw DomainError("disconnects: loop needs at least 3 vertices");
  const Box box = bounding_box(loop.path);
  if (!box.strictly_contains(p)) return false;
  LoopGrid grid(loop.path, box, h);
  if (grid.blocked(p)) throw IndeterminateError("point lies in a cell crossed by the loop");
  return grid.enclosed(p);
}

double truncation_budget(const UpperHalfPoint& z, const UpperHalfPoint& w, const SoupConfig& cfg) {
  cfg.validate();
  check_inside(z, cfg, "z");
  check_inside(w, cfg, "w");
  const double xl = std::min(z.x(), w.x());
  const double xr = std::max(z.x(), w.x());
  const double yl = std::min(z.y(), w.y());
  const double yh = std::max(z.y(), w.y());
  const double dx = xr - xl;
  const double dy = yh - yl;
  const double L = cfg.box_halfwidth;
  const double H = cfg.box_height;

  // Integrated over the root abscissa: bound on the chance that the x-bridge
  // covers [xl, xr].
  auto x_all = [&](double t) {
    return dx * std::exp(-dx * dx / (2.0 * t)) +
           std::sqrt(kPi * t / 2.0) * std::erfc(dx * std::sqrt(2.0 / t));
  };
  auto x_outside = [&](double t) {
    const double r = std::sqrt(2.0 / t);
    return std::sqrt(kPi * t / 8.0) * (std::erfc((L - xl) * r) + std::erfc((L + xr) * r));
  };
  // Integrated over the root height: the y-bridge must dip into (0, yl] and
  // rise to yh without leaving the half-plane.
  auto y_all = [&](double t) {
    const double cover = dy * std::exp(-dy * dy / (2.0 * t)) +
                         std::sqrt(kPi * t / 8.0) * std::erfc(dy * std::sqrt(2.0 / t)) +
                         yl * std::exp(-2.0 * dy * dy / t);
    return std::min(yl, cover);
  };
  auto y_above = [&](double t) { return yl * std::exp(-2.0 * (H - yl) * (H - yl) / t); };
  auto density = [](double t) { return 1.0 / (2.0 * kPi * t * t); };

  quad::QuadOptions opts;
  opts.abs_tol = 1e-14;
  opts.rel_tol = 1e-8;
  auto all_roots = [&](double t) { return t > 0.0 ? density(t) * x_all(t) * y_all(t) : 0.0; };
  const double small_t = quad::integrate_1d(all_roots, 0.0, cfg.t_min, opts).value;
  // t = t_max / v^2 maps (t_max, inf) to (0, 1); the integrand stays bounded at v = 0.
  auto large_integrand = [&](double v) {
    if (v <= 0.0) return 0.0;
    const double t = cfg.t_max / (v * v);
    return all_roots(t) * 2.0 * cfg.t_max / (v * v * v);
  };
  const double large_t = quad::integrate_1d(large_integrand, 0.0, 1.0, opts).value;
  auto outside_box = [&](double t) {
    return density(t) * (x_outside(t) * y_all(t) + x_all(t) * y_above(t));
  };
  const double box = quad::integrate_1d(outside_box, cfg.t_min, cfg.t_max, opts).value;
  return small_t + large_t + box;
}

SoupResult estimate_soup_event(const UpperHalfPoint& z, const UpperHalfPoint& w,
                               const SoupConfig& cfg, SoupEvent event) {
  cfg.validate();
  check_inside(z, cfg, "z");
  check_inside(w, cfg, "w");
  if (z == w) throw DegenerateError("degenerate pair: z and w coincide");
  const int n = cfg.steps_per_loop;
  const LevyPlan plan(n);
  const int top = plan.levels();
  // Coarse levels at which a sample may be settled early.
  std::vector<int> checks;
  for (int lv : {3, 5}) {
    if (lv < top) checks.push_back(lv);
  }
  std::vector<int> fine_idx(static_cast<std::size_t>(n) + 1);
  std::iota(fine_idx.begin(), fine_idx.end(), 0);
  std::vector<int> twice_idx(2 * static_cast<std::size_t>(n) + 1);
  std::iota(twice_idx.begin(), twice_idx.end(), 0);
  const double inv_tmin = 1.0 / cfg.t_min;
  const double inv_span = inv_tmin - 1.0 / cfg.t_max;
  const Point2 pz{z.x(), z.y()};
  const Point2 pw{w.x(), w.y()};
  const std::array<Point2, 2> targets = {pz, pw};

  auto block_fn = [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(b));
    SoupBlock acc;
    std::vector<double> xs(static_cast<std::size_t>(n) + 1), ys(xs.size());
    std::vector<double> xs2(2 * static_cast<std::size_t>(n) + 1), ys2(xs2.size());
    std::vector<Point2> path, path2;
    for (std::int64_t i = begin; i < end; ++i) {
      const Point2 root{cfg.box_halfwidth * (2.0 * rng.uniform() - 1.0),
                        cfg.box_height * rng.uniform_pos()};
      const double t = 1.0 / (inv_tmin - rng.uniform() * inv_span);
      const double dt = t / n;
      const double sd = std::sqrt(dt);
      xs.front() = xs.back() = root.x;
      ys.front() = ys.back() = root.y;

      // Coarse stages: y first (most loops are settled by their height
      // range alone), then x.
      int y_level = 0;
      int x_level = 0;
      bool settled = false;
      for (int lv : checks) {
        plan.fill(ys, y_level, lv, sd, rng);
        y_level = lv;
        const auto& idx = plan.known(lv);
        const double wc = survival(ys, idx, dt);
        if (wc == 0.0) {
          settled = true;
          break;
        }
        bool hit = false;
        for (bool use_x : {false, true}) {
          if (use_x) {
            plan.fill(xs, x_level, lv, sd, rng);
            x_level = lv;
          }
          const double bz = possible(pz, xs, ys, use_x, idx, dt);
          const double bw = possible(pw, xs, ys, use_x, idx, dt);
          const double err = settle_bound(event, bz, bw, cfg.skip_tolerance, hit);
          if (err >= 0.0) {
            const double score = hit ? wc : 0.0;
            acc.sum += score;
            acc.sum_sq += score * score;
            acc.settle += std::min(wc, err);
            settled = true;
            break;
          }
        }
        if (settled) break;
      }
      if (settled) continue;

      plan.fill(ys, y_level, top, sd, rng);
      plan.fill(xs, x_level, top, sd, rng);
      ++acc.detailed;
      const EventEval e1 = evaluate_event(xs, ys, dt, targets, event, rng, path);

      // Coupled check: the same bridge with every step halved.
      const double half_sd = 0.5 * sd;
      for (int k = 0; k < n; ++k) {
        xs2[2 * k] = xs[k];
        ys2[2 * k] = ys[k];
        xs2[2 * k + 1] = 0.5 * (xs[k] + xs[k + 1]) + half_sd * rng.normal();
        ys2[2 * k + 1] = 0.5 * (ys[k] + ys[k + 1]) + half_sd * rng.normal();
      }
      xs2.back() = root.x;
      ys2.back() = root.y;
      const EventEval e2 =
          evaluate_event(xs2, ys2, 0.5 * dt, targets, event, rng, path2);

      const double s1 = e1.hit ? e1.weight : 0.0;
      const double s2 = e2.hit ? e2.weight : 0.0;
      acc.sum += s1;
      acc.sum_sq += s1 * s1;
      acc.diff += s1 - s2;
      acc.diff_sq += (s1 - s2) * (s1 - s2);
      if (e1.hit != e2.hit) ++acc.ambiguous;
      if (e1.capped || e2.capped) ++acc.capped;
      if (e1.failed || e2.failed) {
        ++acc.indeterminate;
        acc.settle += std::max(e1.weight, e2.weight);
      }
    }
    return acc;
  };

  constexpr std::int64_t kBlock = 1 << 14;
  const auto blocks = run_blocks<SoupBlock>(cfg.n_samples, kBlock, cfg.workers, block_fn);
  const std::size_t nb = blocks.size();
  auto total = [&](double SoupBlock::*field) {
    return pairwise_sum(blocks, 0, nb, [field](const SoupBlock& s) { return s.*field; });
  };
  const double scale = truncated_measure(cfg);
  SoupResult res;
  res.estimate = make_estimate(total(&SoupBlock::sum), total(&SoupBlock::sum_sq), cfg.n_samples, scale);
  const Moments d = moments(total(&SoupBlock::diff), total(&SoupBlock::diff_sq), cfg.n_samples);
  // Hull errors of a polyline shrink like sqrt(dt): extrapolate the coupled
  // difference to dt -> 0, with two standard errors of slack.
  const double refine_factor = 1.0 / (1.0 - std::numbers::sqrt2 / 2.0);
  res.refinement_shift = scale * d.mean;
  res.discretization_budget =
      scale * (refine_factor * (std::abs(d.mean) + 2.0 * d.std_error) +
               total(&SoupBlock::settle) / static_cast<double>(cfg.n_samples));
  for (const auto& s : blocks) {
    res.detailed += s.detailed;
    res.ambiguous += s.ambiguous;
    res.indeterminate += s.indeterminate;
    res.capped += s.capped;
  }
  if (event == SoupEvent::both) res.truncation_budget = truncation_budget(z, w, cfg);
  return res;
}

SoupResult estimate_disconnect_mass(const UpperHalfPoint& z, const UpperHalfPoint& w,
                                    const SoupConfig& cfg) {
  return estimate_soup_event(z, w, cfg, SoupEvent::both);
}

Estimate estimate_fixed_root_survival(Point2 root, const SoupConfig& cfg) {
  cfg.validate();
  if (!(root.y > 0.0)) throw ConfigError("root must lie in the upper half-plane");
  const int n = cfg.steps_per_loop;
  std::vector<int> fine_idx(static_cast<std::size_t>(n) + 1);
  std::iota(fine_idx.begin(), fine_idx.end(), 0);
  const double inv_tmin = 1.0 / cfg.t_min;
  const double inv_span = inv_tmin - 1.0 / cfg.t_max;
  struct Block {
    double sum = 0.0, sum_sq = 0.0;
  };
  auto block_fn = [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(b));
    Block acc;
    std::vector<double> ys;
    for (std::int64_t i = begin; i < end; ++i) {
      const double t = 1.0 / (inv_tmin - rng.uniform() * inv_span);
      const double dt = t / n;
      bridge_coordinate(root.y, std::sqrt(dt), n, rng, ys);
      const double s = survival(ys, fine_idx, dt);
      acc.sum += s;
      acc.sum_sq += s * s;
    }
    return acc;
  };
  const auto blocks = run_blocks<Block>(cfg.n_samples, 1 << 14, cfg.workers, block_fn);
  const double sum = pairwise_sum(blocks, 0, blocks.size(), [](const Block& s) { return s.sum; });
  const double sum_sq =
      pairwise_sum(blocks, 0, blocks.size(), [](const Block& s) { return s.sum_sq; });
  // Per root the sampled duration law carries mass (1 / 2 pi)(1/t_min - 1/t_max).
  return make_estimate(sum, sum_sq, cfg.n_samples, inv_span / (2.0 * kPi));
}

// ----- SLE -----------------------------------------------------------------------

namespace {

using cplx = std::complex<double>;

// Root of q in the closed upper half-plane; on the real axis the sign follows
// `side`, the real part of the preimage relative to the slit base.
cplx upper_sqrt(cplx q, double side) {
  cplx s = std::sqrt(q);
  if (s.imag() < 0.0 || (s.imag() == 0.0 && (s.real() < 0.0) != (side < 0.0))) s = -s;
  return s;
}

void check_half_plane(cplx v) {
  if (!(v.imag() >= -1e-12 * (1.0 + std::abs(v))) || !std::isfinite(v.real())) {
    throw NonConvergenceError("Loewner map left the upper half-plane");
  }
}

}  // namespace

Polyline sle_trace(double kappa, double T, int n_steps, Rng& rng) {
  if (!(kappa > 0.0 && kappa <= 4.0)) throw DomainError("sle_trace: kappa must lie in (0, 4]");
  if (!(T > 0.0)) throw DomainError("sle_trace: T must be positive");
  if (n_steps < 100) throw DomainError("sle_trace: need at least 100 steps");
  const double dt = T / n_steps;
  const double slit2 = 4.0 * dt;
  const double sd = std::sqrt(kappa * dt);
  std::vector<double> xi(static_cast<std::size_t>(n_steps) + 1, 0.0);
  for (int k = 1; k <= n_steps; ++k) xi[k] = xi[k - 1] + sd * rng.normal();
  Polyline trace(static_cast<std::size_t>(n_steps) + 1);
  trace[0] = 0.0;
  // Step j (1-based) holds the driving value xi[j-1]; its tip is xi + 2i sqrt(dt),
  // pulled back through the inverse slit maps of the earlier steps.
  for (int k = 1; k <= n_steps; ++k) {
    cplx v(xi[k - 1], 2.0 * std::sqrt(dt));
    for (int j = k - 1; j >= 1; --j) {
      const double base = xi[j - 1];
      const cplx u = v - base;
      v = base + upper_sqrt(u * u - slit2, u.real());
      check_half_plane(v);
      if (v.imag() < 0.0) v.imag(0.0);
    }
    trace[k] = v;
  }
  return trace;
}

double half_plane_capacity(const Polyline& trace) {
  if (trace.size() < 2) throw DomainError("half_plane_capacity: need at least 2 points");
  if (trace.front().imag() != 0.0) {
    throw DomainError("half_plane_capacity: trace must start on the real axis");
  }
  std::vector<cplx> img(trace.begin(), trace.end());
  double hcap = 0.0;
  for (std::size_t k = 1; k < img.size(); ++k) {
    const double base = img[k].real();
    const double h = std::max(0.0, img[k].imag());
    hcap += 0.5 * h * h;
    const double h2 = h * h;
    for (std::size_t j = k + 1; j < img.size(); ++j) {
      const cplx u = img[j] - base;
      img[j] = base + upper_sqrt(u * u + h2, u.real());
    }
  }
  return hcap;
}

PassResult estimate_pass_combo(const UpperHalfPoint& z, const UpperHalfPoint& w,
                               const SleConfig& cfg) {
  cfg.validate();
  if (z == w) throw DegenerateError("degenerate pair: z and w coincide");
  const double theta = cfg.angle_threshold;
  struct Block {
    std::array<std::int64_t, 4> counts{};
    std::int64_t undecided = 0;
  };
  // Flows z and w under the Loewner equation with piecewise constant
  // driving, the driving increment split evenly around each slit map.
  auto run = [&](double step_fraction, std::uint64_t stream_base) {
    auto block_fn = [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
      Rng rng = Rng::stream(cfg.seed, stream_base + static_cast<std::uint64_t>(b));
      Block acc;
      for (std::int64_t i = begin; i < end; ++i) {
        cplx pts[2] = {cplx(z.x(), z.y()), cplx(w.x(), w.y())};
        int side[2] = {-1, -1};  // 0 = curve passes left of the point, 1 = right
        std::int64_t steps = 0;
        while ((side[0] < 0 || side[1] < 0) && steps < cfg.max_steps) {
          double m = kInf;
          for (int p = 0; p < 2; ++p) {
            if (side[p] < 0) m = std::min(m, std::norm(pts[p]));
          }
          const double dt = step_fraction * m;
          const double dxi = std::sqrt(cfg.kappa * dt) * rng.normal();
          for (int p = 0; p < 2; ++p) {
            if (side[p] >= 0) continue;
            const cplx u = pts[p] - 0.5 * dxi;
            pts[p] = upper_sqrt(u * u + 4.0 * dt, u.real()) - 0.5 * dxi;
            const double arg = std::atan2(pts[p].imag(), pts[p].real());
            // A point right of the curve has its image drift to angle 0.
            if (arg < theta) {
              side[p] = 0;
            } else if (arg > kPi - theta) {
              side[p] = 1;
            }
          }
          ++steps;
        }
        if (side[0] < 0 || side[1] < 0) {
          ++acc.undecided;
        } else {
          ++acc.counts[static_cast<std::size_t>(2 * side[0] + side[1])];
        }
      }
      return acc;
    };
    Block total;
    for (const auto& bl : run_blocks<Block>(cfg.n_traces, 1 << 10, cfg.workers, block_fn)) {
      for (std::size_t c = 0; c < 4; ++c) total.counts[c] += bl.counts[c];
      total.undecided += bl.undecided;
    }
    return total;
  };

  const Block main = run(cfg.step_fraction, 0);
  PassResult res;
  res.counts = main.counts;
  res.undecided = main.undecided;
  res.decided = cfg.n_traces - res.undecided;
  auto freq = [](std::int64_t count, std::int64_t decided) {
    Estimate e;
    e.n = decided;
    e.mass_scale = 1.0;
    if (decided == 0) return e;
    const double nd = static_cast<double>(decided);
    const double p = static_cast<double>(count) / nd;
    e.mean = p;
    e.std_error = std::sqrt(p * (1.0 - p) / nd);
    return e;
  };
  for (std::size_t c = 0; c < 4; ++c) res.combos[c] = freq(res.counts[c], res.decided);
  res.left_z = freq(res.counts[0] + res.counts[1], res.decided);
  res.left_w = freq(res.counts[0] + res.counts[2], res.decided);

  // Step bias: an independent pass at twice the step, extrapolated assuming
  // the error is quadratic in the step fraction.
  double step_bias = 0.0;
  if (cfg.step_check) {
    const Block coarse = run(2.0 * cfg.step_fraction, std::uint64_t{1} << 40);
    const std::int64_t coarse_decided = cfg.n_traces - coarse.undecided;
    for (std::size_t c = 0; c < 4; ++c) {
      const Estimate e = freq(coarse.counts[c], coarse_decided);
      const double diff = std::abs(e.mean - res.combos[c].mean);
      const double se = std::hypot(e.std_error, res.combos[c].std_error);
      res.step_shift = std::max(res.step_shift, diff);
      step_bias = std::max(step_bias, (diff + 2.0 * se) / 3.0);
    }
  }
  // From angle theta the chance of ending on the far side is the passage
  // probability of a point at that angle; either point may reverse.
  const UpperHalfPoint edge(std::cos(theta), std::sin(theta));
  const double reverse = 1.0 - loop::schramm_left_pass(edge, cfg.kappa);
  const double undecided_frac =
      static_cast<double>(res.undecided) / static_cast<double>(cfg.n_traces);
  res.bias_budget = undecided_frac + 2.0 * reverse + step_bias;
  return res;
}

}  // namespace loopmass::mc

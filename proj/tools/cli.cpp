#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <system_error>

#include "loopmass/bubble_integrals.hpp"
#include "loopmass/error.hpp"
#include "loopmass/geometry.hpp"
#include "loopmass/loopmeasure.hpp"
#include "loopmass/montecarlo.hpp"
#include "loopmass/specialfn.hpp"
#include "verify.hpp"

namespace loopmass::cli {
namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ----- logging -----------------------------------------------------------------

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {
    const char* env = std::getenv("LOOPMASS_LOG");
    if (env == nullptr || *env == '\0') return;
    const std::string v(env);
    if (v == "error") {
      level_ = Level::error;
    } else if (v == "warn") {
      level_ = Level::warn;
    } else if (v == "info") {
      level_ = Level::info;
    } else if (v == "debug") {
      level_ = Level::debug;
    } else {
      warn("unknown LOOPMASS_LOG value '" + v + "', using warn");
    }
  }
  void error(const std::string& m) const { emit(Level::error, "error", m); }
  void warn(const std::string& m) const { emit(Level::warn, "warn", m); }
  void info(const std::string& m) const { emit(Level::info, "info", m); }
  void debug(const std::string& m) const { emit(Level::debug, "debug", m); }

 private:
  void emit(Level l, const char* tag, const std::string& m) const {
    if (static_cast<int>(l) <= static_cast<int>(level_)) err_ << "[" << tag << "] " << m << "\n";
  }
  std::ostream& err_;
  Level level_ = Level::warn;
};

// ----- text <-> numbers ----------------------------------------------------------

// Shortest text that reads back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != end) {
    throw UsageError(what + ": cannot parse '" + std::string(text) + "' as a number");
  }
  return v;
}

std::int64_t parse_int(std::string_view text, const std::string& what) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != end) {
    // Accept integral values written in floating notation, e.g. 2e6.
    const double d = parse_double(text, what);
    if (d != std::floor(d) || std::abs(d) > 9.0e18) {
      throw UsageError(what + ": '" + std::string(text) + "' is not an integer");
    }
    return static_cast<std::int64_t>(d);
  }
  return v;
}

bool parse_bool(std::string_view text, const std::string& what) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  throw UsageError(what + ": '" + std::string(text) + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& text, std::size_t n, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_double(std::string_view(text).substr(start, comma - start), what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() != n) {
    throw UsageError(what + ": expected " + std::to_string(n) + " comma-separated numbers");
  }
  return out;
}

UpperHalfPoint half_point(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, 2, what);
  return {v[0], v[1]};
}

UnitDiskPoint disk_point(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, 2, what);
  return {v[0], v[1]};
}

std::string point_text(double a, double b) { return num(a) + "," + num(b); }

json mass_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

// ----- key=value configuration ----------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  KeyValues kv;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    for (auto& ch : key) {
      if (ch == '-') ch = '_';
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

// A configuration key settable from the file or from --key-name on the command line.
struct Key {
  std::string name;
  std::string help;
  std::function<void(const std::string&)> set;
  std::string flag_value;  // bound to the CLI option
};

std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (auto& ch : f) {
    if (ch == '_') ch = '-';
  }
  return f;
}

class KeyTable {
 public:
  void add(std::string name, std::string help, std::function<void(const std::string&)> set) {
    keys_.push_back({std::move(name), std::move(help), std::move(set), {}});
  }
  void register_flags(CLI::App* app) {
    for (auto& k : keys_) app->add_option(flag_name(k.name), k.flag_value, k.help);
  }
  // Applies file values, then flags given on the command line.
  void apply(CLI::App* app, const std::string& config_path) {
    if (!config_path.empty()) {
      for (const auto& [key, value] : read_config_file(config_path)) find(key).set(value);
    }
    for (auto& k : keys_) {
      if (app->count(flag_name(k.name)) > 0) k.set(k.flag_value);
    }
  }

 private:
  Key& find(const std::string& name) {
    for (auto& k : keys_) {
      if (k.name == name) return k;
    }
    throw UsageError("unknown config key '" + name + "'");
  }
  std::vector<Key> keys_;
};

// ----- commands -----------------------------------------------------------------

struct MassArgs {
  std::string z, w;
  std::string domain = "half-plane";
  std::string form = "han";
  std::string event = "both";
  bool paper_literal = false;
};

int run_mass(const MassArgs& a, std::ostream& out, const Log& log) {
  json j;
  double sig = 0.0;
  double one_minus = 0.0;
  UpperHalfPoint zh(0.0, 1.0), wh(0.0, 1.0);
  if (a.domain == "disk") {
    const UnitDiskPoint zd = disk_point(a.z, "--z");
    const UnitDiskPoint wd = disk_point(a.w, "--w");
    sig = sigma_disk(zd, wd);
    one_minus = one_minus_sigma_disk(zd, wd);
    zh = disk_to_half(zd);
    wh = disk_to_half(wd);
    j["z"] = point_text(zd.re(), zd.im());
    j["w"] = point_text(wd.re(), wd.im());
  } else {
    zh = half_point(a.z, "--z");
    wh = half_point(a.w, "--w");
    sig = sigma(zh, wh);
    one_minus = one_minus_sigma(zh, wh);
    j["z"] = point_text(zh.x(), zh.y());
    j["w"] = point_text(wh.x(), wh.y());
  }
  const bool near_boundary = zh.y() < kNearBoundaryHeight || wh.y() < kNearBoundaryHeight;
  if (near_boundary) log.warn("a point lies within 1e-12 of the boundary; the mass tends to 0 there");
  j["domain"] = a.domain;
  j["event"] = a.event;

  Mass m;
  if (a.event == "both") {
    j["form"] = a.form;
    if (a.domain == "disk" && a.form == "han") {
      m = loop::mass_disconnect_two_disk(disk_point(a.z, "--z"), disk_point(a.w, "--w"));
    } else if (a.form == "han") {
      m = loop::mass_disconnect_two_han(zh, wh);
    } else if (a.form == "cardy") {
      m = loop::mass_disconnect_two_cardy(zh, wh);
    } else {
      m = loop::mass_via_ab(zh, wh);
    }
  } else {
    const loop::OneSided which = a.event == "z_only"   ? loop::OneSided::z_only
                                 : a.event == "w_only" ? loop::OneSided::w_only
                                                       : loop::OneSided::neither;
    const auto coefficient = a.paper_literal ? loop::OneSidedCoefficient::one_tenth
                                             : loop::OneSidedCoefficient::two_fifths;
    j["form"] = "bubble_one_sided";
    j["coefficient"] = a.paper_literal ? "1/10" : "2/5";
    m = loop::bubble_one_sided(zh, wh, which, coefficient);
  }
  j["mass"] = mass_json(m.value);
  j["method"] = std::string(to_string(m.method));
  j["sigma"] = sig;
  j["one_minus_sigma"] = one_minus;
  j["eta"] = sig / (sig - 1.0);
  j["near_boundary"] = near_boundary;
  out << j.dump(2) << "\n";
  return kOk;
}

struct ScanArgs {
  std::string z;
  std::string rect;
  int n = 0;
  std::string out_path;
};

int run_scan(const ScanArgs& a, std::ostream& out, const Log& log) {
  const UpperHalfPoint z = half_point(a.z, "--z");
  const auto r = parse_list(a.rect, 4, "--rect");
  if (a.n < 1) throw UsageError("--n must be at least 1");
  if (!(r[2] > 0.0 && r[3] > 0.0)) throw DomainError("--rect: v range must lie in the upper half-plane");
  auto coord = [&](double lo, double hi, int k) {
    return a.n == 1 ? lo : lo + (hi - lo) * k / (a.n - 1);
  };
  std::ostringstream csv;
  csv << "u,v,sigma,mass\n";
  for (int jv = 0; jv < a.n; ++jv) {
    const double v = coord(r[2], r[3], jv);
    for (int iu = 0; iu < a.n; ++iu) {
      const double u = coord(r[0], r[1], iu);
      const UpperHalfPoint w(u, v);
      if (w == z) {
        csv << num(u) << ',' << num(v) << ",0,inf\n";
        continue;
      }
      csv << num(u) << ',' << num(v) << ',' << num(sigma(z, w)) << ','
          << num(loop::mass_disconnect_two_han(z, w).value) << '\n';
    }
  }
  if (a.out_path.empty()) {
    out << csv.str();
  } else {
    std::ofstream f(a.out_path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + a.out_path + "'");
    f << csv.str();
    f.close();
    if (!f) throw UsageError("cannot write '" + a.out_path + "'");
    log.info("wrote " + std::to_string(a.n * a.n) + " rows to " + a.out_path);
  }
  return kOk;
}

int run_verify(const std::string& suite_name, double scale, std::ostream& out, const Log& log) {
  const Suite suite = suite_name == "identities" ? Suite::identities
                      : suite_name == "theorem"  ? Suite::theorem
                      : suite_name == "integrals" ? Suite::integrals
                                                  : Suite::all;
  const auto checks = run_suite(suite, scale);
  int failed = 0;
  for (const auto& c : checks) {
    out << format_check(c) << "\n";
    if (!c.pass) ++failed;
  }
  out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  if (failed > 0) log.error(std::to_string(failed) + " verification check(s) failed");
  return failed == 0 ? kOk : kVerifyFailed;
}

struct QuadArgs {
  std::string what = "double";
  std::string z, w;
  double y = 0.0;
  std::optional<double> tol;
};

json quad_json(const quad::QuadResult& r) {
  return json{{"value", r.value}, {"abs_error_estimate", r.abs_error_estimate},
              {"evaluations", r.evaluations}};
}

int run_quad(const QuadArgs& a, std::ostream& out) {
  const UpperHalfPoint z = half_point(a.z, "--z");
  const UpperHalfPoint w = half_point(a.w, "--w");
  json j;
  j["integral"] = a.what;
  j["z"] = point_text(z.x(), z.y());
  j["w"] = point_text(w.x(), w.y());
  if (a.what == "inner") {
    j["y"] = a.y;
    const auto r = quad::inner_integral_f(a.y, z, w, a.tol.value_or(1e-12));
    j["result"] = quad_json(r);
    j["closed_form"] = quad::inner_integral_f_exact(a.y, z, w);
  } else if (a.what == "a") {
    j["result"] = quad_json(quad::a_term_quadrature(z, w, a.tol.value_or(1e-12)));
    j["closed_form"] = loop::a_term(z, w);
  } else if (a.what == "b") {
    j["result"] = quad_json(quad::b_term_quadrature(z, w, a.tol.value_or(1e-12)));
    j["closed_form"] = loop::b_term(z, w);
  } else {
    const auto r = a.what == "reduced" ? quad::mass_via_reduced_integral(z, w, a.tol.value_or(1e-9))
                                       : quad::mass_via_double_integral(z, w, a.tol.value_or(1e-7));
    j["result"] = json{{"value", r.mass.value},
                       {"abs_error_estimate", r.abs_error_estimate},
                       {"evaluations", r.evaluations}};
    j["closed_form"] = loop::mass_disconnect_two_han(z, w).value;
  }
  if (a.tol) j["tol"] = *a.tol;
  const double value = j["result"]["value"].get<double>();
  const double exact = j["closed_form"].get<double>();
  j["rel_diff"] = std::abs(value - exact) / std::abs(exact);
  out << j.dump(2) << "\n";
  return kOk;
}

int run_constants(std::ostream& out) {
  auto entry = [](double computed, double reference) {
    return json{{"computed", computed}, {"reference", reference},
                {"delta", std::abs(computed - reference)}};
  };
  const double unit = special::hyp3f2(1.0, 4.0 / 3.0, 1.0, 5.0 / 3.0, 2.0, 1.0);
  const double root3 = std::sqrt(3.0);
  json j;
  j["3F2_unit"] = entry(unit, 2.0 * kPi / root3);
  j["digamma_gap"] =
      entry(special::digamma(2.0 / 3.0) - special::digamma(1.0 / 3.0), kPi / root3);
  j["pi_over_5sqrt3"] = entry(unit / 10.0, kPi / (5.0 * root3));
  j["partial_fraction_unit"] = entry(special::hyp3f2_unit_11a(4.0 / 3.0, 5.0 / 3.0), 2.0 * kPi / root3);
  j["thomae_unit"] =
      entry(special::thomae_transform(1.0, 4.0 / 3.0, 1.0, 5.0 / 3.0, 2.0), 2.0 * kPi / root3);
  j["gamma_reflection_third"] =
      entry(special::gamma_fn(1.0 / 3.0) * special::gamma_fn(2.0 / 3.0), 2.0 * kPi / root3);
  j["sle_bubble_prefactor_8_3"] = entry(loop::detail::sle_bubble_prefactor(8.0 / 3.0), 0.25);
  j["restriction_radius_r1"] =
      entry(loop::restriction_radius_mass(1.0, 1e-4), 5.0 / 8.0);
  out << j.dump(2) << "\n";
  return kOk;
}

// ----- Monte Carlo commands ------------------------------------------------------------

mc::SoupEvent parse_event(const std::string& e) {
  if (e == "both") return mc::SoupEvent::both;
  if (e == "z_only") return mc::SoupEvent::z_only;
  if (e == "w_only") return mc::SoupEvent::w_only;
  if (e == "neither") return mc::SoupEvent::neither;
  throw UsageError("unknown event '" + e + "' (both, z_only, w_only, neither)");
}

struct SoupJob {
  mc::SoupConfig cfg;
  std::string z = "0,1";
  std::string w = "0,2";
  std::string event = "both";
};

void soup_keys(KeyTable& t, SoupJob& job) {
  auto& c = job.cfg;
  t.add("z", "first point x,y", [&](const std::string& v) { job.z = v; });
  t.add("w", "second point u,v", [&](const std::string& v) { job.w = v; });
  t.add("event", "both, z_only, w_only or neither", [&](const std::string& v) { job.event = v; });
  t.add("box_halfwidth", "root box half-width L",
        [&](const std::string& v) { c.box_halfwidth = parse_double(v, "box_halfwidth"); });
  t.add("box_height", "root box height H",
        [&](const std::string& v) { c.box_height = parse_double(v, "box_height"); });
  t.add("t_min", "shortest loop duration", [&](const std::string& v) { c.t_min = parse_double(v, "t_min"); });
  t.add("t_max", "longest loop duration", [&](const std::string& v) { c.t_max = parse_double(v, "t_max"); });
  t.add("steps_per_loop", "bridge steps",
        [&](const std::string& v) { c.steps_per_loop = static_cast<int>(parse_int(v, "steps_per_loop")); });
  t.add("n_samples", "number of sampled loops",
        [&](const std::string& v) { c.n_samples = parse_int(v, "n_samples"); });
  t.add("seed", "random seed", [&](const std::string& v) {
    c.seed = static_cast<std::uint64_t>(parse_int(v, "seed"));
  });
  t.add("grid_resolution", "flood-fill cell size",
        [&](const std::string& v) { c.grid_resolution = parse_double(v, "grid_resolution"); });
  t.add("workers", "worker threads",
        [&](const std::string& v) { c.workers = static_cast<int>(parse_int(v, "workers")); });
  t.add("skip_tolerance", "coarse-level settle tolerance",
        [&](const std::string& v) { c.skip_tolerance = parse_double(v, "skip_tolerance"); });
}

json estimate_json(const mc::Estimate& e) {
  return json{{"estimate", e.mean}, {"stderr", e.std_error}, {"n", e.n}, {"mass_scale", e.mass_scale}};
}

int run_mc_soup(SoupJob& job, std::ostream& out, const Log& log) {
  const UpperHalfPoint z = half_point(job.z, "z");
  const UpperHalfPoint w = half_point(job.w, "w");
  const mc::SoupEvent event = parse_event(job.event);
  const auto& c = job.cfg;
  log.info("mc-soup: " + std::to_string(c.n_samples) + " samples, " + std::to_string(c.workers) +
           " worker(s)");
  const auto t0 = std::chrono::steady_clock::now();
  const mc::SoupResult r = mc::estimate_soup_event(z, w, c, event);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log.info("mc-soup: done in " + num(secs) + " s");

  json j = estimate_json(r.estimate);
  j["seed"] = c.seed;
  j["config"] = json{{"z", point_text(z.x(), z.y())},
                     {"w", point_text(w.x(), w.y())},
                     {"event", job.event},
                     {"box_halfwidth", c.box_halfwidth},
                     {"box_height", c.box_height},
                     {"t_min", c.t_min},
                     {"t_max", c.t_max},
                     {"steps_per_loop", c.steps_per_loop},
                     {"n_samples", c.n_samples},
                     {"seed", c.seed},
                     {"grid_resolution", c.grid_resolution},
                     {"workers", c.workers},
                     {"skip_tolerance", c.skip_tolerance}};
  json budget;
  budget["truncation"] = r.truncation_budget ? json(*r.truncation_budget) : json(nullptr);
  budget["discretization"] = r.discretization_budget;
  budget["total"] = r.truncation_budget ? json(*r.truncation_budget + r.discretization_budget)
                                        : json(nullptr);
  j["bias_budget"] = budget;
  j["diagnostics"] = json{{"refinement_shift", r.refinement_shift},
                          {"detailed", r.detailed},
                          {"ambiguous", r.ambiguous},
                          {"indeterminate", r.indeterminate},
                          {"capped", r.capped}};
  if (event == mc::SoupEvent::both) {
    const double exact = loop::mass_disconnect_two_han(z, w).value;
    j["closed_form"] = exact;
    const double allowance = 3.0 * r.estimate.std_error + *r.truncation_budget + r.discretization_budget;
    j["covered"] = std::abs(r.estimate.mean - exact) <= allowance;
  }
  out << j.dump(2) << "\n";
  return kOk;
}

struct SleJob {
  mc::SleConfig cfg;
  std::string z = "1,1";
  std::string w = "-0.5,2";
};

void sle_keys(KeyTable& t, SleJob& job) {
  auto& c = job.cfg;
  t.add("z", "first point x,y", [&](const std::string& v) { job.z = v; });
  t.add("w", "second point u,v", [&](const std::string& v) { job.w = v; });
  t.add("kappa", "SLE parameter in (0, 4]", [&](const std::string& v) { c.kappa = parse_double(v, "kappa"); });
  t.add("n_traces", "number of curves", [&](const std::string& v) { c.n_traces = parse_int(v, "n_traces"); });
  t.add("seed", "random seed", [&](const std::string& v) {
    c.seed = static_cast<std::uint64_t>(parse_int(v, "seed"));
  });
  t.add("workers", "worker threads",
        [&](const std::string& v) { c.workers = static_cast<int>(parse_int(v, "workers")); });
  t.add("step_fraction", "Loewner step relative to |g - xi|^2",
        [&](const std::string& v) { c.step_fraction = parse_double(v, "step_fraction"); });
  t.add("angle_threshold", "decision angle",
        [&](const std::string& v) { c.angle_threshold = parse_double(v, "angle_threshold"); });
  t.add("max_steps", "step cap per curve", [&](const std::string& v) { c.max_steps = parse_int(v, "max_steps"); });
  t.add("step_check", "run the step-doubling bias pass",
        [&](const std::string& v) { c.step_check = parse_bool(v, "step_check"); });
}

int run_mc_sle(SleJob& job, std::ostream& out, const Log& log) {
  const UpperHalfPoint z = half_point(job.z, "z");
  const UpperHalfPoint w = half_point(job.w, "w");
  const auto& c = job.cfg;
  log.info("mc-sle: " + std::to_string(c.n_traces) + " traces, kappa " + num(c.kappa));
  const mc::PassResult r = mc::estimate_pass_combo(z, w, c);
  const bool closed = std::abs(c.kappa - 8.0 / 3.0) < 1e-12;

  json j;
  j["seed"] = c.seed;
  j["config"] = json{{"z", point_text(z.x(), z.y())},
                     {"w", point_text(w.x(), w.y())},
                     {"kappa", c.kappa},
                     {"n_traces", c.n_traces},
                     {"seed", c.seed},
                     {"workers", c.workers},
                     {"step_fraction", c.step_fraction},
                     {"angle_threshold", c.angle_threshold},
                     {"max_steps", c.max_steps},
                     {"step_check", c.step_check}};
  const char* names[4] = {"left_left", "left_right", "right_left", "right_right"};
  const loop::PassageSide sides[4] = {{loop::Side::left, loop::Side::left},
                                      {loop::Side::left, loop::Side::right},
                                      {loop::Side::right, loop::Side::left},
                                      {loop::Side::right, loop::Side::right}};
  json combos;
  for (int k = 0; k < 4; ++k) {
    json e = estimate_json(r.combos[k]);
    e["count"] = r.counts[k];
    if (closed) e["closed_form"] = loop::sle_pass_combo(z, w, sides[k]);
    combos[names[k]] = e;
  }
  j["combos"] = combos;
  json lz = estimate_json(r.left_z);
  lz["schramm"] = loop::schramm_left_pass(z, c.kappa);
  json lw = estimate_json(r.left_w);
  lw["schramm"] = loop::schramm_left_pass(w, c.kappa);
  j["left_z"] = lz;
  j["left_w"] = lw;
  j["decided"] = r.decided;
  j["undecided"] = r.undecided;
  j["step_shift"] = r.step_shift;
  j["bias_budget"] = r.bias_budget;
  out << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Log log(err);
  CLI::App app{"Masses of Brownian loops disconnecting two points from the boundary", "loopmass"};
  app.require_subcommand(1, 1);

  MassArgs mass_args;
  auto* mass = app.add_subcommand("mass", "closed-form loop or bubble mass for a pair of points");
  mass->add_option("--z", mass_args.z, "first point x,y")->required();
  mass->add_option("--w", mass_args.w, "second point u,v")->required();
  mass->add_option("--domain", mass_args.domain)->check(CLI::IsMember({"half-plane", "disk"}));
  mass->add_option("--form", mass_args.form)->check(CLI::IsMember({"han", "cardy", "ab"}));
  mass->add_option("--event", mass_args.event, "both, or a one-sided bubble event")
      ->check(CLI::IsMember({"both", "z_only", "w_only", "neither"}));
  mass->add_flag("--paper-literal", mass_args.paper_literal,
                 "one-sided bubble masses with the 1/10 coefficient");

  ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "CSV of the mass over an n x n grid of w");
  scan->add_option("--z", scan_args.z, "fixed point x,y")->required();
  scan->add_option("--rect", scan_args.rect, "u0,u1,v0,v1")->required();
  scan->add_option("--n", scan_args.n, "grid points per side")->required();
  scan->add_option("--out", scan_args.out_path, "output file (stdout if absent)");

  std::string suite = "all";
  double scale = 1.0;
  auto* verify = app.add_subcommand("verify", "run identity and cross-check suites");
  verify->add_option("suite", suite)->check(CLI::IsMember({"identities", "theorem", "integrals", "all"}));
  verify->add_option("--threshold-scale", scale, "multiply every threshold");

  QuadArgs quad_args;
  double tol = 0.0;
  auto* quadc = app.add_subcommand("quad", "bubble-decomposition integrals by quadrature");
  quadc->add_option("--integral", quad_args.what)
      ->check(CLI::IsMember({"double", "reduced", "inner", "a", "b"}));
  quadc->add_option("--z", quad_args.z)->required();
  quadc->add_option("--w", quad_args.w)->required();
  quadc->add_option("--y", quad_args.y, "height for --integral inner");
  quadc->add_option("--tol", tol, "relative tolerance");

  auto* constants = app.add_subcommand("constants", "named constants with reference values");

  SoupJob soup_job;
  KeyTable soup_table;
  soup_keys(soup_table, soup_job);
  std::string soup_config;
  auto* soup = app.add_subcommand("mc-soup", "Monte Carlo loop-soup estimate");
  soup_table.register_flags(soup);
  soup->add_option("--config", soup_config, "key=value file; flags override it");

  SleJob sle_job;
  KeyTable sle_table;
  sle_keys(sle_table, sle_job);
  std::string sle_config;
  auto* sle = app.add_subcommand("mc-sle", "Monte Carlo SLE passage frequencies");
  sle_table.register_flags(sle);
  sle->add_option("--config", sle_config, "key=value file; flags override it");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*mass) return run_mass(mass_args, out, log);
    if (*scan) return run_scan(scan_args, out, log);
    if (*verify) return run_verify(suite, scale, out, log);
    if (*quadc) {
      if (quadc->count("--tol") > 0) quad_args.tol = tol;
      return run_quad(quad_args, out);
    }
    if (*constants) return run_constants(out);
    if (*soup) {
      soup_table.apply(soup, soup_config);
      return run_mc_soup(soup_job, out, log);
    }
    if (*sle) {
      sle_table.apply(sle, sle_config);
      return run_mc_sle(sle_job, out, log);
    }
  } catch (const UsageError& e) {
    log.error(e.what());
    return kUsage;
  } catch (const NonConvergenceError& e) {
    log.error(e.what());
    return kNoConvergence;
  } catch (const DomainError& e) {
    log.error(e.what());
    return kDomain;
  } catch (const std::exception& e) {
    log.error(std::string("unexpected failure: ") + e.what());
    return kUsage;
  }
  return kUsage;
}

}  // namespace loopmass::cli

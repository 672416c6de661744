#pragma once

// Executable cross-checks of the closed forms, grouped in suites.

#include <string>
#include <vector>

namespace loopmass::cli {

struct Check {
  std::string name;       // e.g. "phi_grid max |φ|"
  double residual = 0.0;  // worst observed deviation
  double threshold = 0.0;
  bool pass = false;
};

enum class Suite { identities, theorem, integrals, all };

/// Runs the suite. `threshold_scale` multiplies every threshold; values
/// below 1 tighten the checks.
std::vector<Check> run_suite(Suite suite, double threshold_scale = 1.0);

/// "name < threshold: PASS (residual r)".
std::string format_check(const Check& c);

}  // namespace loopmass::cli

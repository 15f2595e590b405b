#pragma once
// Self-contained consistency checks for the numerical kernels: operator
// algebra (biharmonic symmetry, Airy residuals, bracket symmetry under
// refinement), the delayed-potential quadrature against an independent
// dense evaluation, the delay horizon formula against random sampling of
// the escape condition, closure of the flow-trace identity under quadrature
// refinement, and fixed-point drift of the time integrator. Each check
// reports a measured value against a fixed threshold; the command-line
// `verify` subcommand maps any failure to a dedicated exit code.

#include <iosfwd>
#include <string>
#include <vector>

namespace panelflow {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;  // quantity compared against the threshold
  double threshold = 0.0;
  std::string detail;     // grids, norms, per-level values
};

struct VerifyOptions {
  bool quick = false;   // smaller grids and fewer samples, same check set
  unsigned seed = 2024; // base seed for all randomized checks
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed() const;
};

// Runs every check; when `log` is non-null, streams one line per check.
VerifyReport run_verify(const VerifyOptions& options = {}, std::ostream* log = nullptr);

// Single JSON object with the format tag, per-check results, and the verdict.
std::string verify_report_json(const VerifyReport& report);

}  // namespace panelflow

#pragma once

// Experiment orchestration on top of the simulator: single trajectories with
// diagnostic probes, manifest-driven simulate/stationary pipelines, and
// concurrent parameter sweeps with a merged summary.

#include <iosfwd>
#include <string>
#include <vector>

#include "panelflow/diagnostics.hpp"
#include "panelflow/dynamics.hpp"
#include "panelflow/io.hpp"
#include "panelflow/manifest.hpp"
#include "panelflow/stationary.hpp"

namespace panelflow {

struct RunProbes {
  int record_stride = 1;  // steps between diagnostics records
  int trace_stride = 0;   // steps between trace-residual evaluations; 0 = off
  const EquilibriumSet* catalog = nullptr;  // distance target, borrowed
};

struct TrajectoryRecord {
  std::vector<DiagnosticsRecord> records;
  ScalarField final_u, final_ut;
  double final_t = 0.0;
  long steps = 0;
  bool aborted = false;        // a non-finite state ended the run early
  std::string abort_reason;
};

// Integrates to config.t_end recording diagnostics at t = 0, every
// record_stride-th step, and the final step. A numerical abort does not
// throw: the last valid state is recorded with the non-finite flag raised
// and `aborted` is set, so partial records survive.
TrajectoryRecord run(const SimConfig& config, const PlateGrid& grid, const ScalarField& u0,
                     const ScalarField& u1, const RunProbes& probes = {});

// Defaults the sweep summary uses to classify each cell. The verdict window
// is in time units; the tolerances bound the trailing-window velocity norm
// and distance to the catalog (when one is present).
inline constexpr double kSummaryWindow = 1.0;
inline constexpr double kSummaryUtTol = 1e-6;
inline constexpr double kSummaryDistTol = 1e-4;

// One sweep cell end to end: trajectory, records CSV, final snapshot, and
// the classification row. Reads an equilibrium catalog from the cell's
// output directory when one exists there.
SummaryRow run_cell(const ExperimentManifest& m, std::ostream* log = nullptr);

// simulate: run_cell, then rethrow the numerical failure (exit code 2) if
// the trajectory aborted — after the partial records are on disk.
void run_simulate(const ExperimentManifest& m, std::ostream* log = nullptr);

// stationary: Newton from every seed (flat guess when none), optional
// continuation along the configured parameter, catalog JSON with residual
// certificates. Throws NumericalError when nothing converges.
EquilibriumSet run_stationary(const ExperimentManifest& m, std::ostream* log = nullptr);

// sweep: cartesian cells executed by a worker pool (jobs <= 0 picks a
// default), each writing only its own directory; the summary merges at the
// single join point. Throws NumericalError afterwards if any cell aborted.
void run_sweep(const ExperimentManifest& m, std::ostream* log = nullptr, int jobs = 0);

}  // namespace panelflow

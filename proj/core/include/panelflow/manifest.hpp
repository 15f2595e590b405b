#pragma once

// Experiment manifests: the JSON schema that fully describes a run — grid,
// physical parameters, synthesized fields, probes, sweep axes, and output
// paths. Parsing validates aggressively (unknown keys are hard errors with
// their path) and fills every default, so serialize() emits the complete
// canonical form and parse(serialize(m)) == m holds bit-exactly.
//
// Schema (all keys optional; defaults shown):
//
//   {
//     "format": "panelflow/1",
//     "name": "experiment",
//     "grid": {"nx": 48, "ny": 48, "x0": 0, "y0": 0, "Lx": 1, "Ly": 1},
//     "sim": {
//       "U": 0, "k": 0, "beta": 0, "dt": 0, "t_end": 0,
//       "nonlinearity": "vonkarman",          // or "berger"
//       "upsilon": 0, "kappa": 0,             // berger coefficients
//       "load": [ <field terms> ], "load_scale": 1,
//       "prestress": [ <field terms> ],       // F0 terms, vonkarman only
//       "history": "zero",                    // zero | frozen | ramp
//       "theta_n": 64, "s_n": 64,
//       "flow_coupling": true,
//       "initial": {"kind": "zero",           // zero | fields | linearized
//                   "scale": 1, "u0": [...], "u1": [...]}
//     },
//     "probes": {"record_stride": 1, "trace_stride": 0, "rho": 2,
//                "flow_points": [[x, y, z], ...]},
//     "sweep": {"U": [], "k": [], "beta": [], "load_scale": []},
//     "stationary": {"seeds": [[<field terms>], ...],
//                    "continuation_parameter": "",   // U | k | beta | load_scale
//                    "continuation_values": []},
//     "output": {"directory": ".", "records": "records.csv",
//                "snapshot": "final_state.txt", "catalog": "equilibria.json",
//                "summary": "summary.csv", "report": "verify_report.json"}
//   }
//
// Field terms: {"type": "mode", "m", "n", "amplitude"},
// {"type": "bump", "amplitude", "cx", "cy", "radius"},
// {"type": "gauss", "amplitude", "cx", "cy", "sigma"},
// {"type": "compression", "gamma"}, {"type": "constant", "value"}.

#include <string>
#include <vector>

#include "panelflow/aero.hpp"
#include "panelflow/dynamics.hpp"
#include "panelflow/fields_synth.hpp"

namespace panelflow {

inline constexpr const char* kManifestFormat = "panelflow/1";

struct GridSpec {
  int nx = 48;
  int ny = 48;
  double x0 = 0.0;
  double y0 = 0.0;
  double Lx = 1.0;
  double Ly = 1.0;

  bool operator==(const GridSpec&) const = default;
};

struct InitialSpec {
  enum class Kind {
    Zero,        // start from rest at the flat state
    Fields,      // u0/u1 synthesized from term lists
    Linearized,  // u0 = scale * B^{-1} p0 (clamped linear response), u1 = 0
  };
  Kind kind = Kind::Zero;
  double scale = 1.0;
  std::vector<FieldTerm> u0, u1;

  bool operator==(const InitialSpec&) const = default;
};

struct ProbeSpec {
  int record_stride = 1;  // steps between diagnostics records
  int trace_stride = 0;   // steps between trace-residual evaluations; 0 = off
  double rho = 2.0;       // radius of the half-space probe ball around the plate
  std::vector<Point3> flow_points;  // potential-reconstruction probes inside it

  bool operator==(const ProbeSpec&) const = default;
};

struct SweepSpec {
  std::vector<double> U, k, beta, load_scale;  // empty axis = keep base value

  bool operator==(const SweepSpec&) const = default;
};

struct StationarySpec {
  std::vector<std::vector<FieldTerm>> seeds;  // Newton guesses; empty = flat guess
  std::string continuation_parameter;         // "", "U", "k", "beta", "load_scale"
  std::vector<double> continuation_values;

  bool operator==(const StationarySpec&) const = default;
};

struct OutputSpec {
  std::string directory = ".";
  std::string records = "records.csv";
  std::string snapshot = "final_state.txt";
  std::string catalog = "equilibria.json";
  std::string summary = "summary.csv";
  std::string report = "verify_report.json";

  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentManifest {
  std::string format = kManifestFormat;
  std::string name = "experiment";
  GridSpec grid;
  // sim section
  double U = 0.0;
  double k = 0.0;
  double beta = 0.0;
  double dt = 0.0;
  double t_end = 0.0;
  std::string nonlinearity = "vonkarman";
  double upsilon = 0.0;
  double kappa = 0.0;
  std::vector<FieldTerm> load;
  double load_scale = 1.0;
  std::vector<FieldTerm> prestress;
  std::string history = "zero";
  int theta_n = 64;
  int s_n = 64;
  bool flow_coupling = true;
  InitialSpec initial;
  // remaining sections
  ProbeSpec probes;
  SweepSpec sweep;
  StationarySpec stationary;
  OutputSpec output;

  bool operator==(const ExperimentManifest&) const = default;
};

// Parses and validates JSON text. Unknown keys, wrong types, and
// out-of-range values (e.g. U outside the subsonic range [0,1)) throw
// ValidationError naming the offending path.
ExperimentManifest parse_manifest(const std::string& text);

// Reads the file and parses it; ValidationError if unreadable.
ExperimentManifest load_manifest(const std::string& path);

// Canonical single-line JSON with every key present and sorted; doubles are
// printed shortest-round-trip so parse(serialize(m)) == m.
std::string serialize_manifest(const ExperimentManifest& m);

// Grid and simulation config resolved from the manifest. resolve_config
// applies load_scale to the load terms and synthesizes p0/F0.
PlateGrid manifest_grid(const ExperimentManifest& m);
SimConfig resolve_config(const ExperimentManifest& m, const PlateGrid& grid);

// Initial data per the manifest's initial section (Linearized solves the
// clamped biharmonic against the resolved load).
void resolve_initial(const ExperimentManifest& m, const PlateGrid& grid, const SimConfig& config,
                     ScalarField& u0, ScalarField& u1);

// Cartesian expansion of the sweep axes (U x k x beta x load_scale, inner
// axis fastest). Each cell manifest has the axis value substituted, sweep
// cleared, name suffixed with the cell tag, and output.directory pointed at
// a per-cell subdirectory. A manifest without sweep axes yields one cell.
std::vector<ExperimentManifest> expand_sweep(const ExperimentManifest& m);

}  // namespace panelflow

#pragma once

// Deterministic text emission and parsing for every artifact the tools
// produce: diagnostics records (CSV), field snapshots, equilibrium catalogs
// (JSON), and sweep summaries (CSV).
//
// Rules shared by all writers:
//   * doubles print as %.17g, enough digits to round-trip IEEE binary64;
//   * each file opens with "# format: panelflow/1" and a single-line
//     "# manifest: {...}" echo of the producing manifest (JSON files embed
//     the echo as a nested object instead);
//   * column sets and key order are frozen per format version;
//   * no timestamps, hostnames, or other run-environment traces, so a rerun
//     of the same manifest is byte-identical.

#include <iosfwd>
#include <string>
#include <vector>

#include "panelflow/diagnostics.hpp"
#include "panelflow/stationary.hpp"

namespace panelflow {

// %.17g with NaN normalized to "nan" (sign stripped).
std::string format_g17(double v);

inline constexpr const char* kRecordsHeader =
    "t,E_pl,Pi,E_red,diss_integral,q_norm,u_t_norm,dist_to_equilibria,trace_residual,flags";

void write_records_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records,
                       const std::string& manifest_echo);
// Skips comment lines, checks the header row, parses the fixed columns.
// Throws ValidationError on malformed input.
std::vector<DiagnosticsRecord> read_records_csv(std::istream& is);

// Snapshot layout: comment lines, then "nx ny x0 y0 Lx Ly t", then nx rows
// of ny values (row index runs along x).
void write_snapshot(std::ostream& os, const ScalarField& f, double t,
                    const std::string& manifest_echo);
struct Snapshot {
  ScalarField field;
  double t = 0.0;
};
Snapshot read_snapshot(std::istream& is);

// Equilibrium catalog: grid, dedup tolerance, members with their residual
// certificates, scalar parameters, and flattened row-major values.
void write_catalog_json(std::ostream& os, const EquilibriumSet& set, const PlateGrid& grid,
                        const std::string& manifest_echo);
// Rebuilds a set usable for distance queries; member params carry only the
// scalar parameters (U, k, beta), not the synthesized fields.
EquilibriumSet read_catalog_json(std::istream& is);

struct SummaryRow {
  std::string cell;
  double U = 0.0;
  double k = 0.0;
  double beta = 0.0;
  double load_scale = 1.0;
  std::string verdict;  // Converged | Wandering | Growing | Aborted
  double final_dist = 0.0;
  double decay_rate = 0.0;
  double diss_total = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "cell,U,k,beta,load_scale,verdict,final_dist,decay_rate,diss_total";

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows,
                       const std::string& manifest_echo);

// Small file helpers; write_text_file creates parent directories.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
bool file_exists(const std::string& path);

}  // namespace panelflow

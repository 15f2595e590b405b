#include "panelflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panelflow/errors.hpp"
#include "panelflow/manifest.hpp"

namespace panelflow {

namespace {

using nlohmann::json;

void write_preamble(std::ostream& os, const std::string& manifest_echo) {
  os << "# format: " << kManifestFormat << "\n";
  if (!manifest_echo.empty()) os << "# manifest: " << manifest_echo << "\n";
}

// Splits a CSV data row; no quoting needed, the writers never emit commas
// inside fields.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const char* where) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin) throw ValidationError(std::string(where) + ": malformed number '" + s + "'");
  return v;
}

}  // namespace

std::string format_g17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_records_csv(std::ostream& os, const std::vector<DiagnosticsRecord>& records,
                       const std::string& manifest_echo) {
  write_preamble(os, manifest_echo);
  os << kRecordsHeader << "\n";
  for (const DiagnosticsRecord& r : records) {
    os << format_g17(r.t) << ',' << format_g17(r.e_pl) << ',' << format_g17(r.pi) << ','
       << format_g17(r.e_red) << ',' << format_g17(r.diss_integral) << ','
       << format_g17(r.q_norm) << ',' << format_g17(r.u_t_norm) << ','
       << format_g17(r.dist_to_equilibria) << ',' << format_g17(r.trace_residual) << ','
       << r.flags << "\n";
  }
}

std::vector<DiagnosticsRecord> read_records_csv(std::istream& is) {
  std::vector<DiagnosticsRecord> records;
  std::string line;
  bool seen_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != kRecordsHeader)
        throw ValidationError("records csv: unexpected header '" + line + "'");
      seen_header = true;
      continue;
    }
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 10)
      throw ValidationError("records csv: expected 10 columns, got " + std::to_string(f.size()));
    DiagnosticsRecord r;
    r.t = parse_double(f[0], "records csv");
    r.e_pl = parse_double(f[1], "records csv");
    r.pi = parse_double(f[2], "records csv");
    r.e_red = parse_double(f[3], "records csv");
    r.diss_integral = parse_double(f[4], "records csv");
    r.q_norm = parse_double(f[5], "records csv");
    r.u_t_norm = parse_double(f[6], "records csv");
    r.dist_to_equilibria = parse_double(f[7], "records csv");
    r.trace_residual = parse_double(f[8], "records csv");
    r.flags = static_cast<unsigned>(std::strtoul(f[9].c_str(), nullptr, 10));
    records.push_back(r);
  }
  if (!seen_header) throw ValidationError("records csv: missing header row");
  return records;
}

void write_snapshot(std::ostream& os, const ScalarField& f, double t,
                    const std::string& manifest_echo) {
  write_preamble(os, manifest_echo);
  const PlateGrid& g = f.grid();
  os << g.nx << ' ' << g.ny << ' ' << format_g17(g.x0) << ' ' << format_g17(g.y0) << ' '
     << format_g17(g.Lx) << ' ' << format_g17(g.Ly) << ' ' << format_g17(t) << "\n";
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (j) os << ' ';
      os << format_g17(f(i, j));
    }
    os << "\n";
  }
}

Snapshot read_snapshot(std::istream& is) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') break;
  }
  if (line.empty() || line[0] == '#') throw ValidationError("snapshot: missing header line");
  std::istringstream head(line);
  int nx = 0, ny = 0;
  double x0 = 0, y0 = 0, lx = 0, ly = 0, t = 0;
  if (!(head >> nx >> ny >> x0 >> y0 >> lx >> ly >> t))
    throw ValidationError("snapshot: malformed header '" + line + "'");
  const PlateGrid grid = make_grid(nx, ny, x0, y0, lx, ly);
  Snapshot snap{ScalarField(grid), t};
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      double v = 0.0;
      if (!(is >> v)) throw ValidationError("snapshot: truncated value block");
      snap.field(i, j) = v;
    }
  return snap;
}

void write_catalog_json(std::ostream& os, const EquilibriumSet& set, const PlateGrid& grid,
                        const std::string& manifest_echo) {
  json root;
  root["format"] = kManifestFormat;
  root["manifest"] = manifest_echo.empty() ? json::object() : json::parse(manifest_echo);
  root["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"x0", grid.x0},
                  {"y0", grid.y0}, {"Lx", grid.Lx}, {"Ly", grid.Ly}};
  root["dedup_tol"] = set.dedup_tol();
  json members = json::array();
  for (const Equilibrium& e : set.members()) {
    json m;
    m["residual_norm"] = e.residual_norm;
    m["U"] = e.params.U;
    m["k"] = e.params.k;
    m["beta"] = e.params.beta;
    json u = json::array();
    const auto flat = e.u.flat();
    for (long n = 0; n < flat.size(); ++n) u.push_back(flat[n]);
    m["u"] = std::move(u);
    members.push_back(std::move(m));
  }
  root["members"] = std::move(members);
  os << root.dump() << "\n";
}

EquilibriumSet read_catalog_json(std::istream& is) {
  json root;
  try {
    root = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("catalog: invalid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("format") || root["format"] != kManifestFormat)
    throw ValidationError("catalog: missing or unsupported format tag");
  const json& g = root.at("grid");
  const PlateGrid grid =
      make_grid(g.at("nx").get<int>(), g.at("ny").get<int>(), g.at("x0").get<double>(),
                g.at("y0").get<double>(), g.at("Lx").get<double>(), g.at("Ly").get<double>());
  EquilibriumSet set(root.value("dedup_tol", 1e-5));
  for (const json& m : root.at("members")) {
    Equilibrium e;
    e.u = ScalarField(grid);
    const json& u = m.at("u");
    if (static_cast<long>(u.size()) != grid.size())
      throw ValidationError("catalog: member value count does not match the grid");
    auto flat = e.u.flat();
    for (long n = 0; n < flat.size(); ++n) flat[n] = u[n].get<double>();
    e.residual_norm = m.at("residual_norm").get<double>();
    e.params.U = m.value("U", 0.0);
    e.params.k = m.value("k", 0.0);
    e.params.beta = m.value("beta", 0.0);
    set.try_insert(std::move(e));
  }
  return set;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows,
                       const std::string& manifest_echo) {
  write_preamble(os, manifest_echo);
  os << kSummaryHeader << "\n";
  for (const SummaryRow& r : rows) {
    os << r.cell << ',' << format_g17(r.U) << ',' << format_g17(r.k) << ','
       << format_g17(r.beta) << ',' << format_g17(r.load_scale) << ',' << r.verdict << ','
       << format_g17(r.final_dist) << ',' << format_g17(r.decay_rate) << ','
       << format_g17(r.diss_total) << "\n";
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw ValidationError("cannot create directory '" + p.parent_path().string() + "'");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw ValidationError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

bool file_exists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec);
}

}  // namespace panelflow

#include "panelflow/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "panelflow/errors.hpp"
#include "panelflow/operators.hpp"

namespace panelflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError("manifest: " + what + " at " + path);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known) fail(path, "unknown key '" + it.key() + "'");
  }
}

double get_num(const json& j, const std::string& path, const char* key, double dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  const json& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_num_list(const json& j, const std::string& path, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

FieldTerm parse_term(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a field-term object");
  const std::string type = get_str(j, path, "type", "");
  if (type == "mode") {
    check_keys(j, path, {"type", "m", "n", "amplitude"});
    ModeTerm t;
    t.m = get_int(j, path, "m", t.m);
    t.n = get_int(j, path, "n", t.n);
    t.amplitude = get_num(j, path, "amplitude", t.amplitude);
    if (t.m <= 0 || t.n <= 0) fail(path, "mode numbers must be positive");
    return t;
  }
  if (type == "bump") {
    check_keys(j, path, {"type", "amplitude", "cx", "cy", "radius"});
    BumpTerm t;
    t.amplitude = get_num(j, path, "amplitude", t.amplitude);
    t.cx = get_num(j, path, "cx", t.cx);
    t.cy = get_num(j, path, "cy", t.cy);
    t.radius = get_num(j, path, "radius", t.radius);
    if (t.radius <= 0.0) fail(path, "bump radius must be positive");
    return t;
  }
  if (type == "gauss") {
    check_keys(j, path, {"type", "amplitude", "cx", "cy", "sigma"});
    GaussTerm t;
    t.amplitude = get_num(j, path, "amplitude", t.amplitude);
    t.cx = get_num(j, path, "cx", t.cx);
    t.cy = get_num(j, path, "cy", t.cy);
    t.sigma = get_num(j, path, "sigma", t.sigma);
    if (t.sigma <= 0.0) fail(path, "gauss sigma must be positive");
    return t;
  }
  if (type == "compression") {
    check_keys(j, path, {"type", "gamma"});
    CompressionTerm t;
    t.gamma = get_num(j, path, "gamma", t.gamma);
    return t;
  }
  if (type == "constant") {
    check_keys(j, path, {"type", "value"});
    ConstantTerm t;
    t.value = get_num(j, path, "value", t.value);
    return t;
  }
  fail(path, "unknown field-term type '" + type + "'");
}

std::vector<FieldTerm> parse_terms(const json& j, const std::string& path, const char* key) {
  std::vector<FieldTerm> out;
  if (!j.contains(key)) return out;
  const json& v = j.at(key);
  if (!v.is_array()) fail(path + "." + key, "expected an array of field terms");
  for (size_t i = 0; i < v.size(); ++i)
    out.push_back(parse_term(v[i], path + "." + key + "[" + std::to_string(i) + "]"));
  return out;
}

json term_to_json(const FieldTerm& term) {
  json j;
  std::visit(
      [&j](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ModeTerm>) {
          j["type"] = "mode";
          j["m"] = t.m;
          j["n"] = t.n;
          j["amplitude"] = t.amplitude;
        } else if constexpr (std::is_same_v<T, BumpTerm>) {
          j["type"] = "bump";
          j["amplitude"] = t.amplitude;
          j["cx"] = t.cx;
          j["cy"] = t.cy;
          j["radius"] = t.radius;
        } else if constexpr (std::is_same_v<T, GaussTerm>) {
          j["type"] = "gauss";
          j["amplitude"] = t.amplitude;
          j["cx"] = t.cx;
          j["cy"] = t.cy;
          j["sigma"] = t.sigma;
        } else if constexpr (std::is_same_v<T, CompressionTerm>) {
          j["type"] = "compression";
          j["gamma"] = t.gamma;
        } else {
          j["type"] = "constant";
          j["value"] = t.value;
        }
      },
      term);
  return j;
}

json terms_to_json(const std::vector<FieldTerm>& terms) {
  json arr = json::array();
  for (const FieldTerm& t : terms) arr.push_back(term_to_json(t));
  return arr;
}

const char* initial_kind_name(InitialSpec::Kind k) {
  switch (k) {
    case InitialSpec::Kind::Zero: return "zero";
    case InitialSpec::Kind::Fields: return "fields";
    case InitialSpec::Kind::Linearized: return "linearized";
  }
  return "zero";
}

void require_subsonic(double u, const std::string& path) {
  if (!(u >= 0.0 && u < 1.0))
    fail(path, "flow speed must lie in [0, 1): subsonic only");
}

void validate_manifest(const ExperimentManifest& m) {
  require_subsonic(m.U, "$.sim.U");
  if (m.k < 0.0) fail("$.sim.k", "damping coefficient must be nonnegative");
  if (m.beta < 0.0) fail("$.sim.beta", "static damping coefficient must be nonnegative");
  if (m.dt < 0.0) fail("$.sim.dt", "time step must be nonnegative (0 = default)");
  if (m.t_end < 0.0) fail("$.sim.t_end", "horizon must be nonnegative");
  if (m.nonlinearity != "vonkarman" && m.nonlinearity != "berger")
    fail("$.sim.nonlinearity", "expected 'vonkarman' or 'berger'");
  if (m.upsilon < 0.0 || m.kappa < 0.0)
    fail("$.sim", "berger coefficients must be nonnegative");
  if (m.nonlinearity != "berger" && (m.upsilon != 0.0 || m.kappa != 0.0))
    fail("$.sim", "upsilon/kappa require the berger nonlinearity");
  if (m.nonlinearity != "vonkarman" && !m.prestress.empty())
    fail("$.sim.prestress", "prestress terms require the vonkarman nonlinearity");
  if (m.history != "zero" && m.history != "frozen" && m.history != "ramp")
    fail("$.sim.history", "expected 'zero', 'frozen', or 'ramp'");
  if (m.theta_n < 16 || m.s_n < 16)
    fail("$.sim", "quadrature sizes theta_n and s_n must be at least 16");
  if (!std::isfinite(m.load_scale)) fail("$.sim.load_scale", "must be finite");
  if (!std::isfinite(m.initial.scale)) fail("$.sim.initial.scale", "must be finite");

  if (m.probes.record_stride < 1) fail("$.probes.record_stride", "must be at least 1");
  if (m.probes.trace_stride < 0) fail("$.probes.trace_stride", "must be nonnegative");
  if (!(m.probes.rho > 0.0)) fail("$.probes.rho", "probe-ball radius must be positive");
  const double cx = m.grid.x0 + 0.5 * m.grid.Lx;
  const double cy = m.grid.y0 + 0.5 * m.grid.Ly;
  for (size_t i = 0; i < m.probes.flow_points.size(); ++i) {
    const Point3& p = m.probes.flow_points[i];
    const std::string path = "$.probes.flow_points[" + std::to_string(i) + "]";
    if (p.z < 0.0) fail(path, "probe points live in the upper half space (z >= 0)");
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    if (std::sqrt(dx * dx + dy * dy + p.z * p.z) > m.probes.rho)
      fail(path, "probe point lies outside the ball of radius rho around the plate center");
  }

  for (size_t i = 0; i < m.sweep.U.size(); ++i)
    require_subsonic(m.sweep.U[i], "$.sweep.U[" + std::to_string(i) + "]");
  for (size_t i = 0; i < m.sweep.k.size(); ++i)
    if (m.sweep.k[i] < 0.0) fail("$.sweep.k[" + std::to_string(i) + "]", "must be nonnegative");
  for (size_t i = 0; i < m.sweep.beta.size(); ++i)
    if (m.sweep.beta[i] < 0.0)
      fail("$.sweep.beta[" + std::to_string(i) + "]", "must be nonnegative");

  const std::string& cp = m.stationary.continuation_parameter;
  if (!cp.empty() && cp != "U" && cp != "k" && cp != "beta" && cp != "load_scale")
    fail("$.stationary.continuation_parameter", "expected '', 'U', 'k', 'beta', or 'load_scale'");
  if (cp.empty() && !m.stationary.continuation_values.empty())
    fail("$.stationary.continuation_values", "values given without a continuation parameter");
  if (!cp.empty() && m.stationary.continuation_values.empty())
    fail("$.stationary.continuation_values", "continuation parameter given without values");
  if (cp == "U")
    for (size_t i = 0; i < m.stationary.continuation_values.size(); ++i)
      require_subsonic(m.stationary.continuation_values[i],
                       "$.stationary.continuation_values[" + std::to_string(i) + "]");
  if (cp == "k" || cp == "beta")
    for (size_t i = 0; i < m.stationary.continuation_values.size(); ++i)
      if (m.stationary.continuation_values[i] < 0.0)
        fail("$.stationary.continuation_values[" + std::to_string(i) + "]", "must be nonnegative");

  if (m.output.directory.empty()) fail("$.output.directory", "must not be empty");
}

}  // namespace

ExperimentManifest parse_manifest(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("manifest: invalid JSON: ") + e.what());
  }

  ExperimentManifest m;
  check_keys(root, "$", {"format", "name", "grid", "sim", "probes", "sweep", "stationary",
                         "output"});
  m.format = get_str(root, "$", "format", kManifestFormat);
  if (m.format != kManifestFormat)
    fail("$.format", "unsupported format '" + m.format + "' (this build reads " +
                         std::string(kManifestFormat) + ")");
  m.name = get_str(root, "$", "name", m.name);
  if (m.name.empty()) fail("$.name", "must not be empty");

  if (root.contains("grid")) {
    const json& g = root.at("grid");
    check_keys(g, "$.grid", {"nx", "ny", "x0", "y0", "Lx", "Ly"});
    m.grid.nx = get_int(g, "$.grid", "nx", m.grid.nx);
    m.grid.ny = get_int(g, "$.grid", "ny", m.grid.ny);
    m.grid.x0 = get_num(g, "$.grid", "x0", m.grid.x0);
    m.grid.y0 = get_num(g, "$.grid", "y0", m.grid.y0);
    m.grid.Lx = get_num(g, "$.grid", "Lx", m.grid.Lx);
    m.grid.Ly = get_num(g, "$.grid", "Ly", m.grid.Ly);
  }

  if (root.contains("sim")) {
    const json& s = root.at("sim");
    check_keys(s, "$.sim",
               {"U", "k", "beta", "dt", "t_end", "nonlinearity", "upsilon", "kappa", "load",
                "load_scale", "prestress", "history", "theta_n", "s_n", "flow_coupling",
                "initial"});
    m.U = get_num(s, "$.sim", "U", m.U);
    m.k = get_num(s, "$.sim", "k", m.k);
    m.beta = get_num(s, "$.sim", "beta", m.beta);
    m.dt = get_num(s, "$.sim", "dt", m.dt);
    m.t_end = get_num(s, "$.sim", "t_end", m.t_end);
    m.nonlinearity = get_str(s, "$.sim", "nonlinearity", m.nonlinearity);
    m.upsilon = get_num(s, "$.sim", "upsilon", m.upsilon);
    m.kappa = get_num(s, "$.sim", "kappa", m.kappa);
    m.load = parse_terms(s, "$.sim", "load");
    m.load_scale = get_num(s, "$.sim", "load_scale", m.load_scale);
    m.prestress = parse_terms(s, "$.sim", "prestress");
    m.history = get_str(s, "$.sim", "history", m.history);
    m.theta_n = get_int(s, "$.sim", "theta_n", m.theta_n);
    m.s_n = get_int(s, "$.sim", "s_n", m.s_n);
    m.flow_coupling = get_bool(s, "$.sim", "flow_coupling", m.flow_coupling);
    if (s.contains("initial")) {
      const json& in = s.at("initial");
      check_keys(in, "$.sim.initial", {"kind", "scale", "u0", "u1"});
      const std::string kind = get_str(in, "$.sim.initial", "kind", "zero");
      if (kind == "zero")
        m.initial.kind = InitialSpec::Kind::Zero;
      else if (kind == "fields")
        m.initial.kind = InitialSpec::Kind::Fields;
      else if (kind == "linearized")
        m.initial.kind = InitialSpec::Kind::Linearized;
      else
        fail("$.sim.initial.kind", "expected 'zero', 'fields', or 'linearized'");
      m.initial.scale = get_num(in, "$.sim.initial", "scale", m.initial.scale);
      m.initial.u0 = parse_terms(in, "$.sim.initial", "u0");
      m.initial.u1 = parse_terms(in, "$.sim.initial", "u1");
    }
  }

  if (root.contains("probes")) {
    const json& p = root.at("probes");
    check_keys(p, "$.probes", {"record_stride", "trace_stride", "rho", "flow_points"});
    m.probes.record_stride = get_int(p, "$.probes", "record_stride", m.probes.record_stride);
    m.probes.trace_stride = get_int(p, "$.probes", "trace_stride", m.probes.trace_stride);
    m.probes.rho = get_num(p, "$.probes", "rho", m.probes.rho);
    if (p.contains("flow_points")) {
      const json& fp = p.at("flow_points");
      if (!fp.is_array()) fail("$.probes.flow_points", "expected an array of [x, y, z] triples");
      for (size_t i = 0; i < fp.size(); ++i) {
        const std::string path = "$.probes.flow_points[" + std::to_string(i) + "]";
        const json& pt = fp[i];
        if (!pt.is_array() || pt.size() != 3 || !pt[0].is_number() || !pt[1].is_number() ||
            !pt[2].is_number())
          fail(path, "expected an [x, y, z] triple of numbers");
        m.probes.flow_points.push_back(
            Point3{pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
      }
    }
  }

  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    check_keys(s, "$.sweep", {"U", "k", "beta", "load_scale"});
    m.sweep.U = get_num_list(s, "$.sweep", "U");
    m.sweep.k = get_num_list(s, "$.sweep", "k");
    m.sweep.beta = get_num_list(s, "$.sweep", "beta");
    m.sweep.load_scale = get_num_list(s, "$.sweep", "load_scale");
  }

  if (root.contains("stationary")) {
    const json& s = root.at("stationary");
    check_keys(s, "$.stationary", {"seeds", "continuation_parameter", "continuation_values"});
    if (s.contains("seeds")) {
      const json& seeds = s.at("seeds");
      if (!seeds.is_array()) fail("$.stationary.seeds", "expected an array of field-term lists");
      for (size_t i = 0; i < seeds.size(); ++i) {
        const std::string path = "$.stationary.seeds[" + std::to_string(i) + "]";
        const json& seed = seeds[i];
        if (!seed.is_array()) fail(path, "expected an array of field terms");
        std::vector<FieldTerm> terms;
        for (size_t t = 0; t < seed.size(); ++t)
          terms.push_back(parse_term(seed[t], path + "[" + std::to_string(t) + "]"));
        m.stationary.seeds.push_back(std::move(terms));
      }
    }
    m.stationary.continuation_parameter =
        get_str(s, "$.stationary", "continuation_parameter", "");
    m.stationary.continuation_values = get_num_list(s, "$.stationary", "continuation_values");
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    check_keys(o, "$.output", {"directory", "records", "snapshot", "catalog", "summary", "report"});
    m.output.directory = get_str(o, "$.output", "directory", m.output.directory);
    m.output.records = get_str(o, "$.output", "records", m.output.records);
    m.output.snapshot = get_str(o, "$.output", "snapshot", m.output.snapshot);
    m.output.catalog = get_str(o, "$.output", "catalog", m.output.catalog);
    m.output.summary = get_str(o, "$.output", "summary", m.output.summary);
    m.output.report = get_str(o, "$.output", "report", m.output.report);
  }

  validate_manifest(m);
  manifest_grid(m);  // geometry validation
  return m;
}

ExperimentManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("manifest: cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

std::string serialize_manifest(const ExperimentManifest& m) {
  json root;
  root["format"] = m.format;
  root["name"] = m.name;
  root["grid"] = {{"nx", m.grid.nx}, {"ny", m.grid.ny}, {"x0", m.grid.x0},
                  {"y0", m.grid.y0}, {"Lx", m.grid.Lx}, {"Ly", m.grid.Ly}};
  json sim;
  sim["U"] = m.U;
  sim["k"] = m.k;
  sim["beta"] = m.beta;
  sim["dt"] = m.dt;
  sim["t_end"] = m.t_end;
  sim["nonlinearity"] = m.nonlinearity;
  sim["upsilon"] = m.upsilon;
  sim["kappa"] = m.kappa;
  sim["load"] = terms_to_json(m.load);
  sim["load_scale"] = m.load_scale;
  sim["prestress"] = terms_to_json(m.prestress);
  sim["history"] = m.history;
  sim["theta_n"] = m.theta_n;
  sim["s_n"] = m.s_n;
  sim["flow_coupling"] = m.flow_coupling;
  sim["initial"] = {{"kind", initial_kind_name(m.initial.kind)},
                    {"scale", m.initial.scale},
                    {"u0", terms_to_json(m.initial.u0)},
                    {"u1", terms_to_json(m.initial.u1)}};
  root["sim"] = std::move(sim);
  json points = json::array();
  for (const Point3& p : m.probes.flow_points) points.push_back({p.x, p.y, p.z});
  root["probes"] = {{"record_stride", m.probes.record_stride},
                    {"trace_stride", m.probes.trace_stride},
                    {"rho", m.probes.rho},
                    {"flow_points", std::move(points)}};
  root["sweep"] = {{"U", m.sweep.U},
                   {"k", m.sweep.k},
                   {"beta", m.sweep.beta},
                   {"load_scale", m.sweep.load_scale}};
  json seeds = json::array();
  for (const std::vector<FieldTerm>& seed : m.stationary.seeds) seeds.push_back(terms_to_json(seed));
  root["stationary"] = {{"seeds", std::move(seeds)},
                        {"continuation_parameter", m.stationary.continuation_parameter},
                        {"continuation_values", m.stationary.continuation_values}};
  root["output"] = {{"directory", m.output.directory}, {"records", m.output.records},
                    {"snapshot", m.output.snapshot},   {"catalog", m.output.catalog},
                    {"summary", m.output.summary},     {"report", m.output.report}};
  return root.dump();
}

PlateGrid manifest_grid(const ExperimentManifest& m) {
  return make_grid(m.grid.nx, m.grid.ny, m.grid.x0, m.grid.y0, m.grid.Lx, m.grid.Ly);
}

SimConfig resolve_config(const ExperimentManifest& m, const PlateGrid& grid) {
  SimConfig c;
  c.U = m.U;
  c.k = m.k;
  c.beta = m.beta;
  c.dt = m.dt;
  c.t_end = m.t_end;
  if (m.nonlinearity == "berger") {
    c.kind = Berger{m.upsilon, m.kappa};
  } else {
    VonKarman vk;
    if (!m.prestress.empty()) vk.F0 = build_field(grid, m.prestress);
    c.kind = std::move(vk);
  }
  if (!m.load.empty()) {
    ScalarField p = build_field(grid, m.load);
    p *= m.load_scale;
    c.p0 = std::move(p);
  }
  if (m.history == "frozen")
    c.history_init = HistoryInit::Frozen;
  else if (m.history == "ramp")
    c.history_init = HistoryInit::Ramp;
  else
    c.history_init = HistoryInit::Zero;
  c.aero.U = m.U;
  c.aero.theta_n = m.theta_n;
  c.aero.s_n = m.s_n;
  c.flow_coupling = m.flow_coupling;
  return c;
}

void resolve_initial(const ExperimentManifest& m, const PlateGrid& grid, const SimConfig& config,
                     ScalarField& u0, ScalarField& u1) {
  u0 = ScalarField(grid);
  u1 = ScalarField(grid);
  switch (m.initial.kind) {
    case InitialSpec::Kind::Zero:
      break;
    case InitialSpec::Kind::Fields:
      u0 = build_field(grid, m.initial.u0);
      u1 = build_field(grid, m.initial.u1);
      break;
    case InitialSpec::Kind::Linearized:
      if (config.p0) {
        BiharmonicSolver solver(grid);
        u0 = solver.solve(*config.p0);
        u0 *= m.initial.scale;
      }
      break;
  }
}

std::vector<ExperimentManifest> expand_sweep(const ExperimentManifest& m) {
  auto axis = [](const std::vector<double>& v, double base) {
    return v.empty() ? std::vector<double>{base} : v;
  };
  const std::vector<double> us = axis(m.sweep.U, m.U);
  const std::vector<double> ks = axis(m.sweep.k, m.k);
  const std::vector<double> betas = axis(m.sweep.beta, m.beta);
  const std::vector<double> scales = axis(m.sweep.load_scale, m.load_scale);

  std::vector<ExperimentManifest> cells;
  cells.reserve(us.size() * ks.size() * betas.size() * scales.size());
  int idx = 0;
  for (double u : us)
    for (double k : ks)
      for (double beta : betas)
        for (double scale : scales) {
          ExperimentManifest c = m;
          c.U = u;
          c.k = k;
          c.beta = beta;
          c.load_scale = scale;
          c.sweep = SweepSpec{};
          char tag[32];
          std::snprintf(tag, sizeof tag, "cell_%03d", idx);
          c.name = m.name + "." + tag;
          c.output.directory = m.output.directory + "/" + tag;
          cells.push_back(std::move(c));
          ++idx;
        }
  return cells;
}

}  // namespace panelflow

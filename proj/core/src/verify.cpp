#include "panelflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "panelflow/aero.hpp"
#include "panelflow/diagnostics.hpp"
#include "panelflow/dynamics.hpp"
#include "panelflow/field.hpp"
#include "panelflow/fields_synth.hpp"
#include "panelflow/io.hpp"
#include "panelflow/manifest.hpp"
#include "panelflow/operators.hpp"
#include "panelflow/stationary.hpp"
#include "panelflow/vonkarman.hpp"

namespace panelflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Smooth field with zero value and zero boundary slope: products of squared
// sine modes. These live in the same class as clamped plate states, so the
// operator identities tested below hold without boundary residue.
ScalarField clamped_mode(const PlateGrid& g, int m, int n) {
  ScalarField f(g);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const double sx = std::sin(m * kPi * (g.x(i) - g.x0) / g.Lx);
      const double sy = std::sin(n * kPi * (g.y(j) - g.y0) / g.Ly);
      f(i, j) = sx * sx * sy * sy;
    }
  }
  return f;
}

// Compactly supported smooth pulse; its zero extension is globally smooth,
// which the flow-trace identity needs.
ScalarField bump_field(const PlateGrid& g) {
  return build_field(g, {BumpTerm{1.0, 0.5, 0.5, 0.42}});
}

ScalarField random_mode_mix(const PlateGrid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  ScalarField f(g);
  for (int m = 1; m <= 2; ++m) {
    for (int n = 1; n <= 2; ++n) {
      ScalarField part = clamped_mode(g, m, n);
      part *= unif(rng) / (m * m + n * n);
      f += part;
    }
  }
  return f;
}

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void log_check(std::ostream* log, const VerifyCheck& c) {
  if (log == nullptr) return;
  (*log) << (c.passed ? "[pass] " : "[FAIL] ") << c.name << "  measured=" << format_num(c.measured)
         << "  threshold=" << format_num(c.threshold) << "  (" << c.detail << ")\n";
}

// ---------------------------------------------------------------------------
// Individual checks

VerifyCheck check_biharmonic_symmetry(const VerifyOptions& opt) {
  const int n = opt.quick ? 32 : 48;
  const PlateGrid g = make_grid(n, n);
  std::mt19937 rng(opt.seed);
  const ScalarField u = random_mode_mix(g, rng);
  const ScalarField v = random_mode_mix(g, rng);
  const ScalarField bu = biharmonic_clamped(u);
  const ScalarField bv = biharmonic_clamped(v);
  const double uv = inner(bu, v), vu = inner(u, bv);
  const double scale = std::max({std::abs(uv), std::abs(vu), 1e-300});
  VerifyCheck c{"biharmonic_symmetry", false, std::abs(uv - vu) / scale, 1e-12, ""};
  c.detail = "grid " + std::to_string(n) + "^2, <Bu,v>=" + format_num(uv);
  c.passed = c.measured <= c.threshold;
  return c;
}

VerifyCheck check_airy_residual(const VerifyOptions& opt) {
  const int n = opt.quick ? 32 : 48;
  const PlateGrid g = make_grid(n, n);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(opt.seed + 1);
  const ScalarField u = random_mode_mix(g, rng);
  const ScalarField rhs = bracket(u, u);
  const ScalarField v = airy(u, u, solver);
  const ScalarField resid = biharmonic_clamped(v) + rhs;
  VerifyCheck c{"airy_residual", false, norm_l2(resid) / std::max(norm_l2(rhs), 1e-300), 1e-10,
                ""};
  c.detail = "grid " + std::to_string(n) + "^2, |[u,u]|=" + format_num(norm_l2(rhs));
  c.passed = c.measured <= c.threshold;
  return c;
}

VerifyCheck check_bracket_symmetry_refinement(const VerifyOptions& opt) {
  const std::vector<int> levels = opt.quick ? std::vector<int>{32, 64} : std::vector<int>{32, 64, 128};
  std::vector<double> defect;
  for (int n : levels) {
    const PlateGrid g = make_grid(n, n);
    const ScalarField u = clamped_mode(g, 1, 1);
    const ScalarField v = clamped_mode(g, 2, 1);
    const ScalarField w = clamped_mode(g, 1, 2);
    const double a = inner(bracket(u, v), w);
    const double b = inner(bracket(u, w), v);
    const double c3 = inner(bracket(v, w), u);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c3), 1e-300});
    defect.push_back(std::max(std::abs(a - b), std::abs(a - c3)) / scale);
  }
  // Least-squares slope of log2(defect) against level index (levels double).
  const int m = static_cast<int>(defect.size());
  double slope = 0.0;
  if (m == 2) {
    slope = std::log2(defect[0] / defect[1]);
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
      const double x = i, y = std::log2(defect[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    slope = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  VerifyCheck c{"bracket_symmetry_refinement", false, slope, 1.9, ""};
  std::string d = "defects";
  for (size_t i = 0; i < defect.size(); ++i) {
    d += (i ? ", " : " ") + std::to_string(levels[i]) + "^2: " + format_num(defect[i]);
  }
  c.detail = d;
  c.passed = c.measured >= c.threshold;
  return c;
}

// Gentle frozen history: a low-mode displacement mix with zero velocity.
// Gentle spatial content keeps the quadrature-error constant small so the
// dense reference isolates quadrature error rather than shared floors.
DelayHistory gentle_frozen_history(const PlateGrid& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double a1 = 0.02 * (0.75 + 0.5 * unif(rng));
  const double a2 = 0.15 * a1 * (2.0 * unif(rng) - 1.0);
  const double a3 = 0.15 * a1 * (2.0 * unif(rng) - 1.0);
  const double a4 = 0.05 * a1 * (2.0 * unif(rng) - 1.0);
  const ScalarField u0 = build_field(
      g, {ModeTerm{1, 1, a1}, ModeTerm{2, 1, a2}, ModeTerm{1, 2, a3}, ModeTerm{2, 2, a4}});
  return DelayHistory::frozen(u0, ScalarField(g));
}

VerifyCheck check_q_quadrature_oracle(const VerifyOptions& opt) {
  const int n = opt.quick ? 32 : 48;
  const int trials = opt.quick ? 1 : 3;
  const PlateGrid g = make_grid(n, n);
  const double U = 0.3;
  std::mt19937 rng(opt.seed + 2);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const DelayHistory hist = gentle_frozen_history(g, rng);
    const ScalarField base = q_potential(hist, {U, 256, 256}, g);
    const ScalarField dense = q_potential_bruteforce(hist, {U, 512, 512}, g);
    const double err = norm_l2(base - dense) / std::max(norm_l2(dense), 1e-300);
    worst = std::max(worst, err);
  }
  VerifyCheck c{"q_quadrature_oracle", false, worst, 1e-4, ""};
  c.detail = "grid " + std::to_string(n) + "^2, " + std::to_string(trials) +
             " frozen histories, nodes 256^2 vs dense 512^2";
  c.passed = c.measured <= c.threshold;
  return c;
}

VerifyCheck check_delay_horizon_sampling(const VerifyOptions& opt) {
  const PlateGrid g = make_grid(48, 48);
  const int samples = opt.quick ? 20000 : 100000;
  const int sweep = opt.quick ? 20000 : 100000;
  std::mt19937 rng(opt.seed + 3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double worst = 0.0;  // max over U of the attainment gap and any violation
  std::string d;
  for (double U : {0.0, 0.3, 0.7}) {
    const double ts = t_star(g, U);
    // Random escape samples: past the horizon the retreat point must be
    // outside the open rectangle for every start point and angle.
    double violation = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double x = g.x0 + unif(rng) * g.Lx;
      const double y = g.y0 + unif(rng) * g.Ly;
      const double th = 2.0 * kPi * unif(rng);
      const double s = ts * (1.0 + unif(rng));  // s in [t*, 2 t*]
      const double px = x - (U + std::sin(th)) * s;
      const double py = y - s * std::cos(th);
      const bool inside = px > g.x0 && px < g.x0 + g.Lx && py > g.y0 && py < g.y0 + g.Ly;
      if (inside) violation = std::max(violation, s - ts);
    }
    // Dense angular sweep of the per-angle survival time; its supremum must
    // reach the closed form (attainment, not just an upper bound).
    double attained = 0.0;
    for (int i = 0; i < sweep; ++i) {
      const double th = 2.0 * kPi * (i + 0.5) / sweep;
      const double ax = std::abs(U + std::sin(th)), ay = std::abs(std::cos(th));
      const double ex = ax > 1e-300 ? g.Lx / ax : std::numeric_limits<double>::infinity();
      const double ey = ay > 1e-300 ? g.Ly / ay : std::numeric_limits<double>::infinity();
      attained = std::max(attained, std::min(ex, ey));
    }
    const double gap = std::abs(attained - ts);
    worst = std::max({worst, violation, gap});
    d += (d.empty() ? "U=" : "; U=") + format_num(U) + ": t*=" + format_num(ts) +
         " gap=" + format_num(gap) + (violation > 0.0 ? " VIOLATION" : "");
  }
  VerifyCheck c{"delay_horizon_sampling", false, worst, 1e-3, d};
  c.passed = c.measured <= c.threshold;
  return c;
}

VerifyCheck check_trace_identity_refinement(const VerifyOptions& opt) {
  const int n = opt.quick ? 32 : 48;
  const PlateGrid g = make_grid(n, n);
  const double U = 0.6, omega = 6.0, amp = 0.05, dt = 0.01;
  const double ts = t_star(g, U);
  const double span = 1.25 * ts;
  const int slots = static_cast<int>(std::ceil(span / dt));
  DelayHistory hist(g, dt, span);
  const ScalarField base = bump_field(g);
  for (int s = 0; s <= slots; ++s) {
    const double t = (s - slots) * dt;
    ScalarField u = base, ut = base;
    u *= amp * std::cos(omega * t);
    ut *= -amp * omega * std::sin(omega * t);
    if (s == 0) {
      hist.set_tail(u, ut);
    } else {
      hist.append(t, u, ut);
    }
  }
  std::vector<double> resid;
  for (int N : {32, 64, 128}) {
    resid.push_back(trace_residual(hist, {U, N, N}, g, 0.0));
  }
  const double slope = std::log2(resid[0] / resid[2]) / 2.0;
  VerifyCheck c{"trace_identity_refinement", false, slope, 1.0, ""};
  c.detail = "grid " + std::to_string(n) + "^2, residuals 32: " + format_num(resid[0]) +
             ", 64: " + format_num(resid[1]) + ", 128: " + format_num(resid[2]);
  c.passed = c.measured >= c.threshold;
  return c;
}

VerifyCheck check_fixed_point_drift(const VerifyOptions& opt) {
  const int n = opt.quick ? 16 : 24;
  const PlateGrid g = make_grid(n, n);
  SimConfig config;
  config.U = 0.3;
  config.k = 1.0;
  config.dt = 0.9 * cfl_limit(g, config.U);
  config.t_end = 0.0;  // stepping is driven manually below
  config.p0 = build_field(g, {ModeTerm{1, 1, 0.5}});
  config.history_init = HistoryInit::Frozen;
  const BiharmonicSolver solver(g);
  const NewtonReport eq = newton_solve(solver.solve(*config.p0), config, g, solver);
  if (!eq.converged) {
    return {"fixed_point_drift", false, std::numeric_limits<double>::quiet_NaN(), 1e-8,
            "stationary solve did not converge"};
  }
  Simulator sim(config, g, eq.u, ScalarField(g));
  for (int i = 0; i < 100; ++i) sim.step();
  const double drift = norm_l2(sim.state().u - eq.u);
  VerifyCheck c{"fixed_point_drift", false, drift, 1e-8, ""};
  c.detail = "grid " + std::to_string(n) + "^2, 100 steps at dt=" + format_num(config.dt) +
             ", |u*|=" + format_num(norm_l2(eq.u));
  c.passed = c.measured <= c.threshold;
  return c;
}

}  // namespace

bool VerifyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

VerifyReport run_verify(const VerifyOptions& options, std::ostream* log) {
  VerifyReport report;
  const auto add = [&](VerifyCheck c) {
    log_check(log, c);
    report.checks.push_back(std::move(c));
  };
  add(check_biharmonic_symmetry(options));
  add(check_airy_residual(options));
  add(check_bracket_symmetry_refinement(options));
  add(check_q_quadrature_oracle(options));
  add(check_delay_horizon_sampling(options));
  add(check_trace_identity_refinement(options));
  add(check_fixed_point_drift(options));
  return report;
}

std::string verify_report_json(const VerifyReport& report) {
  nlohmann::json j;
  j["format"] = kManifestFormat;
  j["all_passed"] = report.all_passed();
  nlohmann::json checks = nlohmann::json::array();
  for (const VerifyCheck& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
  }
  j["checks"] = std::move(checks);
  return j.dump(2) + "\n";
}

}  // namespace panelflow

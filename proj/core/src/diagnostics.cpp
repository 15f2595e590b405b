#include "panelflow/diagnostics.hpp"

#include <cmath>
#include <cstdlib>

#include "panelflow/errors.hpp"
#include "panelflow/vonkarman.hpp"

namespace panelflow {
namespace {

bool same_clock(double t1, double t2) { return std::abs(t1 - t2) <= 1e-9 * (1.0 + std::abs(t1)); }

// Difference of two trajectories at a common lag, linearly interpolated
// between slots exactly as the kernel quadrature interpolates.
ScalarField lagged_difference(const DelayHistory& h1, const DelayHistory& h2, double lag) {
  const DelayHistory::LagRef r1 = h1.at_lag(lag);
  const DelayHistory::LagRef r2 = h2.at_lag(lag);
  ScalarField d = r1.newer->u - r2.newer->u;
  if (r1.frac > 0.0) {
    d *= 1.0 - r1.frac;
    ScalarField older = r1.older->u - r2.older->u;
    older *= r1.frac;
    d += older;
  }
  return d;
}

}  // namespace

double clamped_elastic_sq(const ScalarField& f) {
  const PlateGrid& g = f.grid();
  const ScalarField lf = laplacian(f);
  double e = inner(lf, lf);
  const double wx = 2.0 / std::pow(g.hx(), 4);
  const double wy = 2.0 / std::pow(g.hy(), 4);
  const auto& v = f.values();
  double ring = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    ring += wx * (v(0, j) * v(0, j) + v(g.nx - 1, j) * v(g.nx - 1, j));
  }
  for (int i = 0; i < g.nx; ++i) {
    ring += wy * (v(i, 0) * v(i, 0) + v(i, g.ny - 1) * v(i, g.ny - 1));
  }
  return e + g.hx() * g.hy() * ring;
}

DiagnosticsAccumulator::DiagnosticsAccumulator(const SimConfig& config, const PlateGrid& grid,
                                               const BiharmonicSolver& solver,
                                               const EquilibriumSet* catalog)
    : config_(config), grid_(grid), solver_(&solver), catalog_(catalog),
      lap_(laplacian_matrix(grid)) {
  config_.aero.U = config_.U;
}

DiagnosticsRecord DiagnosticsAccumulator::record(const SimState& state, const ScalarField* q_now) {
  const ScalarField& u = state.u;
  const ScalarField& ut = state.ut;
  const double hw = grid_.hx() * grid_.hy();

  DiagnosticsRecord rec;
  rec.t = state.t;

  // kinetic + elastic + beta terms, stencil path vs assembled path
  const double kin1 = 0.5 * inner(ut, ut);
  const double kin2 = 0.5 * hw * ut.flat().squaredNorm();
  const double el1 = 0.5 * clamped_elastic_sq(u);
  const Eigen::VectorXd lap_u = lap_ * u.flat();
  const auto& uv = u.values();
  const double wx = 2.0 / std::pow(grid_.hx(), 4);
  const double wy = 2.0 / std::pow(grid_.hy(), 4);
  const double ring2 = wx * (uv.row(0).square().sum() + uv.row(grid_.nx - 1).square().sum()) +
                       wy * (uv.col(0).square().sum() + uv.col(grid_.ny - 1).square().sum());
  const double el2 = 0.5 * hw * (lap_u.squaredNorm() + ring2);
  const double beta1 = config_.beta != 0.0 ? 0.5 * config_.beta * inner(u, u) : 0.0;
  const double beta2 = config_.beta != 0.0 ? 0.5 * config_.beta * hw * u.flat().squaredNorm() : 0.0;

  // potential: the quartic piece double-enters through the Airy identity
  // <B v, v> = <-[u,u], v>, so the pair also certifies the stress solve
  double pi1 = 0.0, pi2 = 0.0;
  if (const auto* vk = std::get_if<VonKarman>(&config_.kind)) {
    const ScalarField vu = airy(u, u, *solver_);
    const ScalarField buu = bracket(u, u);
    pi1 = 0.25 * inner(biharmonic_clamped(vu), vu);
    pi2 = -0.25 * hw * buu.flat().dot(vu.flat());
    if (!vk->F0.empty()) {
      pi1 -= 0.5 * inner(buu, vk->F0);
      pi2 -= 0.5 * hw * buu.flat().dot(vk->F0.flat());
    }
  } else {
    const auto& bg = std::get<Berger>(config_.kind);
    const Derivs d = derivatives(u);
    const double g1 = inner(d.fx, d.fx) + inner(d.fy, d.fy);
    const double g2 = hw * (d.fx.flat().squaredNorm() + d.fy.flat().squaredNorm());
    pi1 = -0.5 * bg.upsilon * g1 + 0.25 * bg.kappa * g1 * g1;
    pi2 = -0.5 * bg.upsilon * g2 + 0.25 * bg.kappa * g2 * g2;
  }
  if (config_.p0) {
    pi1 -= inner(*config_.p0, u);
    pi2 -= hw * config_.p0->flat().dot(u.flat());
  }

  rec.pi = pi1;
  rec.e_pl = kin1 + el1 + beta1 + pi1;
  rec.e_red = kin2 + el2 + beta2 + pi2;
  rec.u_t_norm = norm_l2(ut);

  // running dissipation integral, trapezoid between record calls
  const double integrand = config_.k * 2.0 * kin1;
  if (have_prev_) {
    if (rec.t < prev_t_ - 1e-9 * (1.0 + std::abs(prev_t_))) {
      throw ValidationError("diagnostics: records must advance in time");
    }
    diss_ += 0.5 * (rec.t - prev_t_) * (integrand + prev_integrand_);
  }
  have_prev_ = true;
  prev_t_ = rec.t;
  prev_integrand_ = integrand;
  rec.diss_integral = diss_;

  if (q_now != nullptr) {
    rec.q_norm = norm_l2(*q_now);
  } else if (config_.flow_coupling) {
    rec.q_norm = norm_l2(q_potential(state.hist, config_.aero, grid_));
  }

  if (catalog_ != nullptr && !catalog_->empty()) {
    rec.dist_to_equilibria = distance_to_set(u, ut, *catalog_);
  }

  const bool finite = u.all_finite() && ut.all_finite() && std::isfinite(rec.e_pl) &&
                      std::isfinite(rec.e_red) && std::isfinite(rec.diss_integral) &&
                      std::isfinite(rec.q_norm) && std::isfinite(rec.u_t_norm);
  if (!finite) rec.flags |= kFlagNonFinite;
  return rec;
}

double difference_energy(const SimState& s1, const SimState& s2, double beta) {
  require_same_grid(s1.u, s2.u, "difference_energy");
  if (!same_clock(s1.t, s2.t)) {
    throw ValidationError("difference_energy: trajectory clocks differ");
  }
  const ScalarField du = s1.u - s2.u;
  const ScalarField dut = s1.ut - s2.ut;
  return 0.5 * (clamped_elastic_sq(du) + inner(dut, dut) + beta * inner(du, du));
}

DifferenceProbe make_difference_probe(const SimConfig& config, const PlateGrid& grid) {
  DifferenceProbe probe;
  probe.beta = config.beta;
  probe.t_star = t_star(grid, config.U);
  probe.mu = probe.nu / (2.0 * probe.t_star);
  return probe;
}

double lyapunov_V(const SimState& s1, const SimState& s2, const DifferenceProbe& probe, double k) {
  const double e_u = difference_energy(s1, s2, probe.beta);  // grid + clock checks
  if (!(probe.t_star > 0.0)) {
    throw ValidationError("lyapunov_V: probe t_star must be positive");
  }
  const double dt1 = s1.hist.dt();
  const double dt2 = s2.hist.dt();
  if (std::abs(dt1 - dt2) > 1e-12 * dt1) {
    throw ValidationError("lyapunov_V: history steps differ between trajectories");
  }
  const double mu = probe.mu > 0.0 ? probe.mu : probe.nu / (2.0 * probe.t_star);

  const ScalarField du = s1.u - s2.u;
  const ScalarField dut = s1.ut - s2.ut;
  const double cross = probe.nu * (inner(dut, du) + 0.5 * k * inner(du, du));

  // double integral int_0^{t*} int_{t-s}^t ||lap du||^2_B: inner integrals
  // I_m accumulate by trapezoid over slot lags, outer trapezoid over s with a
  // rectangle strip for the fractional remainder t* - M dt
  const int m_full = static_cast<int>(std::floor(probe.t_star / dt1 + 1e-9));
  const double s_frac = probe.t_star - m_full * dt1;
  double g_prev = clamped_elastic_sq(lagged_difference(s1.hist, s2.hist, 0.0));
  double inner_integral = 0.0;
  double outer = 0.5 * inner_integral;  // I_0 / 2
  for (int m = 1; m <= m_full; ++m) {
    const double g_m = clamped_elastic_sq(lagged_difference(s1.hist, s2.hist, m * dt1));
    inner_integral += 0.5 * dt1 * (g_prev + g_m);
    g_prev = g_m;
    outer += (m == m_full ? 0.5 : 1.0) * inner_integral;
  }
  double delay_term = dt1 * outer + s_frac * inner_integral;
  if (m_full == 0) delay_term = 0.0;  // window shorter than one slot

  return e_u + cross + mu * delay_term;
}

std::pair<double, double> low_frequency_control(const ScalarField& u,
                                                const BiharmonicSolver& solver, double eps) {
  const double low = inner(u, u);
  const ScalarField vu = airy(u, u, solver);
  return {low, eps * (clamped_elastic_sq(u) + clamped_elastic_sq(vu))};
}

DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, double burn_in) {
  std::vector<std::pair<double, double>> window;
  for (const auto& [t, value] : series) {
    if (t < burn_in) continue;
    if (!(value > 0.0)) {
      throw ValidationError("fit_decay_rate: nonpositive value in fit window");
    }
    window.emplace_back(t, std::log(value));
  }
  if (window.size() < 10) {
    throw ValidationError("fit_decay_rate: need at least 10 samples past burn-in");
  }

  const double n = static_cast<double>(window.size());
  double mean_t = 0.0, mean_y = 0.0;
  for (const auto& [t, y] : window) {
    mean_t += t;
    mean_y += y;
  }
  mean_t /= n;
  mean_y /= n;
  double s_tt = 0.0, s_ty = 0.0, s_yy = 0.0;
  for (const auto& [t, y] : window) {
    s_tt += (t - mean_t) * (t - mean_t);
    s_ty += (t - mean_t) * (y - mean_y);
    s_yy += (y - mean_y) * (y - mean_y);
  }
  if (s_tt == 0.0) throw ValidationError("fit_decay_rate: degenerate time axis");

  DecayFit fit;
  fit.samples = static_cast<int>(window.size());
  const double slope = s_ty / s_tt;
  fit.rate = -slope;
  if (s_yy == 0.0) {
    fit.r_squared = 1.0;  // constant series: the flat fit is exact
  } else {
    const double ss_res = s_yy - slope * s_ty;
    fit.r_squared = 1.0 - ss_res / s_yy;
  }
  return fit;
}

ConvergenceReport convergence_detector(const std::vector<DiagnosticsRecord>& series, double window,
                                       double ut_tol, double dist_tol) {
  if (series.size() < 2 || series.back().t - series.front().t < window) {
    throw ValidationError("convergence_detector: series shorter than the detection window");
  }

  // A series recorded without any distance target is classified on velocity
  // alone; once any record carries a distance, NaN gaps never qualify.
  bool have_dist = false;
  for (const DiagnosticsRecord& r : series)
    if (!std::isnan(r.dist_to_equilibria)) {
      have_dist = true;
      break;
    }

  // trailing stretch where the bounds hold
  int suffix = static_cast<int>(series.size());
  while (suffix > 0) {
    const DiagnosticsRecord& r = series[suffix - 1];
    const bool good =
        r.u_t_norm <= ut_tol && (!have_dist || r.dist_to_equilibria <= dist_tol);
    if (!good) break;
    --suffix;
  }
  if (suffix < static_cast<int>(series.size()) &&
      series.back().t - series[suffix].t >= window) {
    return {Verdict::Converged, suffix};
  }

  // growth baseline: the sign-definite energy part over the leading window,
  // floored so the all-zero run never trips on rounding noise
  double baseline = 1e-14;
  const double lead_end = series.front().t + window;
  for (const DiagnosticsRecord& r : series) {
    if (r.t > lead_end) break;
    baseline = std::max(baseline, r.e_red - r.pi);
  }
  for (const DiagnosticsRecord& r : series) {
    if (r.e_red - r.pi > 10.0 * baseline) return {Verdict::Growing, -1};
  }
  return {Verdict::Wandering, -1};
}

}  // namespace panelflow

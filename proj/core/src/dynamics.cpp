#include "panelflow/dynamics.hpp"

#include <cmath>
#include <utility>

#include "panelflow/errors.hpp"

namespace panelflow {

double default_dt(const PlateGrid& grid) {
  const double h = std::min(grid.hx(), grid.hy());
  return 0.5 * h * h / 4.0;
}

double cfl_limit(const PlateGrid& grid, double U) {
  return 0.5 * std::min(grid.hx(), grid.hy()) / (1.0 + U);
}

void validate_config(const SimConfig& config, const PlateGrid& grid) {
  if (!(config.U >= 0.0 && config.U < 1.0)) {
    throw ValidationError("flow speed U must lie in [0,1): subsonic only");
  }
  if (config.k < 0.0) throw ValidationError("viscous damping k must be nonnegative");
  if (config.beta < 0.0) throw ValidationError("static damping beta must be nonnegative");
  const double dt = config.dt > 0.0 ? config.dt : default_dt(grid);
  if (!(dt > 0.0)) throw ValidationError("time step dt must be positive");
  if (dt > cfl_limit(grid, config.U) * (1.0 + 1e-12)) {
    throw ValidationError("time step dt exceeds the explicit-term limit 0.5 min(h)/(1+U)");
  }
  if (config.t_end < 0.0) throw ValidationError("t_end must be nonnegative");
  if (config.t_end > 0.0 && config.flow_coupling) {
    const double ts = t_star(grid, config.U);
    if (config.t_end < ts * (1.0 - 1e-12)) {
      throw ValidationError("t_end must be at least the delay horizon t* (or 0 for "
                            "diagnostics-only runs)");
    }
  }
  AeroParams aero = config.aero;
  aero.U = config.U;
  validate_aero(aero);
  if (config.p0 && !(config.p0->grid() == grid)) {
    throw ValidationError("load p0 lives on a different grid");
  }
  if (const auto* vk = std::get_if<VonKarman>(&config.kind)) {
    if (!vk->F0.empty() && !(vk->F0.grid() == grid)) {
      throw ValidationError("prestress F0 lives on a different grid");
    }
  } else {
    const auto& b = std::get<Berger>(config.kind);
    if (b.kappa < 0.0) throw ValidationError("Berger kappa must be nonnegative");
  }
}

SimState init_state(const SimConfig& config, const PlateGrid& grid, const ScalarField& u0,
                    const ScalarField& u1) {
  require_same_grid(u0, u1, "init_state");
  if (!(u0.grid() == grid)) throw ValidationError("initial data lives on a different grid");
  const double dt = config.dt > 0.0 ? config.dt : default_dt(grid);
  const double ts = t_star(grid, config.U);
  DelayHistory hist(grid, dt, ts);

  // Oldest slot index: the window must reach back to -t*.
  const int K = static_cast<int>(std::ceil(ts / dt - 1e-12));

  const ScalarField zero(grid);
  switch (config.history_init) {
    case HistoryInit::Zero:
      hist.set_tail(zero, zero);
      break;
    case HistoryInit::Frozen:
      hist.set_tail(u0, zero);
      break;
    case HistoryInit::Ramp:
      hist.set_tail(zero, zero);
      break;
  }

  for (int j = K; j >= 1; --j) {
    const double tau = -j * dt;
    switch (config.history_init) {
      case HistoryInit::Zero:
        hist.append(tau, zero, zero);
        break;
      case HistoryInit::Frozen:
        hist.append(tau, u0, zero);
        break;
      case HistoryInit::Ramp: {
        const double c = 1.0 + tau / ts;
        if (c <= 0.0) {
          hist.append(tau, zero, zero);
        } else {
          ScalarField v = u0;
          v *= c;
          ScalarField vt = u0;
          vt *= 1.0 / ts;
          hist.append(tau, v, vt);
        }
        break;
      }
    }
  }
  hist.append(0.0, u0, u1);

  SimState st(u0, u1, std::move(hist));
  st.t = 0.0;
  st.step_index = 0;
  return st;
}

namespace {

SimConfig resolve_config(SimConfig config, const PlateGrid& grid) {
  if (config.dt <= 0.0) config.dt = default_dt(grid);
  config.aero.U = config.U;
  validate_config(config, grid);
  return config;
}

}  // namespace

Simulator::Simulator(const SimConfig& config, const PlateGrid& grid, const ScalarField& u0,
                     const ScalarField& u1)
    : config_(resolve_config(config, grid)),
      grid_(grid),
      airy_(grid),
      state_(init_state(config_, grid_, u0, u1)),
      accel_(grid),
      force_curr_(grid),
      force_prev_(grid) {
  const double dt = config_.dt;
  damping_ = config_.k + (config_.flow_coupling ? 1.0 : 0.0);

  SparseMat m = biharmonic_matrix(grid_);
  const double diag = 1.0 + damping_ * dt / 2.0;
  const double stiff = dt * dt / 4.0;
  m *= stiff;
  SparseMat eye(m.rows(), m.cols());
  eye.setIdentity();
  m += (diag + stiff * config_.beta) * eye;
  newmark_.compute(m);
  if (newmark_.info() != Eigen::Success) {
    throw NumericalError("Newmark matrix factorization failed");
  }

  force_curr_ = explicit_force();

  // Consistent initial acceleration from the equation at t = 0.
  ScalarField ku = biharmonic_clamped(state_.u);
  ku.values() += config_.beta * state_.u.values();
  accel_.values() = force_curr_.values() - damping_ * state_.ut.values() - ku.values();
}

ScalarField Simulator::current_q() const {
  if (!config_.flow_coupling) return ScalarField(grid_);
  if (q_cache_step_ == state_.step_index) return q_cache_;
  return q_potential(state_.hist, config_.aero, grid_);
}

ScalarField Simulator::explicit_force() const {
  const NonlinearityCache cache = make_nonlinearity_cache(state_.u, config_.kind, airy_);
  ScalarField g = restoring_force(state_.u, cache, config_.kind, airy_);
  g *= -1.0;
  if (config_.p0) g += *config_.p0;
  if (config_.flow_coupling) {
    g.values() -= config_.U * state_.hist.newest().ux.values();
    // The potential at the newest slot is what diagnostics ask for via
    // current_q(); keep it so recording does not repeat the evaluation.
    q_cache_ = q_potential(state_.hist, config_.aero, grid_);
    q_cache_step_ = state_.step_index;
    g -= q_cache_;
  }
  return g;
}

void Simulator::step() {
  const double dt = config_.dt;
  const double q4 = dt * dt / 4.0;

  // Newmark predictors (gamma = 1/2, beta_N = 1/4).
  ScalarField us = state_.u;
  us.values() += dt * state_.ut.values() + q4 * accel_.values();
  ScalarField vs = state_.ut;
  vs.values() += (dt / 2.0) * accel_.values();

  // Second-order extrapolated explicit force at t_{n+1}.
  ScalarField fstar = force_curr_;
  if (have_prev_) {
    fstar *= 2.0;
    fstar -= force_prev_;
  }

  ScalarField ku = biharmonic_clamped(us);
  ku.values() += config_.beta * us.values();
  ScalarField rhs(grid_);
  rhs.values() = fstar.values() - damping_ * vs.values() - ku.values();

  const Eigen::VectorXd sol = newmark_.solve(rhs.flat());
  if (newmark_.info() != Eigen::Success) {
    throw NumericalError("Newmark linear solve failed");
  }
  ScalarField a1(grid_);
  a1.flat() = sol;

  ScalarField u1 = us;
  u1.values() += q4 * a1.values();
  ScalarField v1 = vs;
  v1.values() += (dt / 2.0) * a1.values();

  if (!u1.all_finite() || !v1.all_finite()) {
    throw NumericalError("non-finite state detected at step " +
                         std::to_string(state_.step_index + 1));
  }

  state_.u = std::move(u1);
  state_.ut = std::move(v1);
  state_.t += dt;
  state_.step_index += 1;
  state_.hist.append(state_.t, state_.u, state_.ut);
  accel_ = std::move(a1);

  force_prev_ = std::move(force_curr_);
  force_curr_ = explicit_force();
  have_prev_ = true;
}

}  // namespace panelflow

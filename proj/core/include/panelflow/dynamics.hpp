#pragma once

// Time integration of the reduced delayed plate equation
//
//   u_tt + Delta^2 u + k u_t + beta u + f(u)
//       = p0 - (d_t + U d_x) u - q^u(t),
//
// by an IMEX Newmark scheme: the stiff linear core Delta^2 + beta and the
// total viscous coefficient k + 1 (the flow-donated -u_t moved to the left)
// are implicit with gamma = 1/2, beta_N = 1/4; the restoring force, the
// convection U u_x and the delayed potential q are explicit via second-order
// extrapolation. The factored Newmark matrix is reused across all steps.

#include <optional>

#include "panelflow/aero.hpp"
#include "panelflow/field.hpp"
#include "panelflow/operators.hpp"
#include "panelflow/vonkarman.hpp"

namespace panelflow {

// How the history window on [-t*, 0] is filled before the first step.
enum class HistoryInit {
  Zero,    // all past slots zero
  Frozen,  // u(tau) = u0, u_t(tau) = 0 for tau < 0
  Ramp,    // u(tau) = (1 + tau/t*) u0 rising linearly from 0, u_t = u0/t*
};

struct SimConfig {
  double U = 0.0;     // free-stream speed ratio, subsonic
  double k = 0.0;     // viscous damping coefficient
  double beta = 0.0;  // static damping coefficient
  double dt = 0.0;    // time step; 0 selects default_dt(grid)
  double t_end = 0.0; // horizon; must be >= t* unless 0 (diagnostics only)
  NonlinearityKind kind;               // von Karman (with optional prestress) or Berger
  std::optional<ScalarField> p0;       // transverse load; empty = zero
  HistoryInit history_init = HistoryInit::Zero;
  AeroParams aero;    // quadrature sizes; aero.U is overwritten with U
  // Test-only switch: false removes the flow feedback entirely (q = 0, no
  // convection, no flow-donated damping), leaving the pure plate equation.
  bool flow_coupling = true;
};

// Spec default dt = min(hx,hy)^2/4 with a further 0.5 safety factor.
double default_dt(const PlateGrid& grid);

// Largest dt the explicit pieces tolerate: 0.5 min(hx,hy)/(1+U).
double cfl_limit(const PlateGrid& grid, double U);

// Throws ValidationError on out-of-range parameters, a p0 on the wrong grid,
// dt above the explicit CFL limit, or 0 < t_end < t*.
void validate_config(const SimConfig& config, const PlateGrid& grid);

struct SimState {
  double t = 0.0;
  ScalarField u, ut;
  DelayHistory hist;
  long step_index = 0;

  SimState(const ScalarField& u0, const ScalarField& ut0, DelayHistory history)
      : u(u0), ut(ut0), hist(std::move(history)) {}
};

// Builds the initial state: history slots at tau = -K dt, ..., -dt filled per
// config.history_init (K = ceil(t*/dt)), the slot at tau = 0 holding (u0, u1),
// and the tail set to the oldest pattern so lags beyond the window are defined.
SimState init_state(const SimConfig& config, const PlateGrid& grid, const ScalarField& u0,
                    const ScalarField& u1);

// Owns the factored Newmark matrix, the Airy solver and the state; advances
// one dt per step() call. Single-threaded with respect to state mutation.
class Simulator {
public:
  // Validates the config, freezes aero.U = config.U, builds the state.
  Simulator(const SimConfig& config, const PlateGrid& grid, const ScalarField& u0,
            const ScalarField& u1);

  // Advances state by one dt. Throws NumericalError when a non-finite value
  // appears; the state is left at the last valid step.
  void step();

  const SimState& state() const { return state_; }
  const SimConfig& config() const { return config_; }
  const PlateGrid& grid() const { return grid_; }
  const BiharmonicSolver& airy_solver() const { return airy_; }

  // Delayed potential at the current time (the value the next step uses).
  // Zero field when flow coupling is off.
  ScalarField current_q() const;

private:
  // Explicit right-hand side G(t) = p0 - f(u) - U u_x - q at the newest slot.
  ScalarField explicit_force() const;

  SimConfig config_;
  PlateGrid grid_;
  BiharmonicSolver airy_;
  Eigen::SimplicialLDLT<SparseMat> newmark_;  // (1+(k+1)dt/2) I + dt^2/4 (B + beta I)
  double damping_ = 0.0;                      // k + 1, or k with coupling off
  SimState state_;
  ScalarField accel_;        // a_n, consistent acceleration at state_.t
  ScalarField force_curr_;   // G_n, explicit force at the newest slot
  ScalarField force_prev_;   // G_{n-1} for the two-point extrapolation
  bool have_prev_ = false;
  mutable ScalarField q_cache_;     // delayed potential at the newest slot
  mutable long q_cache_step_ = -1;  // step index the cache belongs to
};

}  // namespace panelflow

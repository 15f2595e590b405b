#pragma once

// The reduced stationary problem and the equilibrium catalog:
//
//   Delta^2 u + beta u + f(u) + U u_x + Q[u] = p0,
//
// where Q[u] is the delayed potential evaluated on the time-independent
// history u(tau) = u — a fixed linear operator. Solved by damped Newton with
// a right-preconditioned GMRES inner solve (clamped biharmonic factorization
// as the preconditioner).

#include <vector>

#include "panelflow/dynamics.hpp"
#include "panelflow/field.hpp"
#include "panelflow/operators.hpp"

namespace panelflow {

// Residual of the reduced stationary equation at u.
ScalarField static_residual(const ScalarField& u, const SimConfig& config, const PlateGrid& grid,
                            const BiharmonicSolver& solver);

// The stationary aerodynamic correction Q[u]: q_potential on a frozen
// history. Linear in u; zero field when flow coupling is off.
ScalarField q_stationary(const ScalarField& u, const SimConfig& config, const PlateGrid& grid);

struct NewtonOptions {
  int max_iterations = 30;
  int gmres_restart = 60;
  int gmres_max_restarts = 4;
  double tol_scale = 1e-9;       // converged when ||r|| <= tol_scale (1 + ||p0||)
  double min_step = 1.0 / 1024;  // line-search floor before declaring a stall
};

struct NewtonReport {
  ScalarField u;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool line_search_stalled = false;
  std::vector<double> residual_history;  // includes the initial residual
};

NewtonReport newton_solve(const ScalarField& u_guess, const SimConfig& config,
                          const PlateGrid& grid, const BiharmonicSolver& solver,
                          const NewtonOptions& options = {});

// One catalog entry: a certified equilibrium and the parameters it solves.
struct Equilibrium {
  ScalarField u;
  double residual_norm = 0.0;
  SimConfig params;
};

class EquilibriumSet {
public:
  explicit EquilibriumSet(double dedup_tol = 1e-5) : dedup_tol_(dedup_tol) {}

  // Inserts unless an existing member is within dedup_tol in the
  // H2-equivalent metric ||lap(u - v)||; on a duplicate keeps the member
  // with the smaller residual. Returns true when the catalog changed.
  bool try_insert(Equilibrium e);

  const std::vector<Equilibrium>& members() const { return members_; }
  double dedup_tol() const { return dedup_tol_; }
  bool empty() const { return members_.empty(); }
  int size() const { return static_cast<int>(members_.size()); }

private:
  double dedup_tol_;
  std::vector<Equilibrium> members_;
};

// Natural-parameter continuation: Newton at each config in order, seeding
// with the previous converged solution. Non-converged points are skipped and
// counted; converged ones are inserted into the returned set.
struct ContinuationResult {
  EquilibriumSet set;
  int failures = 0;
  std::vector<double> residuals;  // per path point, converged or not
};

ContinuationResult continuation(const std::vector<SimConfig>& path, const PlateGrid& grid,
                                const ScalarField& seed, const NewtonOptions& options = {});

// min over members of sqrt(||lap(u - member)||^2 + ||u_t||^2); the arg-min
// index is written to *index when non-null. Throws on an empty set.
double distance_to_set(const ScalarField& u, const ScalarField& ut, const EquilibriumSet& set,
                       int* index = nullptr);

}  // namespace panelflow

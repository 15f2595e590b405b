#pragma once

// Energy bookkeeping, dissipation accounting, difference-trajectory Lyapunov
// functional, decay-rate fitting, and run-verdict detection.
//
// Every energy is computed twice through independent code paths (stencil
// arithmetic vs the assembled sparse operator; quartic term through the Airy
// identity <B v, v> = <-[u,u], v>); the record stream carries both totals so
// their agreement is a standing invariant of every run.

#include <limits>
#include <utility>
#include <vector>

#include "panelflow/dynamics.hpp"
#include "panelflow/stationary.hpp"

namespace panelflow {

inline constexpr unsigned kFlagNonFinite = 1u;

// One row of the simulation record stream; column order is frozen in io.
struct DiagnosticsRecord {
  double t = 0.0;
  double e_pl = 0.0;           // plate energy, stencil evaluation path
  double pi = 0.0;             // potential: quartic + prestress + load work
  double e_red = 0.0;          // the same total energy, assembled-operator path
  double diss_integral = 0.0;  // running trapezoid of k ||u_t||^2
  double q_norm = 0.0;
  double u_t_norm = 0.0;
  double dist_to_equilibria = std::numeric_limits<double>::quiet_NaN();  // needs a catalog
  double trace_residual = std::numeric_limits<double>::quiet_NaN();  // probe strides only
  unsigned flags = 0;
};

// Streaming evaluator. The only state it carries across calls is the running
// dissipation integral, so records must be requested in nondecreasing time.
// The solver provides Airy solves; the catalog (optional, borrowed) enables
// the distance column.
class DiagnosticsAccumulator {
public:
  DiagnosticsAccumulator(const SimConfig& config, const PlateGrid& grid,
                         const BiharmonicSolver& solver, const EquilibriumSet* catalog = nullptr);

  // q_now: aerodynamic term the stepper already computed for this state;
  // recomputed here when null (and flow coupling is on).
  DiagnosticsRecord record(const SimState& state, const ScalarField* q_now = nullptr);

  const SimConfig& config() const { return config_; }

private:
  SimConfig config_;
  PlateGrid grid_;
  const BiharmonicSolver* solver_;
  const EquilibriumSet* catalog_;
  SparseMat lap_;  // assembled Laplacian for the second elastic path
  bool have_prev_ = false;
  double prev_t_ = 0.0;
  double prev_integrand_ = 0.0;
  double diss_ = 0.0;
};

// The clamped quadratic form <B f, f> = ||lap f||^2 + ring corrections; the
// elastic energy all diagnostics share (exactly the operator the dynamics
// integrate, so semi-discrete energy identities close without O(h) leakage).
double clamped_elastic_sq(const ScalarField& f);

// E_u = 1/2 (||lap du||^2_B + ||du_t||^2 + beta ||du||^2) for du = u1 - u2.
// Requires the two states to share grid and clock.
double difference_energy(const SimState& s1, const SimState& s2, double beta);

struct DifferenceSample {
  double t = 0.0, e_u = 0.0, v = 0.0;
};

// Parameters of the difference-trajectory functional plus the recorded series.
// mu = 0 resolves to nu / (2 t_star) at construction; eps parameterizes the
// equivalence-sandwich bookkeeping and does not enter V itself.
struct DifferenceProbe {
  double nu = 0.1;
  double mu = 0.0;
  double eps = 0.1;
  double beta = 0.0;
  double t_star = 0.0;
  std::vector<DifferenceSample> series;
};

DifferenceProbe make_difference_probe(const SimConfig& config, const PlateGrid& grid);

// V = E_u + nu { <du_t, du> + k/2 ||du||^2 }
//       + mu * int_0^{t*} int_{t-s}^t ||lap du(tau)||^2_B dtau ds,
// the double integral by trapezoid over stored history slots (linear
// interpolation between slots, frozen-tail fallback for prehistory).
double lyapunov_V(const SimState& s1, const SimState& s2, const DifferenceProbe& probe, double k);

// Monitoring pair for the low-frequency control heuristic: first = ||u||^2,
// second = eps * (<B u, u> + <B v(u), v(u)>) with v(u) the Airy stress of u.
// Callers fit the offset M = sup(first - second) over a run and report it;
// the inequality first <= second + M is a recorded observation per run, not
// an asserted universal bound.
std::pair<double, double> low_frequency_control(const ScalarField& u,
                                                const BiharmonicSolver& solver, double eps = 0.1);

struct DecayFit {
  double rate = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

// Least-squares slope of log(value) against t over samples with t >= burn_in;
// rate is the negated slope. Requires >= 10 positive samples past burn-in.
DecayFit fit_decay_rate(const std::vector<std::pair<double, double>>& series, double burn_in);

enum class Verdict { Converged, Wandering, Growing };

struct ConvergenceReport {
  Verdict verdict = Verdict::Wandering;
  // First record index of the stable trailing stretch (Converged only). The
  // caller identifies which catalog member was reached from the final state.
  int converged_at = -1;
};

// Converged: every record in the trailing window of the given duration has
// u_t_norm <= ut_tol and dist_to_equilibria <= dist_tol (series recorded
// without any distance target classify on velocity alone). Growing: the
// sign-definite part e_red - pi exceeds 10x its baseline, the sup over the
// leading window (floored at 1e-14 so quiescent runs never trip on noise).
// Else Wandering. A converged tail takes precedence over early growth.
ConvergenceReport convergence_detector(const std::vector<DiagnosticsRecord>& series, double window,
                                       double ut_tol, double dist_tol);

}  // namespace panelflow

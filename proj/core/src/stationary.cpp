#include "panelflow/stationary.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "panelflow/errors.hpp"
#include "panelflow/vonkarman.hpp"

namespace panelflow {
namespace {

// Right-preconditioned restarted GMRES on flat vectors: solves A x = b where
// only the actions w -> A w and w -> P^{-1} w are available. Returns the
// last true-residual estimate so the caller can judge the step quality.
struct GmresResult {
  Eigen::VectorXd x;
  double rel_residual = 1.0;
  int iterations = 0;
};

template <class ApplyA, class ApplyP>
GmresResult gmres_right(const Eigen::VectorXd& b, ApplyA&& apply_a, ApplyP&& apply_p, int restart,
                        int max_restarts, double rtol) {
  const auto n = b.size();
  GmresResult out;
  out.x = Eigen::VectorXd::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    out.rel_residual = 0.0;
    return out;
  }

  Eigen::VectorXd residual = b;
  for (int cycle = 0; cycle < max_restarts; ++cycle) {
    const double beta = residual.norm();
    if (beta <= rtol * b_norm) break;

    const int m = restart;
    Eigen::MatrixXd basis(n, m + 1);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sn = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    basis.col(0) = residual / beta;
    g(0) = beta;

    int k = 0;
    bool breakdown = false;
    while (k < m) {
      Eigen::VectorXd t = apply_a(apply_p(basis.col(k)));
      // modified Gram-Schmidt with one re-orthogonalization pass; the extra
      // dot products are negligible next to the operator applies
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const double c = t.dot(basis.col(i));
          hess(i, k) += c;
          t -= c * basis.col(i);
        }
      }
      hess(k + 1, k) = t.norm();
      if (hess(k + 1, k) > 1e-14 * beta) {
        basis.col(k + 1) = t / hess(k + 1, k);
      } else {
        breakdown = true;  // Krylov space exhausted: the current solve is exact
      }

      for (int i = 0; i < k; ++i) {
        const double tmp = cs(i) * hess(i, k) + sn(i) * hess(i + 1, k);
        hess(i + 1, k) = -sn(i) * hess(i, k) + cs(i) * hess(i + 1, k);
        hess(i, k) = tmp;
      }
      const double denom = std::hypot(hess(k, k), hess(k + 1, k));
      if (denom == 0.0) {
        cs(k) = 1.0;
        sn(k) = 0.0;
      } else {
        cs(k) = hess(k, k) / denom;
        sn(k) = hess(k + 1, k) / denom;
      }
      hess(k, k) = denom;
      hess(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);

      ++k;
      ++out.iterations;
      if (breakdown || std::abs(g(k)) <= rtol * b_norm) break;
    }

    const Eigen::VectorXd y =
        hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    out.x += apply_p(basis.leftCols(k) * y);

    residual = b - apply_a(out.x);
    out.rel_residual = residual.norm() / b_norm;
    if (out.rel_residual <= rtol || breakdown) break;
  }
  return out;
}

void check_stationary_config(const SimConfig& config, const PlateGrid& grid,
                             const ScalarField& u) {
  if (!(config.U >= 0.0 && config.U < 1.0)) {
    throw ValidationError("stationary: U must lie in [0, 1): subsonic only");
  }
  if (config.beta < 0.0) throw ValidationError("stationary: beta must be non-negative");
  if (config.flow_coupling) validate_aero(config.aero);
  if (config.p0) require_same_grid(u, *config.p0, "stationary load");
  if (const auto* vk = std::get_if<VonKarman>(&config.kind)) {
    if (!vk->F0.empty()) require_same_grid(u, vk->F0, "stationary prestress");
  } else if (const auto* bg = std::get_if<Berger>(&config.kind)) {
    if (bg->kappa < 0.0) throw ValidationError("stationary: Berger kappa must be non-negative");
  }
  (void)grid;
}

}  // namespace

ScalarField q_stationary(const ScalarField& u, const SimConfig& config, const PlateGrid& grid) {
  if (!config.flow_coupling) return ScalarField(grid);
  DelayHistory frozen = DelayHistory::frozen(u, ScalarField(grid));
  AeroParams aero = config.aero;
  aero.U = config.U;
  return q_potential(frozen, aero, grid);
}

ScalarField static_residual(const ScalarField& u, const SimConfig& config, const PlateGrid& grid,
                            const BiharmonicSolver& solver) {
  ScalarField r = biharmonic_clamped(u);
  if (config.beta != 0.0) r += config.beta * u;
  r += restoring_force(u, config.kind, solver);
  if (config.flow_coupling) {
    if (config.U != 0.0) r += config.U * derivatives(u).fx;
    r += q_stationary(u, config, grid);
  }
  if (config.p0) r -= *config.p0;
  return r;
}

NewtonReport newton_solve(const ScalarField& u_guess, const SimConfig& config,
                          const PlateGrid& grid, const BiharmonicSolver& solver,
                          const NewtonOptions& options) {
  check_stationary_config(config, grid, u_guess);

  NewtonReport report;
  const double p0_norm = config.p0 ? norm_l2(*config.p0) : 0.0;
  const double tol = options.tol_scale * (1.0 + p0_norm);

  ScalarField u = u_guess;
  ScalarField r = static_residual(u, config, grid, solver);
  double r_norm = norm_l2(r);
  report.residual_history.push_back(r_norm);
  if (r_norm <= tol) {
    report.u = std::move(u);
    report.residual_norm = r_norm;
    report.converged = true;
    return report;
  }

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    if (!std::isfinite(r_norm)) break;
    const NonlinearityCache cache = make_nonlinearity_cache(u, config.kind, solver);
    auto apply_jacobian = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
      ScalarField h(grid);
      h.flat() = w;
      ScalarField jh = biharmonic_clamped(h);
      if (config.beta != 0.0) jh += config.beta * h;
      jh += restoring_jacobian_apply(u, cache, h, config.kind, solver);
      if (config.flow_coupling) {
        if (config.U != 0.0) jh += config.U * derivatives(h).fx;
        jh += q_stationary(h, config, grid);
      }
      return jh.flat();
    };
    auto apply_precond = [&](const Eigen::VectorXd& w) { return solver.solve_flat(w); };

    // inexact Newton: the inner tolerance tightens with the residual so the
    // outer iteration keeps its quadratic tail without over-solving early
    const double eta = std::min(1e-2, std::max(1e-7, 0.5 * r_norm / (1.0 + p0_norm)));
    const Eigen::VectorXd rhs = -r.flat();
    GmresResult gm = gmres_right(rhs, apply_jacobian, apply_precond, options.gmres_restart,
                                 options.gmres_max_restarts, eta);

    ScalarField direction(grid);
    direction.flat() = gm.x;

    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= options.min_step) {
      ScalarField trial = u + alpha * direction;
      ScalarField r_trial = static_residual(trial, config, grid, solver);
      const double trial_norm = norm_l2(r_trial);
      if (trial_norm <= (1.0 - 1e-4 * alpha) * r_norm) {  // NaN fails and backtracks
        u = std::move(trial);
        r = std::move(r_trial);
        r_norm = trial_norm;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }

    report.iterations = iter;
    if (!accepted) {
      report.line_search_stalled = true;
      break;
    }
    report.residual_history.push_back(r_norm);
    if (r_norm <= tol) {
      report.converged = true;
      break;
    }
  }

  report.u = std::move(u);
  report.residual_norm = r_norm;
  return report;
}

bool EquilibriumSet::try_insert(Equilibrium e) {
  for (auto& member : members_) {
    const double d = norm_h2(e.u - member.u);
    if (d <= dedup_tol_) {
      if (e.residual_norm < member.residual_norm) {
        member = std::move(e);
        return true;
      }
      return false;
    }
  }
  members_.push_back(std::move(e));
  return true;
}

ContinuationResult continuation(const std::vector<SimConfig>& path, const PlateGrid& grid,
                                const ScalarField& seed, const NewtonOptions& options) {
  ContinuationResult out;
  if (path.empty()) return out;
  const BiharmonicSolver solver(grid);
  ScalarField current = seed;
  for (const SimConfig& config : path) {
    NewtonReport rep = newton_solve(current, config, grid, solver, options);
    out.residuals.push_back(rep.residual_norm);
    if (rep.converged) {
      current = rep.u;
      out.set.try_insert(Equilibrium{std::move(rep.u), rep.residual_norm, config});
    } else {
      ++out.failures;  // keep the last good seed for the next path point
    }
  }
  return out;
}

double distance_to_set(const ScalarField& u, const ScalarField& ut, const EquilibriumSet& set,
                       int* index) {
  if (set.empty()) throw ValidationError("distance_to_set: empty equilibrium set");
  const double kinetic = norm_l2(ut);
  double best = -1.0;
  int best_index = -1;
  for (int i = 0; i < set.size(); ++i) {
    const double elastic = norm_h2(u - set.members()[i].u);
    const double d = std::sqrt(elastic * elastic + kinetic * kinetic);
    if (best_index < 0 || d < best) {
      best = d;
      best_index = i;
    }
  }
  if (index) *index = best_index;
  return best;
}

}  // namespace panelflow

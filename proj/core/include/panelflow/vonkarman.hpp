#pragma once

// Geometric plate nonlinearities: the von Karman bracket, the Airy stress
// solve, the restoring forces (full von Karman and Berger), their directional
// derivatives, and the associated potential energy.
//
// Sign conventions: the plate equation carries the restoring force on the
// left-hand side, u_tt + \Delta^2 u + k u_t + \beta u + f(u) = p, with
//   f_V(u) = -[u, v(u) + F0],   \Delta^2 v(u) = -[u, u]   (clamped),
//   f_B(u) = (\Upsilon - \kappa ||grad u||^2) \Delta u.
// The potential below satisfies d/d\eps \Pi(u + \eps h)|_0 =
// <f(u) - p, h> up to solver tolerance and second-order quadrature defects.

#include <optional>
#include <variant>

#include "panelflow/field.hpp"
#include "panelflow/operators.hpp"

namespace panelflow {

// Full von Karman nonlinearity. F0 is the in-plane prestress potential; an
// empty field means no prestress. F0 need not vanish on the frame, so its
// curvature is taken with boundary-free stencils (curvature_unclamped).
struct VonKarman {
  ScalarField F0;
};

// Berger approximation: f(u) = (upsilon - kappa*||grad u||^2) * laplacian(u).
// upsilon > 0 models in-plane compression; kappa >= 0 is the restoring
// coefficient. upsilon = kappa = 0 turns the nonlinearity off entirely.
struct Berger {
  double upsilon = 0.0;
  double kappa = 0.0;
};

using NonlinearityKind = std::variant<VonKarman, Berger>;

// Pointwise von Karman bracket [u,w] = u_xx w_yy + u_yy w_xx - 2 u_xy w_xy
// using the zero-ring derivative stencils (arguments are clamped fields).
ScalarField bracket(const ScalarField& u, const ScalarField& w);

// Same bilinear form with the second argument supplied through precomputed
// curvature fields (for prestress, whose boundary values are not zero).
ScalarField bracket_curvature(const ScalarField& u, const Curvature& c);

// Airy stress solve: v with biharmonic_clamped(v) = -bracket(u, w).
// Throws NumericalError if the relative residual exceeds rtol.
ScalarField airy(const ScalarField& u, const ScalarField& w, const BiharmonicSolver& solver,
                 double rtol = 1e-10);

// Per-iterate cache so repeated force/Jacobian evaluations at the same u do
// not repeat the quadratic Airy solve or the gradient norm.
struct NonlinearityCache {
  std::optional<ScalarField> vu;  // airy(u, u), von Karman only
  double grad_sq = 0.0;           // ||grad u||^2, Berger only
};

NonlinearityCache make_nonlinearity_cache(const ScalarField& u, const NonlinearityKind& kind,
                                          const BiharmonicSolver& solver);

// f(u); the cached overload assumes cache = make_nonlinearity_cache(u, ...).
ScalarField restoring_force(const ScalarField& u, const NonlinearityKind& kind,
                            const BiharmonicSolver& solver);
ScalarField restoring_force(const ScalarField& u, const NonlinearityCache& cache,
                            const NonlinearityKind& kind, const BiharmonicSolver& solver);

// Directional derivative h -> d/d\eps f(u + \eps h)|_0.
ScalarField restoring_jacobian_apply(const ScalarField& u, const ScalarField& h,
                                     const NonlinearityKind& kind, const BiharmonicSolver& solver);
ScalarField restoring_jacobian_apply(const ScalarField& u, const NonlinearityCache& cache,
                                     const ScalarField& h, const NonlinearityKind& kind,
                                     const BiharmonicSolver& solver);

// Potential energy of the nonlinear and load terms:
//   von Karman: 1/4 ||lap v(u)||^2 - 1/2 <[u,u], F0> - <p, u>
//   Berger:     -upsilon/2 ||grad u||^2 + kappa/4 ||grad u||^4 - <p, u>
// p == nullptr means no transverse load.
double potential_pi(const ScalarField& u, const NonlinearityKind& kind,
                    const BiharmonicSolver& solver, const ScalarField* p = nullptr);

}  // namespace panelflow

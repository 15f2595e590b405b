#include <cmath>
#include <vector>

#include "doctest.h"
#include "panelflow/fields_synth.hpp"
#include "panelflow/stationary.hpp"
#include "test_support.hpp"

using namespace panelflow;
using pftest::max_abs;
using pftest::max_abs_diff;

namespace {

SimConfig stationary_config(double U, double beta = 0.0) {
  SimConfig c;
  c.U = U;
  c.k = 1.0;
  c.beta = beta;
  c.kind = NonlinearityKind{};
  c.aero = AeroParams{U, 32, 32};
  return c;
}

ScalarField flip_x(const ScalarField& u) {
  ScalarField r(u.grid());
  for (int i = 0; i < u.grid().nx; ++i)
    for (int j = 0; j < u.grid().ny; ++j) r(i, j) = u(u.grid().nx - 1 - i, j);
  return r;
}

}  // namespace

TEST_SUITE("stationary") {

TEST_CASE("the zero state solves the unloaded problem exactly") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  SimConfig cfg = stationary_config(0.3, 0.2);

  CHECK(max_abs(static_residual(ScalarField(g), cfg, g, solver)) == 0.0);

  cfg.p0 = build_field(g, {ModeTerm{1, 1, 0.7}});
  const ScalarField r0 = static_residual(ScalarField(g), cfg, g, solver);
  CHECK(max_abs_diff(r0, -1.0 * *cfg.p0) == 0.0);

  cfg.p0.reset();
  const NewtonReport rep = newton_solve(ScalarField(g), cfg, g, solver);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(max_abs(rep.u) == 0.0);
}

TEST_CASE("the reported residual is reproducible from the returned state") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  SimConfig cfg = stationary_config(0.3);
  cfg.p0 = build_field(g, {ModeTerm{1, 1, 0.5}});

  const NewtonReport rep = newton_solve(ScalarField(g), cfg, g, solver);
  REQUIRE(rep.converged);
  const double target = 1e-9 * (1.0 + norm_l2(*cfg.p0));
  CHECK(rep.residual_norm <= target);
  const double recomputed = norm_l2(static_residual(rep.u, cfg, g, solver));
  CHECK(std::abs(recomputed - rep.residual_norm) <= 1e-12 * (1.0 + norm_l2(*cfg.p0)));
  REQUIRE(!rep.residual_history.empty());
  CHECK(rep.residual_history.front() == doctest::Approx(norm_l2(*cfg.p0)).epsilon(1e-12));
}

TEST_CASE("small loads reproduce the damped linear fixed-point iteration") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  SimConfig cfg = stationary_config(0.3, 0.2);
  cfg.p0 = build_field(g, {ModeTerm{1, 1, 0.01}});

  const NewtonReport rep = newton_solve(ScalarField(g), cfg, g, solver);
  REQUIRE(rep.converged);

  // contraction u <- B^{-1}(p0 - beta u - U u_x - f(u) - Q[u]); at this load
  // the non-biharmonic terms are small, so the iteration converges and must
  // land on the same solution as Newton
  ScalarField u(g);
  for (int it = 0; it < 400; ++it) {
    ScalarField rhs = *cfg.p0;
    rhs += (-cfg.beta) * u;
    rhs += (-cfg.U) * derivatives(u).fx;
    rhs += -1.0 * restoring_force(u, cfg.kind, solver);
    rhs += -1.0 * q_stationary(u, cfg, g);
    ScalarField next = solver.solve(rhs);
    const double delta = norm_l2(next - u);
    u = next;
    if (delta <= 1e-14 * norm_l2(u)) break;
  }
  CHECK(norm_l2(rep.u - u) <= 1e-6 * norm_l2(u));
}

TEST_CASE("a one-point continuation path is the plain solve") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  SimConfig cfg = stationary_config(0.3);
  cfg.p0 = build_field(g, {ModeTerm{1, 1, 0.5}});

  const NewtonReport direct = newton_solve(ScalarField(g), cfg, g, solver);
  const ContinuationResult path = continuation({cfg}, g, ScalarField(g));
  CHECK(path.failures == 0);
  REQUIRE(path.set.size() == 1);
  CHECK(max_abs_diff(path.set.members()[0].u, direct.u) == 0.0);
  CHECK(path.residuals.size() == 1);
}

TEST_CASE("load continuation retraces the directly solved branch") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  const ScalarField base = build_field(g, {ModeTerm{1, 1, 1.0}});

  std::vector<SimConfig> path;
  for (double s : {0.4, 0.8, 1.2}) {
    SimConfig cfg = stationary_config(0.3);
    cfg.p0 = s * base;
    path.push_back(cfg);
  }
  const ContinuationResult res = continuation(path, g, ScalarField(g));
  CHECK(res.failures == 0);
  REQUIRE(res.set.size() == 3);
  CHECK(static_cast<int>(res.residuals.size()) == 3);

  const NewtonReport direct = newton_solve(ScalarField(g), path.back(), g, solver);
  REQUIRE(direct.converged);
  CHECK(norm_l2(res.set.members().back().u - direct.u) <= 1e-7 * (1.0 + norm_l2(direct.u)));
}

TEST_CASE("catalog distance: members at zero, nearest index, empty throws") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  EquilibriumSet set(1e-5);
  SimConfig cfg = stationary_config(0.3);

  EquilibriumSet empty;
  CHECK_THROWS_AS(distance_to_set(ScalarField(g), ScalarField(g), empty), ValidationError);

  for (double s : {0.5, 1.5}) {
    SimConfig c = cfg;
    c.p0 = build_field(g, {ModeTerm{1, 1, s}});
    const NewtonReport rep = newton_solve(ScalarField(g), c, g, solver);
    REQUIRE(rep.converged);
    CHECK(set.try_insert(Equilibrium{rep.u, rep.residual_norm, c}));
  }
  REQUIRE(set.size() == 2);

  int index = -1;
  CHECK(distance_to_set(set.members()[0].u, ScalarField(g), set, &index) <= 1e-12);
  CHECK(index == 0);
  CHECK(distance_to_set(set.members()[1].u, ScalarField(g), set, &index) <= 1e-12);
  CHECK(index == 1);

  // a velocity contribution enters in quadrature and can only increase it
  const ScalarField ut = build_field(g, {ModeTerm{2, 1, 0.3}});
  const double still = distance_to_set(set.members()[0].u, ScalarField(g), set);
  const double moving = distance_to_set(set.members()[0].u, ut, set);
  CHECK(moving >= norm_l2(ut) * (1.0 - 1e-12));
  CHECK(moving >= still);
}

TEST_CASE("catalog deduplication keeps the better-certified copy") {
  const PlateGrid g = make_grid(16, 16);
  const ScalarField u = build_field(g, {ModeTerm{1, 1, 0.2}});
  SimConfig cfg = stationary_config(0.0);

  EquilibriumSet set(1e-3);
  CHECK(set.try_insert(Equilibrium{u, 1e-10, cfg}));
  CHECK(set.size() == 1);

  // same state, worse certificate: rejected outright
  CHECK(!set.try_insert(Equilibrium{u, 1e-8, cfg}));
  CHECK(set.size() == 1);
  CHECK(set.members()[0].residual_norm == 1e-10);

  // same state, better certificate: replaces in place
  CHECK(set.try_insert(Equilibrium{u, 1e-12, cfg}));
  CHECK(set.size() == 1);
  CHECK(set.members()[0].residual_norm == 1e-12);

  // genuinely different state: appended
  CHECK(set.try_insert(Equilibrium{2.0 * u, 1e-10, cfg}));
  CHECK(set.size() == 2);
}

TEST_CASE("solutions inherit the symmetry of the problem, and flow breaks it") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  const ScalarField p0 = build_field(g, {ModeTerm{1, 1, 0.5}});

  SimConfig still = stationary_config(0.0);
  still.p0 = p0;
  const NewtonReport sym = newton_solve(ScalarField(g), still, g, solver);
  REQUIRE(sym.converged);
  CHECK(max_abs_diff(sym.u, flip_x(sym.u)) <= 1e-10 * max_abs(sym.u));

  SimConfig flowing = stationary_config(0.3);
  flowing.p0 = p0;
  const NewtonReport asym = newton_solve(ScalarField(g), flowing, g, solver);
  REQUIRE(asym.converged);
  // the convection U u_x is x-odd: the equilibrium leans downstream
  CHECK(max_abs_diff(asym.u, flip_x(asym.u)) > 1e-8 * max_abs(asym.u));
}

TEST_CASE("overcritical compression yields a buckled pitchfork pair") {
  const PlateGrid g = make_grid(16, 16);
  BiharmonicSolver solver(g);
  SimConfig cfg;
  cfg.U = 0.0;
  cfg.k = 1.0;
  cfg.kind = VonKarman{build_field(g, {CompressionTerm{110.0}})};
  cfg.aero = AeroParams{0.0, 32, 32};
  cfg.flow_coupling = false;

  ScalarField shape = solver.solve(build_field(g, {ModeTerm{1, 1, 1.0}}));
  shape = (1.8 / max_abs(shape)) * shape;

  const NewtonReport up = newton_solve(shape, cfg, g, solver);
  const NewtonReport down = newton_solve(-1.0 * shape, cfg, g, solver);
  REQUIRE(up.converged);
  REQUIRE(down.converged);
  CHECK(up.residual_norm <= 1e-9);
  CHECK(down.residual_norm <= 1e-9);
  CHECK(norm_l2(up.u) > 0.1);
  CHECK(norm_l2(up.u + down.u) <= 1e-6 * norm_l2(up.u));  // mirror branch
  CHECK(norm_l2(up.u - down.u) > 0.1);                    // but distinct states

  // the flat state remains an exact solution between the branches
  const NewtonReport flat = newton_solve(ScalarField(g), cfg, g, solver);
  CHECK(flat.converged);
  CHECK(max_abs(flat.u) == 0.0);

  // Newton near the root contracts superlinearly: some step must slash the
  // residual by three orders, unless it converged almost immediately
  bool fast_tail = up.iterations <= 2;
  for (size_t i = 1; i < up.residual_history.size(); ++i) {
    if (up.residual_history[i] <= 1e-3 * up.residual_history[i - 1]) fast_tail = true;
  }
  CHECK(fast_tail);
}

}  // TEST_SUITE

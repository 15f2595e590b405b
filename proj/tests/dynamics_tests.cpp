#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "panelflow/diagnostics.hpp"
#include "panelflow/dynamics.hpp"
#include "panelflow/fields_synth.hpp"
#include "panelflow/operators.hpp"
#include "panelflow/stationary.hpp"
#include "test_support.hpp"

using namespace panelflow;
using pftest::max_abs;
using pftest::max_abs_diff;

namespace {

// smooth load-shaped initial data with clamped-compatible boundary layers
ScalarField smooth_shape(const PlateGrid& g, double amp) {
  BiharmonicSolver solver(g);
  ScalarField u = solver.solve(build_field(g, {ModeTerm{1, 1, 1.0}}));
  return (amp / max_abs(u)) * u;
}

SimConfig basic_config(double U, double k) {
  SimConfig c;
  c.U = U;
  c.k = k;
  c.kind = NonlinearityKind{};  // von Karman, no prestress
  c.aero = AeroParams{U, 32, 32};
  return c;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("step defaults follow the advertised formulas") {
  const PlateGrid g = make_grid(20, 28, 0.0, 0.0, 1.0, 2.0);
  const double h = std::min(g.hx(), g.hy());
  CHECK(default_dt(g) == doctest::Approx(h * h / 4.0 * 0.5).epsilon(1e-15));
  CHECK(cfl_limit(g, 0.0) == doctest::Approx(0.5 * h).epsilon(1e-15));
  CHECK(cfl_limit(g, 0.6) == doctest::Approx(0.5 * h / 1.6).epsilon(1e-15));
}

TEST_CASE("configuration validation rejects out-of-range setups") {
  const PlateGrid g = make_grid(16, 16);
  SimConfig ok = basic_config(0.3, 1.0);
  CHECK_NOTHROW(validate_config(ok, g));

  SimConfig bad = ok;
  bad.U = 1.0;
  CHECK_THROWS_AS(validate_config(bad, g), ValidationError);

  bad = ok;
  bad.k = -0.5;
  CHECK_THROWS_AS(validate_config(bad, g), ValidationError);

  bad = ok;
  bad.dt = 10.0 * cfl_limit(g, ok.U);
  CHECK_THROWS_AS(validate_config(bad, g), ValidationError);

  // a positive horizon shorter than the delay span leaves q undefined at the
  // end of the run; only t_end = 0 (diagnostics mode) or >= t* is accepted
  bad = ok;
  bad.t_end = 0.5 * t_star(g, ok.U);
  CHECK_THROWS_AS(validate_config(bad, g), ValidationError);
  bad.t_end = 0.0;
  CHECK_NOTHROW(validate_config(bad, g));

  bad = ok;
  bad.p0 = ScalarField(make_grid(12, 12));
  CHECK_THROWS_AS(validate_config(bad, g), ValidationError);
}

TEST_CASE("initial state: zero history gives zero potential, frozen copies u0") {
  const PlateGrid g = make_grid(16, 16);
  const ScalarField u0 = smooth_shape(g, 0.05);

  SimConfig zero_cfg = basic_config(0.3, 1.0);
  zero_cfg.history_init = HistoryInit::Zero;
  Simulator sim(zero_cfg, g, u0, ScalarField(g));
  CHECK(max_abs_diff(sim.state().u, u0) == 0.0);
  CHECK(sim.state().t == 0.0);
  CHECK(max_abs(sim.current_q()) == 0.0);

  SimConfig frozen_cfg = basic_config(0.3, 1.0);
  frozen_cfg.history_init = HistoryInit::Frozen;
  SimState st = init_state(frozen_cfg, g, u0, ScalarField(g));
  const double ts = t_star(g, frozen_cfg.U);
  for (double lag : {0.0, 0.4 * ts, ts}) {
    const DelayHistory::LagRef r = st.hist.at_lag(lag);
    CHECK(max_abs_diff(r.newer->u, u0) == 0.0);
    CHECK(max_abs(r.newer->ut) == 0.0);
  }
}

TEST_CASE("ramp history rises linearly from zero to u0") {
  const PlateGrid g = make_grid(16, 16);
  const ScalarField u0 = smooth_shape(g, 0.05);
  SimConfig cfg = basic_config(0.3, 1.0);
  cfg.history_init = HistoryInit::Ramp;
  SimState st = init_state(cfg, g, u0, ScalarField(g));
  const double ts = t_star(g, cfg.U);

  const DelayHistory::LagRef r = st.hist.at_lag(0.5 * ts);
  REQUIRE(r.newer != nullptr);
  // the ramp is linear in tau, so the slot blend reproduces u0/2 exactly up
  // to rounding even when the lag falls between slots
  ScalarField blended = (1.0 - r.frac) * r.newer->u;
  if (r.older != nullptr) blended += r.frac * r.older->u;
  CHECK(max_abs_diff(blended, 0.5 * u0) <= 1e-12 * max_abs(u0));

  const DelayHistory::LagRef oldest = st.hist.at_lag(ts);
  CHECK(max_abs(oldest.newer->u) <= 1e-12 * max_abs(u0));
}

TEST_CASE("the zero state is a bit-exact fixed point of the stepper") {
  const PlateGrid g = make_grid(16, 16);
  SimConfig cfg = basic_config(0.3, 1.0);
  Simulator sim(cfg, g, ScalarField(g), ScalarField(g));
  for (int i = 0; i < 30; ++i) sim.step();
  CHECK(max_abs(sim.state().u) == 0.0);
  CHECK(max_abs(sim.state().ut) == 0.0);
  CHECK(sim.state().step_index == 30);
}

TEST_CASE("a stationary solution stays put under time stepping") {
  const PlateGrid g = make_grid(16, 16);
  SimConfig cfg = basic_config(0.3, 1.0);
  cfg.p0 = build_field(g, {ModeTerm{1, 1, 0.5}});
  cfg.history_init = HistoryInit::Frozen;

  BiharmonicSolver solver(g);
  const NewtonReport rep = newton_solve(ScalarField(g), cfg, g, solver);
  REQUIRE(rep.converged);

  Simulator sim(cfg, g, rep.u, ScalarField(g));
  const double scale = norm_l2(rep.u);
  for (int i = 0; i < 5; ++i) sim.step();
  CHECK(norm_l2(sim.state().u - rep.u) <= 1e-10 * scale);
  CHECK(norm_l2(sim.state().ut) <= 1e-10 * scale);
}

TEST_CASE("undamped uncoupled linear stepping conserves the plate energy") {
  // with the nonlinearity, damping and flow all off, the scheme reduces to
  // the trapezoidal rule on the linear plate, whose energy is a discrete
  // invariant; the drift over 1000 steps should sit at rounding level
  const PlateGrid g = make_grid(16, 16);
  SimConfig cfg;
  cfg.U = 0.0;
  cfg.k = 0.0;
  cfg.beta = 0.0;
  cfg.kind = Berger{0.0, 0.0};
  cfg.flow_coupling = false;
  cfg.dt = 0.01;
  cfg.aero = AeroParams{0.0, 16, 16};

  const ScalarField u0 = smooth_shape(g, 0.05);
  Simulator sim(cfg, g, u0, ScalarField(g));
  auto energy = [&]() {
    return 0.5 * (inner(sim.state().ut, sim.state().ut) + clamped_elastic_sq(sim.state().u));
  };
  const double e0 = energy();
  REQUIRE(e0 > 0.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    sim.step();
    worst = std::max(worst, std::abs(energy() - e0));
  }
  CHECK(worst <= 1e-8 * e0);
}

TEST_CASE("time stepping is second order in dt") {
  const PlateGrid g = make_grid(16, 16);
  const ScalarField u0 = smooth_shape(g, 0.05);
  const double T = 2.0;

  auto final_u = [&](double dt) {
    SimConfig cfg = basic_config(0.3, 1.0);
    cfg.p0 = build_field(g, {ModeTerm{1, 1, 0.5}});
    cfg.dt = dt;
    cfg.history_init = HistoryInit::Frozen;
    Simulator sim(cfg, g, u0, ScalarField(g));
    const long steps = std::lround(T / dt);
    for (long i = 0; i < steps; ++i) sim.step();
    return sim.state().u;
  };

  const ScalarField ref = final_u(0.0025);
  std::vector<double> errs;
  for (double dt : {0.02, 0.01, 0.005}) {
    errs.push_back(norm_l2(final_u(dt) - ref));
  }
  REQUIRE(errs.back() > 0.0);
  const double overall = std::log2(errs[0] / errs[2]) / 2.0;
  CHECK(overall >= 1.7);
  CHECK(overall <= 2.6);
}

}  // TEST_SUITE

#include <cmath>
#include <random>

#include "doctest.h"
#include "panelflow/fields_synth.hpp"
#include "panelflow/operators.hpp"
#include "panelflow/vonkarman.hpp"
#include "test_support.hpp"

using namespace panelflow;
using pftest::max_abs;
using pftest::max_abs_diff;

namespace {

ScalarField quadratic_x(const PlateGrid& g) {
  ScalarField f(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) f(i, j) = 0.5 * g.x(i) * g.x(i);
  return f;
}

ScalarField quadratic_y(const PlateGrid& g) {
  ScalarField f(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) f(i, j) = 0.5 * g.y(j) * g.y(j);
  return f;
}

}  // namespace

TEST_SUITE("vonkarman") {

TEST_CASE("bracket vanishes against zero and is symmetric in its arguments") {
  const PlateGrid g = make_grid(16, 16);
  std::mt19937 rng(21);
  const ScalarField u = pftest::random_clamped(g, rng);
  const ScalarField w = pftest::random_clamped(g, rng);
  CHECK(max_abs(bracket(u, ScalarField(g))) == 0.0);
  CHECK(max_abs_diff(bracket(u, w), bracket(w, u)) == 0.0);
}

TEST_CASE("bracket of x^2/2 against y^2/2 is one away from the frame") {
  const PlateGrid g = make_grid(24, 24);
  const ScalarField b = bracket(quadratic_x(g), quadratic_y(g));
  // one node in from the frame every stencil sees stored values only, and the
  // quadratics are differenced exactly
  for (int i = 1; i < g.nx - 1; ++i)
    for (int j = 1; j < g.ny - 1; ++j) CHECK(b(i, j) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("airy solve: zero input, certificate, bilinearity, symmetry") {
  const PlateGrid g = make_grid(24, 24);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(31);
  const ScalarField u = pftest::random_clamped(g, rng);
  const ScalarField w1 = pftest::random_clamped(g, rng);
  const ScalarField w2 = pftest::random_clamped(g, rng);

  CHECK(max_abs(airy(ScalarField(g), u, solver)) == 0.0);

  const ScalarField v = airy(u, u, solver);
  const ScalarField residual = biharmonic_clamped(v) + bracket(u, u);
  CHECK(norm_l2(residual) <= 1e-10 * norm_l2(bracket(u, u)));

  const ScalarField split = airy(u, w1, solver) + airy(u, w2, solver);
  const ScalarField joint = airy(u, w1 + w2, solver);
  CHECK(norm_l2(joint - split) <= 1e-8 * (norm_l2(joint) + 1e-30));

  CHECK(norm_l2(airy(u, w1, solver) - airy(w1, u, solver)) <= 1e-12 * norm_l2(airy(u, w1, solver)));
}

TEST_CASE("restoring force: zero state, cubic homogeneity, Berger degeneration") {
  const PlateGrid g = make_grid(20, 20);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(41);
  const ScalarField u = pftest::random_clamped(g, rng);

  const NonlinearityKind vk_prestressed = VonKarman{build_field(g, {CompressionTerm{3.0}})};
  CHECK(max_abs(restoring_force(ScalarField(g), vk_prestressed, solver)) == 0.0);
  CHECK(max_abs(restoring_force(ScalarField(g), Berger{0.7, 0.4}, solver)) == 0.0);

  const NonlinearityKind vk_plain = VonKarman{};
  const ScalarField f1 = restoring_force(u, vk_plain, solver);
  const ScalarField f2 = restoring_force(2.0 * u, vk_plain, solver);
  CHECK(max_abs_diff(f2, 8.0 * f1) <= 1e-12 * max_abs(f2));

  const ScalarField fb = restoring_force(u, Berger{0.7, 0.0}, solver);
  CHECK(max_abs_diff(fb, 0.7 * laplacian(u)) == 0.0);
}

TEST_CASE("restoring jacobian: zero direction, zero linearization at the origin") {
  const PlateGrid g = make_grid(16, 16);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(43);
  const ScalarField u = pftest::random_clamped(g, rng);
  const ScalarField h = pftest::random_clamped(g, rng);
  CHECK(max_abs(restoring_jacobian_apply(u, ScalarField(g), VonKarman{}, solver)) == 0.0);
  CHECK(max_abs(restoring_jacobian_apply(ScalarField(g), h, VonKarman{}, solver)) == 0.0);
}

TEST_CASE("restoring jacobian matches directional finite differences") {
  const PlateGrid g = make_grid(20, 20);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(47);
  const ScalarField u = pftest::random_clamped(g, rng);
  const ScalarField h = pftest::random_clamped(g, rng);

  const NonlinearityKind kinds[] = {NonlinearityKind{VonKarman{build_field(g, {CompressionTerm{2.0}})}},
                                    NonlinearityKind{Berger{0.5, 0.8}}};
  for (const NonlinearityKind& kind : kinds) {
    const ScalarField jac = restoring_jacobian_apply(u, h, kind, solver);
    const double jn = norm_l2(jac);

    // one-sided quotients shrink linearly in eps
    double prev_err = 0.0;
    for (int p = 0; p < 2; ++p) {
      const double eps = p == 0 ? 1e-3 : 1e-4;
      ScalarField fd = restoring_force(u + eps * h, kind, solver);
      fd -= restoring_force(u, kind, solver);
      fd *= 1.0 / eps;
      const double err = norm_l2(fd - jac) / jn;
      if (p == 0) {
        prev_err = err;
      } else {
        CHECK(err <= 0.2 * prev_err);
      }
    }

    // centered quotient at eps = 1e-5: truncation and roundoff both far below 1e-4
    const double eps = 1e-5;
    ScalarField fd = restoring_force(u + eps * h, kind, solver);
    fd -= restoring_force(u - eps * h, kind, solver);
    fd *= 0.5 / eps;
    CHECK(norm_l2(fd - jac) / jn <= 1e-4);
  }
}

TEST_CASE("potential: zero state, nonnegative quartic term, operator form") {
  const PlateGrid g = make_grid(20, 20);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(53);
  const ScalarField u = pftest::random_clamped(g, rng);

  CHECK(potential_pi(ScalarField(g), VonKarman{}, solver) == 0.0);
  const double pi_u = potential_pi(u, VonKarman{}, solver);
  CHECK(pi_u >= 0.0);
  const ScalarField v = airy(u, u, solver);
  CHECK(pi_u == doctest::Approx(0.25 * inner(biharmonic_clamped(v), v)).epsilon(1e-12));
}

TEST_CASE("potential gradient reproduces the restoring force and load") {
  const PlateGrid g = make_grid(24, 24);
  const BiharmonicSolver solver(g);
  std::mt19937 rng(59);
  const ScalarField u = pftest::random_clamped(g, rng, 0.8);
  const ScalarField h = pftest::random_clamped(g, rng, 0.8);
  const ScalarField p = build_field(g, {ModeTerm{1, 1, 0.6}});

  const NonlinearityKind kinds[] = {NonlinearityKind{VonKarman{build_field(g, {CompressionTerm{2.0}})}},
                                    NonlinearityKind{Berger{0.5, 0.8}}};
  for (const NonlinearityKind& kind : kinds) {
    const double eps = 1e-4;
    const double dpi =
        (potential_pi(u + eps * h, kind, solver, &p) - potential_pi(u - eps * h, kind, solver, &p)) /
        (2.0 * eps);
    const ScalarField f = restoring_force(u, kind, solver);
    const double paired = inner(f, h) - inner(p, h);
    CHECK(std::abs(dpi - paired) <= 1e-2 * std::abs(paired));
  }
}

}  // TEST_SUITE

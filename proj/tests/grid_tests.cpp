#include <cmath>
#include <random>

#include "doctest.h"
#include "panelflow/field.hpp"
#include "panelflow/fields_synth.hpp"
#include "test_support.hpp"

using namespace panelflow;
using pftest::max_abs;
using pftest::max_abs_diff;

TEST_SUITE("grid") {

TEST_CASE("make_grid rejects degenerate inputs") {
  CHECK_THROWS_AS(make_grid(2, 16), ValidationError);
  CHECK_THROWS_AS(make_grid(16, 2), ValidationError);
  CHECK_THROWS_AS(make_grid(16, 16, 0.0, 0.0, -1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(make_grid(16, 16, 0.0, 0.0, 1.0, 0.0), ValidationError);
  const PlateGrid g = make_grid(16, 24, 1.0, 2.0, 3.0, 4.0);
  CHECK(g.hx() == doctest::Approx(3.0 / 17.0).epsilon(1e-15));
  CHECK(g.hy() == doctest::Approx(4.0 / 25.0).epsilon(1e-15));
  CHECK(g.x(0) == doctest::Approx(1.0 + 3.0 / 17.0).epsilon(1e-15));
  CHECK(g.diameter() == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("field and grid dimensions must agree") {
  const PlateGrid g = make_grid(8, 8);
  ScalarField::Array wrong = ScalarField::Array::Zero(8, 9);
  CHECK_THROWS_AS(ScalarField(g, wrong), ValidationError);
  const PlateGrid g2 = make_grid(8, 9);
  ScalarField a(g), b(g2);
  CHECK_THROWS_AS(a += b, ValidationError);
}

TEST_CASE("laplacian of the zero field is zero") {
  const ScalarField z(make_grid(12, 12));
  CHECK(max_abs(laplacian(z)) == 0.0);
}

TEST_CASE("laplacian approaches the analytic value at second order") {
  // the sampled sine mode is a discrete eigenfunction, so the interior error
  // is purely the symbol defect and must shrink x4 per grid halving
  double err[3];
  int level = 0;
  for (int n : {16, 32, 64}) {
    const PlateGrid g = make_grid(n, n);
    const ScalarField f = build_field(g, {ModeTerm{1, 1, 1.0}});
    const ScalarField lf = laplacian(f);
    const double pi = 3.14159265358979323846;
    const double lam = -2.0 * pi * pi;
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) worst = std::max(worst, std::abs(lf(i, j) - lam * f(i, j)));
    err[level++] = worst;
  }
  const double slope1 = std::log2(err[0] / err[1]);
  const double slope2 = std::log2(err[1] / err[2]);
  CHECK(slope1 >= 1.9);
  CHECK(slope2 >= 1.9);
}

TEST_CASE("laplacian of an interior spike reproduces the 5-point stencil") {
  const PlateGrid g = make_grid(16, 16);
  ScalarField f(g);
  f(5, 6) = 1.0;
  const ScalarField lf = laplacian(f);
  const double ix = 1.0 / (g.hx() * g.hx());
  const double iy = 1.0 / (g.hy() * g.hy());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      double want = 0.0;
      if (i == 5 && j == 6) want = -2.0 * ix - 2.0 * iy;
      if ((i == 4 || i == 6) && j == 6) want = ix;
      if (i == 5 && (j == 5 || j == 7)) want = iy;
      CHECK(lf(i, j) == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("clamped biharmonic is symmetric and positive on random fields") {
  const PlateGrid g = make_grid(20, 20);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField f = pftest::random_field(g, rng);
    const ScalarField w = pftest::random_field(g, rng);
    const ScalarField bf = biharmonic_clamped(f);
    const ScalarField bw = biharmonic_clamped(w);
    const double lhs = inner(bf, w);
    const double rhs = inner(f, bw);
    const double scale = norm_l2(bf) * norm_l2(w) + norm_l2(f) * norm_l2(bw);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
    CHECK(inner(bf, f) > 0.0);
  }
  CHECK(max_abs(biharmonic_clamped(ScalarField(g))) == 0.0);
}

TEST_CASE("derivatives of zero vanish and the cross derivative is exact on x*y") {
  const PlateGrid g = make_grid(16, 16);
  const Derivs dz = derivatives(ScalarField(g));
  CHECK(max_abs(dz.fx) == 0.0);
  CHECK(max_abs(dz.fxy) == 0.0);

  ScalarField f(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) f(i, j) = g.x(i) * g.y(j);
  const Derivs d = derivatives(f);
  // away from the zero ring the centered cross stencil is exact on x*y
  for (int i = 1; i < g.nx - 1; ++i)
    for (int j = 1; j < g.ny - 1; ++j) CHECK(d.fxy(i, j) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("x-derivative of an x-even field is x-odd") {
  const PlateGrid g = make_grid(17, 12);
  std::mt19937 rng(11);
  ScalarField raw = pftest::random_field(g, rng);
  ScalarField f(g);  // symmetrize so the input is x-even bit-exactly
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) f(i, j) = 0.5 * (raw(i, j) + raw(g.nx - 1 - i, j));
  const Derivs d = derivatives(f);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) CHECK(d.fx(i, j) == -d.fx(g.nx - 1 - i, j));
}

TEST_CASE("extension by zero: nodes, cell centers, and the exterior") {
  const PlateGrid g = make_grid(10, 10);
  std::mt19937 rng(3);
  const ScalarField f = pftest::random_field(g, rng);

  CHECK(eval_extended(f, g.x(3), g.y(4)) == f(3, 4));
  const double cx = 0.5 * (g.x(2) + g.x(3));
  const double cy = 0.5 * (g.y(5) + g.y(6));
  const double avg = 0.25 * (f(2, 5) + f(2, 6) + f(3, 5) + f(3, 6));
  CHECK(eval_extended(f, cx, cy) == doctest::Approx(avg).epsilon(1e-14));

  CHECK(eval_extended(f, g.x0 - 0.01, 0.5) == 0.0);
  CHECK(eval_extended(f, g.x0 + g.Lx + 0.01, 0.5) == 0.0);
  CHECK(eval_extended(f, 0.5, g.y0 - 1.0) == 0.0);
  CHECK(eval_extended(f, 0.5, g.y0 + g.Ly + 1e-9) == 0.0);
  // tapers through the boundary cell: the interpolant at the frame is 0
  CHECK(eval_extended(f, g.x0 + g.Lx, 0.5) == 0.0);
}

TEST_CASE("inner products: quadrature, Cauchy-Schwarz, induced norms") {
  std::mt19937 rng(5);
  double defect_prev = 1.0;
  for (int n : {24, 48}) {
    const PlateGrid g = make_grid(n, n);
    ScalarField one(g);
    one.values().setConstant(1.0);
    const double mass = norm_l2(one) * norm_l2(one);
    const double defect = std::abs(mass - g.Lx * g.Ly);
    CHECK(defect <= 2.1 * (g.hx() + g.hy()));  // node-cell rule misses a frame strip
    CHECK(defect < defect_prev);
    defect_prev = defect;
  }

  const PlateGrid g = make_grid(16, 16);
  const ScalarField f = pftest::random_field(g, rng);
  const ScalarField w = pftest::random_field(g, rng);
  CHECK(inner(f, ScalarField(g)) == 0.0);
  CHECK(inner(f, w) * inner(f, w) <=
        norm_l2(f) * norm_l2(f) * norm_l2(w) * norm_l2(w) * (1.0 + 1e-12));
  CHECK(norm_h2(f) == doctest::Approx(norm_l2(laplacian(f))).epsilon(1e-15));
  CHECK_THROWS_AS(inner(f, ScalarField(make_grid(8, 8))), ValidationError);
}

}  // TEST_SUITE

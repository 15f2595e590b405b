#include "panelflow/fields_synth.hpp"

#include <cmath>

#include "panelflow/errors.hpp"

namespace panelflow {

namespace {

void add_mode(ScalarField& f, const ModeTerm& t) {
  const PlateGrid& g = f.grid();
  if (t.m <= 0 || t.n <= 0) throw ValidationError("mode term needs positive mode numbers");
  const double wx = t.m * M_PI / g.Lx;
  const double wy = t.n * M_PI / g.Ly;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      f(i, j) += t.amplitude * std::sin(wx * (g.x(i) - g.x0)) * std::sin(wy * (g.y(j) - g.y0));
}

void add_bump(ScalarField& f, const BumpTerm& t) {
  const PlateGrid& g = f.grid();
  if (t.radius <= 0.0) throw ValidationError("bump term needs a positive radius");
  const double cx = g.x0 + t.cx * g.Lx;
  const double cy = g.y0 + t.cy * g.Ly;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double dx = (g.x(i) - cx) / t.radius;
      const double dy = (g.y(j) - cy) / t.radius;
      const double r2 = dx * dx + dy * dy;
      if (r2 < 1.0) f(i, j) += t.amplitude * std::exp(1.0 - 1.0 / (1.0 - r2));
    }
}

void add_gauss(ScalarField& f, const GaussTerm& t) {
  const PlateGrid& g = f.grid();
  if (t.sigma <= 0.0) throw ValidationError("gauss term needs a positive sigma");
  const double cx = g.x0 + t.cx * g.Lx;
  const double cy = g.y0 + t.cy * g.Ly;
  const double inv = 1.0 / (2.0 * t.sigma * t.sigma);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double dx = g.x(i) - cx;
      const double dy = g.y(j) - cy;
      f(i, j) += t.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
    }
}

void add_compression(ScalarField& f, const CompressionTerm& t) {
  const PlateGrid& g = f.grid();
  const double yc = g.y0 + 0.5 * g.Ly;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double dy = g.y(j) - yc;
      f(i, j) += -0.5 * t.gamma * dy * dy;
    }
}

void add_constant(ScalarField& f, const ConstantTerm& t) { f.values() += t.value; }

}  // namespace

ScalarField build_field(const PlateGrid& grid, const std::vector<FieldTerm>& terms) {
  ScalarField f(grid);
  for (const FieldTerm& term : terms)
    std::visit(
        [&f](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ModeTerm>)
            add_mode(f, t);
          else if constexpr (std::is_same_v<T, BumpTerm>)
            add_bump(f, t);
          else if constexpr (std::is_same_v<T, GaussTerm>)
            add_gauss(f, t);
          else if constexpr (std::is_same_v<T, CompressionTerm>)
            add_compression(f, t);
          else
            add_constant(f, t);
        },
        term);
  return f;
}

}  // namespace panelflow

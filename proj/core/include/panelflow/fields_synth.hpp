#pragma once

// Named analytic field families for synthesizing loads, prestress potentials,
// and initial data on a plate grid. A field is described as a sum of terms;
// manifests carry the same term lists in their load/prestress/initial
// sections, so every experiment input is reproducible from text.
//
// Centers (cx, cy) are fractions of the extents: the physical center is
// (x0 + cx*Lx, y0 + cy*Ly). Radii and widths are absolute lengths.

#include <variant>
#include <vector>

#include "panelflow/field.hpp"

namespace panelflow {

// amplitude * sin(m pi (x-x0)/Lx) * sin(n pi (y-y0)/Ly). Vanishes on the
// frame but carries a nonzero normal slope, so it is a natural load shape
// and a deliberately rough choice for initial displacements.
struct ModeTerm {
  int m = 1;
  int n = 1;
  double amplitude = 1.0;
  bool operator==(const ModeTerm&) const = default;
};

// C^infinity compactly supported bump: amplitude * exp(1 - 1/(1 - r^2)) for
// r < 1 with r the distance from the center in units of radius. Zero value
// and zero slope on the frame whenever the support stays inside.
struct BumpTerm {
  double amplitude = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  double radius = 0.35;
  bool operator==(const BumpTerm&) const = default;
};

// Gaussian amplitude * exp(-r^2 / (2 sigma^2)); not compactly supported but
// negligible on the frame for sigma well under the extents.
struct GaussTerm {
  double amplitude = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  double sigma = 0.15;
  bool operator==(const GaussTerm&) const = default;
};

// Uniform in-plane compression of strength gamma along x, encoded through
// the prestress potential F0 = -gamma*(y - yc)^2/2 about the domain center.
// Only the constant curvature F0_yy = -gamma enters the bracket, adding
// +gamma*u_xx to the restoring force; the plate buckles once gamma passes
// min ||lap u||^2 / ||u_x||^2 over clamped fields.
struct CompressionTerm {
  double gamma = 0.0;
  bool operator==(const CompressionTerm&) const = default;
};

// Constant offset; not clamped-compatible, mostly for prestress and tests.
struct ConstantTerm {
  double value = 0.0;
  bool operator==(const ConstantTerm&) const = default;
};

using FieldTerm = std::variant<ModeTerm, BumpTerm, GaussTerm, CompressionTerm, ConstantTerm>;

// Sum of the terms sampled at the interior nodes; empty list = zero field.
// Throws ValidationError on nonpositive mode numbers, radii, or widths.
ScalarField build_field(const PlateGrid& grid, const std::vector<FieldTerm>& terms);

}  // namespace panelflow

#pragma once

// Uniform interior grid on a rectangle and scalar fields living on it,
// together with the clamped-plate difference operators.
//
// Conventions used throughout the library:
//   * The rectangle is [x0, x0+Lx] x [y0, y0+Ly]. Only interior nodes are
//     stored; the boundary ring carries the homogeneous Dirichlet value 0.
//   * Clamped conditions (value and normal derivative both zero) enter the
//     composed biharmonic through ghost reflection across the edge.
//   * Quadrature for inner products is the node-cell rule hx*hy*sum.

#include <cmath>

#include <Eigen/Dense>

#include "panelflow/errors.hpp"

namespace panelflow {

struct PlateGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double Lx = 1.0;
  double Ly = 1.0;
  int nx = 0;  // interior nodes in x
  int ny = 0;  // interior nodes in y

  double hx() const { return Lx / (nx + 1); }
  double hy() const { return Ly / (ny + 1); }
  double x(int i) const { return x0 + (i + 1) * hx(); }  // interior node coordinate
  double y(int j) const { return y0 + (j + 1) * hy(); }
  double diameter() const { return std::hypot(Lx, Ly); }
  long size() const { return static_cast<long>(nx) * ny; }

  bool operator==(const PlateGrid&) const = default;
};

// Validates extents and resolution; throws ValidationError on bad input.
PlateGrid make_grid(int nx, int ny, double x0 = 0.0, double y0 = 0.0, double Lx = 1.0,
                    double Ly = 1.0);

class ScalarField {
public:
  // Row-major layout: index (i, j) with i along x (slow) and j along y (fast).
  using Array = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ScalarField() = default;
  explicit ScalarField(const PlateGrid& grid) : grid_(grid), v_(Array::Zero(grid.nx, grid.ny)) {}
  ScalarField(const PlateGrid& grid, Array values);

  const PlateGrid& grid() const { return grid_; }
  bool empty() const { return v_.size() == 0; }

  double operator()(int i, int j) const { return v_(i, j); }
  double& operator()(int i, int j) { return v_(i, j); }

  const Array& values() const { return v_; }
  Array& values() { return v_; }

  // Flat views in row-major node order (i*ny + j), for sparse solves.
  Eigen::Map<const Eigen::VectorXd> flat() const {
    return Eigen::Map<const Eigen::VectorXd>(v_.data(), v_.size());
  }
  Eigen::Map<Eigen::VectorXd> flat() {
    return Eigen::Map<Eigen::VectorXd>(v_.data(), v_.size());
  }

  bool all_finite() const { return v_.isFinite().all(); }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double a);

private:
  PlateGrid grid_;
  Array v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double a, ScalarField f);

// Throws ValidationError unless both fields live on the same grid.
void require_same_grid(const ScalarField& a, const ScalarField& b, const char* where);

// First and second centered differences with the zero boundary ring.
struct Derivs {
  ScalarField fx, fy, fxx, fxy, fyy;
};

// 5-point Laplacian of a field that vanishes on the boundary ring.
ScalarField laplacian(const ScalarField& f);

// Clamped 13-point biharmonic: Laplacian composed with itself plus the
// ghost-reflection correction 2/h^4 on the first interior ring (the discrete
// imprint of the zero normal derivative).
ScalarField biharmonic_clamped(const ScalarField& f);

Derivs derivatives(const ScalarField& f);

// Bilinear interpolation of the zero-extended field: the boundary ring holds
// 0, so the interpolant tapers to zero across the outermost cell; points
// outside the closed rectangle evaluate to exactly 0.
double eval_extended(const ScalarField& f, double px, double py);

// Second derivatives without any boundary assumption: centered stencils in
// the interior, second-order one-sided stencils at the edges. Exact for
// quadratic polynomials. Used for in-plane prestress fields, which do not
// vanish on the frame, where the zero-ring stencils would be wrong.
struct Curvature {
  ScalarField fxx, fxy, fyy;
};
Curvature curvature_unclamped(const ScalarField& f);

// Node-cell quadrature hx*hy*sum(f*g) and the induced norms.
double inner(const ScalarField& f, const ScalarField& g);
double norm_l2(const ScalarField& f);
// H2-equivalent norm for clamped fields: the L2 norm of the discrete Laplacian.
double norm_h2(const ScalarField& f);

}  // namespace panelflow

#include "panelflow/field.hpp"

#include <string>
#include <vector>

namespace panelflow {

PlateGrid make_grid(int nx, int ny, double x0, double y0, double Lx, double Ly) {
  if (nx < 3 || ny < 3) {
    throw ValidationError("grid must have at least 3 interior nodes per direction, got " +
                          std::to_string(nx) + "x" + std::to_string(ny));
  }
  if (!(Lx > 0.0) || !(Ly > 0.0)) {
    throw ValidationError("grid extents must be positive");
  }
  PlateGrid g;
  g.x0 = x0;
  g.y0 = y0;
  g.Lx = Lx;
  g.Ly = Ly;
  g.nx = nx;
  g.ny = ny;
  return g;
}

ScalarField::ScalarField(const PlateGrid& grid, Array values) : grid_(grid), v_(std::move(values)) {
  if (v_.rows() != grid_.nx || v_.cols() != grid_.ny) {
    throw ValidationError("field values shape does not match grid");
  }
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* where) {
  if (!(a.grid() == b.grid())) {
    throw ValidationError(std::string(where) + ": fields live on different grids");
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(*this, o, "operator+=");
  v_ += o.v_;
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(*this, o, "operator-=");
  v_ -= o.v_;
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  v_ *= a;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) {
  a += b;
  return a;
}

ScalarField operator-(ScalarField a, const ScalarField& b) {
  a -= b;
  return a;
}

ScalarField operator*(double a, ScalarField f) {
  f *= a;
  return f;
}

namespace {

// Value at (i, j) treating anything on or beyond the boundary ring as 0.
inline double at0(const ScalarField::Array& v, int i, int j, int nx, int ny) {
  if (i < 0 || i >= nx || j < 0 || j >= ny) return 0.0;
  return v(i, j);
}

}  // namespace

ScalarField laplacian(const ScalarField& f) {
  const PlateGrid& g = f.grid();
  const int nx = g.nx, ny = g.ny;
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const auto& v = f.values();
  ScalarField out(g);
  auto& o = out.values();
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double c = v(i, j);
      const double xm = (i > 0) ? v(i - 1, j) : 0.0;
      const double xp = (i + 1 < nx) ? v(i + 1, j) : 0.0;
      const double ym = (j > 0) ? v(i, j - 1) : 0.0;
      const double yp = (j + 1 < ny) ? v(i, j + 1) : 0.0;
      o(i, j) = (xm - 2.0 * c + xp) * ihx2 + (ym - 2.0 * c + yp) * ihy2;
    }
  }
  return out;
}

ScalarField biharmonic_clamped(const ScalarField& f) {
  // Composing the 5-point Laplacian with itself uses a ghost value one node
  // outside the rectangle. The zero-slope clamped condition reflects the first
  // interior value there (ghost = +u_1 with u_0 = 0 on the edge), which adds
  // 2/h^4 * u on the first interior ring relative to plain zero extension.
  const PlateGrid& g = f.grid();
  const int nx = g.nx, ny = g.ny;
  const double hx4 = std::pow(g.hx(), 4);
  const double hy4 = std::pow(g.hy(), 4);
  ScalarField out = laplacian(laplacian(f));
  auto& o = out.values();
  const auto& v = f.values();
  for (int j = 0; j < ny; ++j) {
    o(0, j) += 2.0 / hx4 * v(0, j);
    o(nx - 1, j) += 2.0 / hx4 * v(nx - 1, j);
  }
  for (int i = 0; i < nx; ++i) {
    o(i, 0) += 2.0 / hy4 * v(i, 0);
    o(i, ny - 1) += 2.0 / hy4 * v(i, ny - 1);
  }
  return out;
}

Derivs derivatives(const ScalarField& f) {
  const PlateGrid& g = f.grid();
  const int nx = g.nx, ny = g.ny;
  const double i2hx = 0.5 / g.hx();
  const double i2hy = 0.5 / g.hy();
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const double i4hxy = 0.25 / (g.hx() * g.hy());
  const auto& v = f.values();
  Derivs d{ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g), ScalarField(g)};
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double c = v(i, j);
      const double xm = at0(v, i - 1, j, nx, ny);
      const double xp = at0(v, i + 1, j, nx, ny);
      const double ym = at0(v, i, j - 1, nx, ny);
      const double yp = at0(v, i, j + 1, nx, ny);
      d.fx(i, j) = (xp - xm) * i2hx;
      d.fy(i, j) = (yp - ym) * i2hy;
      d.fxx(i, j) = (xm - 2.0 * c + xp) * ihx2;
      d.fyy(i, j) = (ym - 2.0 * c + yp) * ihy2;
      d.fxy(i, j) = (at0(v, i + 1, j + 1, nx, ny) - at0(v, i + 1, j - 1, nx, ny) -
                     at0(v, i - 1, j + 1, nx, ny) + at0(v, i - 1, j - 1, nx, ny)) *
                    i4hxy;
    }
  }
  return d;
}

double eval_extended(const ScalarField& f, double px, double py) {
  const PlateGrid& g = f.grid();
  // Grid coordinates of the full node lattice including the boundary ring:
  // xi in [0, nx+1], eta in [0, ny+1], interior node i at xi = i+1.
  const double xi = (px - g.x0) / g.hx();
  const double eta = (py - g.y0) / g.hy();
  if (xi < 0.0 || xi > g.nx + 1 || eta < 0.0 || eta > g.ny + 1) return 0.0;
  int ci = static_cast<int>(std::floor(xi));
  int cj = static_cast<int>(std::floor(eta));
  // Clamp so the right/top boundary evaluates through the last cell.
  if (ci > g.nx) ci = g.nx;
  if (cj > g.ny) cj = g.ny;
  const double tx = xi - ci;
  const double ty = eta - cj;
  const auto& v = f.values();
  // Cell corners in full-lattice indices map to interior index k-1.
  const double v00 = at0(v, ci - 1, cj - 1, g.nx, g.ny);
  const double v10 = at0(v, ci, cj - 1, g.nx, g.ny);
  const double v01 = at0(v, ci - 1, cj, g.nx, g.ny);
  const double v11 = at0(v, ci, cj, g.nx, g.ny);
  return (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10 + (1.0 - tx) * ty * v01 +
         tx * ty * v11;
}

namespace {

// One row/column of second differences with one-sided ends; n >= 3.
// For n == 3 the one-sided value falls back to the centered value at the
// middle node, which is still exact for quadratics.
inline double d2_line(const double* v, int n, int k, double ih2) {
  if (k == 0) {
    if (n >= 4) return (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) * ih2;
    return (v[0] - 2.0 * v[1] + v[2]) * ih2;
  }
  if (k == n - 1) {
    if (n >= 4) return (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) * ih2;
    return (v[n - 1] - 2.0 * v[n - 2] + v[n - 3]) * ih2;
  }
  return (v[k - 1] - 2.0 * v[k] + v[k + 1]) * ih2;
}

inline double d1_line(const double* v, int n, int k, double i2h) {
  if (k == 0) return (-3.0 * v[0] + 4.0 * v[1] - v[2]) * i2h;
  if (k == n - 1) return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * i2h;
  return (v[k + 1] - v[k - 1]) * i2h;
}

}  // namespace

Curvature curvature_unclamped(const ScalarField& f) {
  const PlateGrid& g = f.grid();
  const int nx = g.nx, ny = g.ny;
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  const double i2hx = 0.5 / g.hx();
  const double i2hy = 0.5 / g.hy();
  const auto& v = f.values();
  Curvature c{ScalarField(g), ScalarField(g), ScalarField(g)};
  std::vector<double> col(nx), dy(static_cast<size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    const double* row = &v(i, 0);  // contiguous in j (row-major)
    for (int j = 0; j < ny; ++j) {
      c.fyy(i, j) = d2_line(row, ny, j, ihy2);
      dy[static_cast<size_t>(i) * ny + j] = d1_line(row, ny, j, i2hy);
    }
  }
  std::vector<double> colv(nx);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) col[i] = v(i, j);
    for (int i = 0; i < nx; ++i) colv[i] = dy[static_cast<size_t>(i) * ny + j];
    for (int i = 0; i < nx; ++i) {
      c.fxx(i, j) = d2_line(col.data(), nx, i, ihx2);
      c.fxy(i, j) = d1_line(colv.data(), nx, i, i2hx);
    }
  }
  return c;
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g, "inner");
  return f.grid().hx() * f.grid().hy() * (f.values() * g.values()).sum();
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double norm_h2(const ScalarField& f) { return norm_l2(laplacian(f)); }

}  // namespace panelflow

#include "panelflow/operators.hpp"

#include <string>
#include <vector>

namespace panelflow {

SparseMat laplacian_matrix(const PlateGrid& g) {
  const int nx = g.nx, ny = g.ny;
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(5) * nx * ny);
  auto idx = [ny](int i, int j) { return i * ny + j; };
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const int c = idx(i, j);
      trips.emplace_back(c, c, -2.0 * ihx2 - 2.0 * ihy2);
      if (i > 0) trips.emplace_back(c, idx(i - 1, j), ihx2);
      if (i + 1 < nx) trips.emplace_back(c, idx(i + 1, j), ihx2);
      if (j > 0) trips.emplace_back(c, idx(i, j - 1), ihy2);
      if (j + 1 < ny) trips.emplace_back(c, idx(i, j + 1), ihy2);
    }
  }
  SparseMat L(nx * ny, nx * ny);
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();
  return L;
}

SparseMat biharmonic_matrix(const PlateGrid& g) {
  const SparseMat L = laplacian_matrix(g);
  SparseMat B = (L * L).pruned();
  const int nx = g.nx, ny = g.ny;
  const double rx = 2.0 / std::pow(g.hx(), 4);
  const double ry = 2.0 / std::pow(g.hy(), 4);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(2) * (nx + ny));
  auto idx = [ny](int i, int j) { return i * ny + j; };
  for (int j = 0; j < ny; ++j) {
    trips.emplace_back(idx(0, j), idx(0, j), rx);
    trips.emplace_back(idx(nx - 1, j), idx(nx - 1, j), rx);
  }
  for (int i = 0; i < nx; ++i) {
    trips.emplace_back(idx(i, 0), idx(i, 0), ry);
    trips.emplace_back(idx(i, ny - 1), idx(i, ny - 1), ry);
  }
  SparseMat R(nx * ny, nx * ny);
  R.setFromTriplets(trips.begin(), trips.end());
  B += R;
  B.makeCompressed();
  return B;
}

BiharmonicSolver::BiharmonicSolver(const PlateGrid& grid)
    : grid_(grid), B_(biharmonic_matrix(grid)) {
  ldlt_.compute(B_);
  if (ldlt_.info() != Eigen::Success) {
    throw NumericalError("biharmonic factorization failed on grid " + std::to_string(grid.nx) +
                         "x" + std::to_string(grid.ny));
  }
  min_pivot_ = ldlt_.vectorD().minCoeff();
  if (!(min_pivot_ > 0.0)) {
    throw NumericalError("biharmonic operator lost positive definiteness (min pivot " +
                         std::to_string(min_pivot_) + ")");
  }
}

ScalarField BiharmonicSolver::solve(const ScalarField& rhs) const {
  if (!(rhs.grid() == grid_)) {
    throw ValidationError("BiharmonicSolver::solve: rhs grid does not match factorization grid");
  }
  ScalarField out(grid_);
  out.flat() = ldlt_.solve(rhs.flat());
  return out;
}

Eigen::VectorXd BiharmonicSolver::solve_flat(const Eigen::VectorXd& rhs) const {
  return ldlt_.solve(rhs);
}

}  // namespace panelflow

#pragma once

// Assembled sparse forms of the clamped-plate operators and the shared
// biharmonic factorization. One factorization per grid is computed up front
// and reused by every Airy stress solve and as the Newton preconditioner.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "panelflow/field.hpp"

namespace panelflow {

using SparseMat = Eigen::SparseMatrix<double>;

// 5-point Laplacian on interior nodes with zero Dirichlet ring,
// row-major node order (i*ny + j). Symmetric negative definite.
SparseMat laplacian_matrix(const PlateGrid& g);

// Clamped biharmonic: Laplacian squared plus the ghost-reflection diagonal
// 2/h^4 on the first interior ring. Symmetric positive definite; agrees with
// biharmonic_clamped applied matrix-free.
SparseMat biharmonic_matrix(const PlateGrid& g);

class BiharmonicSolver {
public:
  explicit BiharmonicSolver(const PlateGrid& grid);

  const PlateGrid& grid() const { return grid_; }
  const SparseMat& matrix() const { return B_; }

  // Direct solve of biharmonic_clamped(v) = rhs. Const and safe to call from
  // several threads: the factorization is only read.
  ScalarField solve(const ScalarField& rhs) const;
  Eigen::VectorXd solve_flat(const Eigen::VectorXd& rhs) const;

  // Smallest LDLT pivot; positive iff the assembled operator is positive
  // definite on this grid.
  double min_pivot() const { return min_pivot_; }

private:
  PlateGrid grid_;
  SparseMat B_;
  Eigen::SimplicialLDLT<SparseMat> ldlt_;
  double min_pivot_ = 0.0;
};

}  // namespace panelflow

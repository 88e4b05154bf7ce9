#pragma once

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "viscoflow/mesh.hpp"

namespace viscoflow {

/// Compressed row storage; column indices are sorted and unique per row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;
using Triplets = std::vector<Triplet>;

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sums duplicates, keeps explicit zeros. Throws std::invalid_argument on
/// out-of-range indices.
SparseMatrix csr_from_triplets(Index n, const Triplets& triplets);

/// Groups of unknowns that are eliminated block by block before the sparse
/// factorization. The matrix may couple two different groups only through
/// unknowns outside every group.
using LocalBlocks = std::vector<std::vector<Index>>;

/// Sparse LU with partial pivoting and a fill-reducing column ordering.
///
/// With local blocks set, each block is factorized densely (partial
/// pivoting) and the sparse LU runs on the Schur complement of the remaining
/// unknowns. The symbolic analysis is kept across factorize() calls as long
/// as the sparsity pattern (size and nonzero count) does not change.
class DirectSolver {
 public:
  DirectSolver();
  explicit DirectSolver(LocalBlocks blocks);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  /// Throws SingularMatrixError on non-finite entries, a failed sparse
  /// factorization, or a dense block pivot below kPivotFloor * max|A|.
  void factorize(const SparseMatrix& a);

  /// Solves with one pass of iterative refinement when the first residual
  /// misses the target. Throws SingularMatrixError if the bound still fails.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  static constexpr double kResidualTarget = 1e-10;
  static constexpr double kPivotFloor = 1e-14;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd direct_solve(const SparseMatrix& a, const Eigen::VectorXd& b, LocalBlocks blocks = {});

/// MatrixMarket coordinate real general.
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

}  // namespace viscoflow

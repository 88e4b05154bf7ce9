#include "viscoflow/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <tuple>

#include <Eigen/LU>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace viscoflow {

SparseMatrix csr_from_triplets(Index n, const Triplets& triplets) {
  if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= n || t.col() < 0 || t.col() >= n)
      throw std::invalid_argument("triplet index out of range");
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

namespace {

// One eliminated block: its dense LU, the coupling to the kept unknowns and
// the block inverse applied to that coupling.
struct Block {
  std::vector<Index> dofs;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  std::vector<Index> kept_cols;  // reduced indices coupled from the block rows
  Eigen::MatrixXd inv_coupling;  // block^{-1} * A(block, kept_cols)
  // (block slot, reduced row, value) of A(kept, block)
  std::vector<std::tuple<int, Index, double>> kept_rows;
};

}  // namespace

struct DirectSolver::Impl {
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu;
  SparseMatrix a;
  ColMatrix reduced_matrix;
  Index analyzed_rows = -1;
  Index analyzed_nnz = -1;

  LocalBlocks groups;
  std::vector<Block> blocks;
  std::vector<Index> owner;    // block of each unknown, -1 if kept
  std::vector<int> slot;       // position inside the owning block
  std::vector<Index> reduced;  // index among kept unknowns, -1 if eliminated
  std::vector<Index> kept;     // global index of each kept unknown

  void setup_partition(Index n) {
    if (static_cast<Index>(owner.size()) == n) return;
    owner.assign(n, -1);
    slot.assign(n, -1);
    blocks.assign(groups.size(), Block{});
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t k = 0; k < groups[g].size(); ++k) {
        const Index d = groups[g][k];
        if (d < 0 || d >= n) throw std::invalid_argument("local block index out of range");
        if (owner[d] >= 0) throw std::invalid_argument("local blocks overlap");
        owner[d] = static_cast<Index>(g);
        slot[d] = static_cast<int>(k);
      }
      blocks[g].dofs = groups[g];
    }
    reduced.assign(n, -1);
    kept.clear();
    for (Index i = 0; i < n; ++i) {
      if (owner[i] >= 0) continue;
      reduced[i] = static_cast<Index>(kept.size());
      kept.push_back(i);
    }
    if (kept.empty()) throw std::invalid_argument("local blocks cover every unknown");
  }

  void condense(double pivot_threshold) {
    const Index n = a.rows();
    std::vector<Eigen::MatrixXd> dense(blocks.size());
    for (std::size_t g = 0; g < blocks.size(); ++g) {
      const auto m = static_cast<Index>(blocks[g].dofs.size());
      dense[g] = Eigen::MatrixXd::Zero(m, m);
      blocks[g].kept_cols.clear();
      blocks[g].kept_rows.clear();
    }
    std::vector<std::vector<std::tuple<int, Index, double>>> block_to_kept(blocks.size());
    Triplets schur;
    schur.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (Index i = 0; i < n; ++i) {
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
        const Index j = it.col();
        const Index gi = owner[i], gj = owner[j];
        if (gi >= 0 && gj >= 0) {
          if (gi != gj) throw std::invalid_argument("local blocks are coupled to each other");
          dense[gi](slot[i], slot[j]) += it.value();
        } else if (gi >= 0) {
          block_to_kept[gi].emplace_back(slot[i], reduced[j], it.value());
        } else if (gj >= 0) {
          blocks[gj].kept_rows.emplace_back(slot[j], reduced[i], it.value());
        } else {
          schur.emplace_back(static_cast<int>(reduced[i]), static_cast<int>(reduced[j]), it.value());
        }
      }
    }
    for (std::size_t g = 0; g < blocks.size(); ++g) {
      Block& b = blocks[g];
      b.lu.compute(dense[g]);
      const double min_pivot = b.lu.matrixLU().diagonal().cwiseAbs().minCoeff();
      if (!(min_pivot > pivot_threshold))
        throw SingularMatrixError("local block " + std::to_string(g) + " is singular");
      for (const auto& [s, col, v] : block_to_kept[g]) b.kept_cols.push_back(col);
      std::sort(b.kept_cols.begin(), b.kept_cols.end());
      b.kept_cols.erase(std::unique(b.kept_cols.begin(), b.kept_cols.end()), b.kept_cols.end());
      Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(dense[g].rows(), static_cast<Index>(b.kept_cols.size()));
      for (const auto& [s, col, v] : block_to_kept[g]) {
        const auto k = std::lower_bound(b.kept_cols.begin(), b.kept_cols.end(), col) - b.kept_cols.begin();
        coupling(s, k) += v;
      }
      b.inv_coupling = b.lu.solve(coupling);
      for (const auto& [s, row, v] : b.kept_rows) {
        for (std::size_t k = 0; k < b.kept_cols.size(); ++k)
          schur.emplace_back(static_cast<int>(row), static_cast<int>(b.kept_cols[k]), -v * b.inv_coupling(s, k));
      }
    }
    const auto m = static_cast<Index>(kept.size());
    reduced_matrix.resize(m, m);
    reduced_matrix.setFromTriplets(schur.begin(), schur.end());
    reduced_matrix.makeCompressed();
  }

  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& b) const {
    if (blocks.empty()) return lu.solve(b);
    Eigen::VectorXd rhs(static_cast<Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) rhs[k] = b[kept[k]];
    std::vector<Eigen::VectorXd> local(blocks.size());
    for (std::size_t g = 0; g < blocks.size(); ++g) {
      const Block& blk = blocks[g];
      Eigen::VectorXd bl(static_cast<Index>(blk.dofs.size()));
      for (std::size_t k = 0; k < blk.dofs.size(); ++k) bl[k] = b[blk.dofs[k]];
      local[g] = blk.lu.solve(bl);
      for (const auto& [s, row, v] : blk.kept_rows) rhs[row] -= v * local[g][s];
    }
    const Eigen::VectorXd y = lu.solve(rhs);
    Eigen::VectorXd x(b.size());
    for (std::size_t k = 0; k < kept.size(); ++k) x[kept[k]] = y[k];
    for (std::size_t g = 0; g < blocks.size(); ++g) {
      const Block& blk = blocks[g];
      Eigen::VectorXd xl = local[g];
      for (std::size_t k = 0; k < blk.kept_cols.size(); ++k) xl -= blk.inv_coupling.col(k) * y[blk.kept_cols[k]];
      for (std::size_t k = 0; k < blk.dofs.size(); ++k) x[blk.dofs[k]] = xl[k];
    }
    return x;
  }
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::DirectSolver(LocalBlocks blocks) : impl_(std::make_unique<Impl>()) {
  impl_->groups = std::move(blocks);
}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

void DirectSolver::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) throw std::invalid_argument("direct solve needs a square matrix");
  Impl& s = *impl_;
  s.a = a;
  s.a.makeCompressed();
  double max_abs = 0.0;
  for (Index k = 0; k < s.a.nonZeros(); ++k) {
    const double v = s.a.valuePtr()[k];
    if (!std::isfinite(v)) throw SingularMatrixError("matrix has non-finite entries");
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (s.groups.empty()) {
    s.reduced_matrix = s.a;
  } else {
    s.setup_partition(a.rows());
    s.condense(kPivotFloor * max_abs);
  }
  if (s.analyzed_rows != s.reduced_matrix.rows() || s.analyzed_nnz != s.reduced_matrix.nonZeros()) {
    s.lu.analyzePattern(s.reduced_matrix);
    s.analyzed_rows = s.reduced_matrix.rows();
    s.analyzed_nnz = s.reduced_matrix.nonZeros();
  }
  s.lu.factorize(s.reduced_matrix);
  if (s.lu.info() != Eigen::Success) {
    s.analyzed_rows = -1;
    throw SingularMatrixError("sparse LU failed: " + s.lu.lastErrorMessage());
  }
}

Eigen::VectorXd DirectSolver::solve(const Eigen::VectorXd& b) const {
  if (b.size() != impl_->a.rows()) throw std::invalid_argument("right-hand side size mismatch");
  const double b_norm = std::max(b.norm(), 1e-30);
  Eigen::VectorXd x = impl_->apply_inverse(b);
  Eigen::VectorXd r = b - impl_->a * x;
  if (!(r.norm() / b_norm <= kResidualTarget)) {
    x += impl_->apply_inverse(r);
    r = b - impl_->a * x;
  }
  const double rel = r.norm() / b_norm;
  if (!std::isfinite(rel) || !x.allFinite()) throw SingularMatrixError("sparse LU produced non-finite solution");
  if (rel > kResidualTarget)
    throw SingularMatrixError("sparse LU residual " + std::to_string(rel) + " exceeds target");
  return x;
}

Eigen::VectorXd direct_solve(const SparseMatrix& a, const Eigen::VectorXd& b, LocalBlocks blocks) {
  DirectSolver solver(std::move(blocks));
  solver.factorize(a);
  return solver.solve(b);
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out.precision(17);
  for (int r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) out << r + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  }
}

}  // namespace viscoflow

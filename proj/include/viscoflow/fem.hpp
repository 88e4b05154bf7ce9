#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "viscoflow/mesh.hpp"

namespace viscoflow {

/// Symmetric rule on the reference triangle {(0,0), (1,0), (0,1)}.
/// Barycentric coordinates are ordered (b0, b1, b2) with the reference point
/// (x, y) = (b1, b2). Weights sum to the reference area 1/2.
struct QuadratureRule {
  int degree = 0;
  std::vector<Eigen::Vector3d> barycentric;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  Eigen::Vector2d point(std::size_t i) const { return barycentric[i].tail<2>(); }
};

/// Rule exact for polynomials up to `degree` (1..6), positive weights.
const QuadratureRule& quadrature(int degree);

/// Gauss-Legendre nodes on [-1, 1] (n = 1..5).
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const LineRule& gauss_legendre(int n);

inline Eigen::Vector3d barycentric_of(const Eigen::Vector2d& ref) {
  return {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
}

/// Discontinuous linear 2x2 tensors: basis index 4*i + 2*k + l is lambda_i e_kl.
std::array<Eigen::Matrix2d, 12> eval_p1disc_tensor_basis(const Eigen::Vector2d& ref);

/// Values of the six first-order Brezzi-Douglas-Marini vector fields of one
/// cell. Index 2*j + m is the function dual to the m-th normal moment on local
/// edge j (m = 0: flux, m = 1: flux weighted by the edge coordinate in [-1, 1]).
struct Bdm1Values {
  std::array<Eigen::Vector2d, 6> values;
  std::array<double, 6> divergence{};
};

Bdm1Values eval_bdm1_reference(const Eigen::Vector2d& ref);

/// Contravariant Piola image of the reference basis on `geom`, multiplied by
/// `signs` (use bdm1_signs to match global edge orientation).
Bdm1Values eval_bdm1_row_basis(const CellGeometry& geom, const Eigen::Vector2d& ref,
                               const std::array<double, 6>& signs = {1, 1, 1, 1, 1, 1});

/// Flux moments flip with the edge orientation; first moments never do, since
/// both the normal and the edge coordinate reverse together.
std::array<double, 6> bdm1_signs(const std::array<CellEdge, 3>& cell_edges);

/// Tensor field with row `row` set to `v` and the other row zero.
inline Eigen::Matrix2d row_tensor(const Eigen::Vector2d& v, int row) {
  Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
  t.row(row) = v.transpose();
  return t;
}

enum class Field : int { Theta = 0, Sigma, U, UHat, Phi, Lambda, Q };
inline constexpr int kNumFields = 7;

/// Global enumeration of the seven unknown blocks, in the order
/// theta | sigma | u | u_hat | phi | lambda | q.
struct DofLayout {
  Index cells = 0;
  Index edges = 0;
  std::array<Index, kNumFields> offset{};
  std::array<Index, kNumFields> count{};
  Index total_dofs = 0;

  Index begin(Field f) const { return offset[static_cast<int>(f)]; }
  Index size(Field f) const { return count[static_cast<int>(f)]; }

  Index theta(Index cell, int local) const { return begin(Field::Theta) + 12 * cell + local; }
  Index sigma(Index edge, int row, int moment) const { return begin(Field::Sigma) + 4 * edge + 2 * row + moment; }
  Index u(Index cell, int component) const { return begin(Field::U) + 2 * cell + component; }
  Index u_hat(Index cell) const { return begin(Field::UHat) + cell; }
  Index phi(Index cell) const { return begin(Field::Phi) + cell; }
  Index lambda() const { return begin(Field::Lambda); }
  Index q(Index cell, int local) const { return begin(Field::Q) + 12 * cell + local; }
};

DofLayout build_dof_layout(const Mesh& mesh);

}  // namespace viscoflow

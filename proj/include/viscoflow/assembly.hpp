#pragma once

#include <functional>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "viscoflow/fem.hpp"
#include "viscoflow/mesh.hpp"
#include "viscoflow/rheology.hpp"
#include "viscoflow/sparse.hpp"

namespace viscoflow {

enum class BoundaryKind { Dirichlet, StressFree };

/// Body force, boundary velocity and per-tag boundary treatment.
/// Dirichlet velocities enter weakly through the boundary flux term; stress-free
/// edges have their stress normal trace fixed to zero.
struct ProblemData {
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> force;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, BoundaryTag)> dirichlet;
  std::map<BoundaryTag, BoundaryKind> kinds;

  BoundaryKind kind(BoundaryTag tag) const {
    const auto it = kinds.find(tag);
    return it == kinds.end() ? BoundaryKind::Dirichlet : it->second;
  }
  Eigen::Vector2d f(const Eigen::Vector2d& x) const { return force ? force(x) : Eigen::Vector2d::Zero(); }
  Eigen::Vector2d u_d(const Eigen::Vector2d& x, BoundaryTag tag) const {
    return dirichlet ? dirichlet(x, tag) : Eigen::Vector2d::Zero();
  }
};

bool has_stress_free_boundary(const Mesh& mesh, const ProblemData& data);

/// Net boundary flux of the Dirichlet data over Dirichlet edges.
double dirichlet_flux(const Mesh& mesh, const ProblemData& data);

/// Throws std::invalid_argument when an all-Dirichlet problem has data with
/// net flux above 1e-10.
void check_compatibility(const Mesh& mesh, const ProblemData& data);

/// Dofs pinned to zero: stress normal traces on stress-free edges, and the
/// trace multiplier when any stress-free edge exists.
std::vector<char> constrained_dofs(const Mesh& mesh, const DofLayout& layout, const ProblemData& data);

/// Coefficient vector segment of one field.
template <typename Vector>
auto field_block(const DofLayout& layout, Vector& x, Field f) {
  return x.segment(layout.begin(f), layout.size(f));
}

/// Quadrature degree used for the constitutive terms.
inline constexpr int kNonlinearQuadratureDegree = 4;

/// Diagnostics filled while assembling the slant Jacobian.
struct JacobianStats {
  double max_projected_q = 0.0;  // max |q_hat| over quadrature points
  Index active_points = 0;
  Index total_points = 0;
};

/// Galerkin residual, rows in the same block order as the unknowns: theta rows
/// are tested by xi, sigma/phi rows by (tau, psi), u/u_hat/lambda rows by
/// (v, v_hat, eta), q rows by w.
Eigen::VectorXd assemble_residual(const Mesh& mesh, const DofLayout& layout, const Params& params,
                                  const ProblemData& data, const Eigen::VectorXd& state);

/// Slant derivative of the residual. With `use_projection` the multiplier in
/// the active-set coupling term is replaced by its projection onto the
/// tau_s-ball.
SparseMatrix assemble_jacobian(const Mesh& mesh, const DofLayout& layout, const Params& params,
                               const ProblemData& data, const Eigen::VectorXd& state, bool use_projection,
                               JacobianStats* stats = nullptr);

/// Residual and Jacobian from a single pass over the cells.
std::pair<Eigen::VectorXd, SparseMatrix> assemble_newton_system(const Mesh& mesh, const DofLayout& layout,
                                                                const Params& params, const ProblemData& data,
                                                                const Eigen::VectorXd& state, bool use_projection,
                                                                JacobianStats* stats = nullptr);

/// Linear Stokes system (nu = mu, multiplier q decoupled and forced to zero).
std::pair<SparseMatrix, Eigen::VectorXd> assemble_stokes_system(const Mesh& mesh, const DofLayout& layout,
                                                                const Params& params, const ProblemData& data);

/// Constitutive operator A_gamma(theta) tested against the theta basis; `theta`
/// holds the 12 coefficients per cell.
Eigen::VectorXd assemble_a_gamma(const Mesh& mesh, const Params& params, const Eigen::VectorXd& theta);

/// Stress tensor of `cell` at reference point `ref`, with global edge signs
/// applied.
Eigen::Matrix2d evaluate_sigma(const Mesh& mesh, const DofLayout& layout, const Eigen::VectorXd& state, Index cell,
                               const Eigen::Vector2d& ref);

/// The theta and q unknowns of each cell. Both fields are discontinuous, so
/// these blocks couple to each other only through sigma and phi and can be
/// eliminated cell by cell.
LocalBlocks cell_local_blocks(const DofLayout& layout);

/// Number of worker threads for cell loops (VISCOFLOW_THREADS caps it).
int assembly_threads();

}  // namespace viscoflow

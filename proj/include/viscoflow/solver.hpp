#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "viscoflow/assembly.hpp"
#include "viscoflow/fem.hpp"
#include "viscoflow/mesh.hpp"
#include "viscoflow/rheology.hpp"

namespace viscoflow {

enum class InitMode { Stokes, Zero, Given };

struct SSNConfig {
  double tol = 1e-5;
  int max_iters = 50;
  bool use_projection = true;
  InitMode init = InitMode::Stokes;
  Eigen::VectorXd initial_state;  // used with InitMode::Given
  /// Called after each residual evaluation with (n, ||res^n||, ||res^n||/||res^0||).
  std::function<void(int, double, double)> observer;

  void validate() const {
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  }
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residuals;           // ||res^n||_2, n = 0..iterations
  std::vector<double> relative_residuals;  // residuals / residuals[0]
  bool converged = false;
  Index active_cells = 0;
  Index total_cells = 0;
  double active_fraction = 0.0;
  /// Largest |q_hat| seen at any quadrature point while building Jacobians.
  double max_projected_q = 0.0;
  /// Relative pointwise residual of gamma tau_s theta = |theta|_gamma q at the final state.
  double multiplier_identity = 0.0;
};

/// Raised when the linearized system of an SSN iteration cannot be solved.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(int iteration, const std::string& what)
      : std::runtime_error("SSN step " + std::to_string(iteration) + " failed: " + what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Multiplier tensor gamma tau_s theta / |theta|_gamma evaluated at the
/// theta nodal values; returns the 12C q coefficients.
Eigen::VectorXd multiplier_from_theta(const Params& params, const Eigen::VectorXd& theta);

Eigen::VectorXd initialize(const Mesh& mesh, const DofLayout& layout, const Params& params,
                           const ProblemData& data, const SSNConfig& config);

struct SSNStep {
  Eigen::VectorXd delta;
  double residual_norm = 0.0;
  JacobianStats stats;
};

/// One full (undamped) Newton increment at `state`.
SSNStep ssn_step(const Mesh& mesh, const DofLayout& layout, const Params& params, const ProblemData& data,
                 const Eigen::VectorXd& state, const SSNConfig& config, int iteration = 0);

struct SolveResult {
  DofLayout layout;
  Eigen::VectorXd state;
  SolveReport report;
};

/// The start counts as converged when ||res^0|| <= max(kAbsoluteResidualFloor,
/// kDataRelativeFloor * ||res(0)||), where res(0) is the residual of the zero state.
inline constexpr double kAbsoluteResidualFloor = 1e-14;
inline constexpr double kDataRelativeFloor = 1e-11;

/// Iterates full SSN steps until ||res^n|| / ||res^0|| <= tol. Non-convergence
/// is reported (converged = false); a failed linear solve throws StepFailure.
SolveResult ssn_solve(const Mesh& mesh, const Params& params, const ProblemData& data, const SSNConfig& config);

struct ActiveSet {
  Index active_cells = 0;
  double active_fraction = 0.0;
  std::vector<char> active;  // per cell
};

/// A cell is active when gamma |theta(barycenter)| >= tau_s.
ActiveSet active_set_stats(const Eigen::VectorXd& state, const Mesh& mesh, const Params& params);

/// max |gamma tau_s theta - |theta|_gamma q| over the vertex quadrature points
/// of the multiplier rows, divided by gamma tau_s max|theta| + tau_s.
double multiplier_identity_residual(const Mesh& mesh, const DofLayout& layout, const Params& params,
                                    const Eigen::VectorXd& state);

/// Tensor value of a 12-coefficient discontinuous linear field of cell `cell`
/// at barycentric point `lam`.
Eigen::Matrix2d p1_tensor_value(const Eigen::VectorXd& coeffs, Index offset, Index cell, const Eigen::Vector3d& lam);

}  // namespace viscoflow

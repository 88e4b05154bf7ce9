#include "viscoflow/solver.hpp"

#include <algorithm>
#include <cmath>

#include "viscoflow/sparse.hpp"

namespace viscoflow {

Eigen::Matrix2d p1_tensor_value(const Eigen::VectorXd& coeffs, Index offset, Index cell, const Eigen::Vector3d& lam) {
  Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int kl = 0; kl < 4; ++kl) t(kl / 2, kl % 2) += lam[i] * coeffs[offset + 12 * cell + 4 * i + kl];
  return t;
}

Eigen::VectorXd multiplier_from_theta(const Params& params, const Eigen::VectorXd& theta) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(theta.size());
  const double gts = params.gamma * params.tau_s;
  if (gts == 0.0) return q;
  for (Index node = 0; node < theta.size() / 4; ++node) {
    const auto nodal = theta.segment<4>(4 * node);
    q.segment<4>(4 * node) = gts / huber_abs(params, nodal.norm()) * nodal;
  }
  return q;
}

Eigen::VectorXd initialize(const Mesh& mesh, const DofLayout& layout, const Params& params,
                           const ProblemData& data, const SSNConfig& config) {
  switch (config.init) {
    case InitMode::Zero:
      return Eigen::VectorXd::Zero(layout.total_dofs);
    case InitMode::Given:
      if (config.initial_state.size() != layout.total_dofs)
        throw std::invalid_argument("initial state does not match the dof layout");
      return config.initial_state;
    case InitMode::Stokes:
      break;
  }
  auto [matrix, rhs] = assemble_stokes_system(mesh, layout, params, data);
  Eigen::VectorXd state = direct_solve(matrix, rhs, cell_local_blocks(layout));
  field_block(layout, state, Field::Q) = multiplier_from_theta(params, field_block(layout, state, Field::Theta));
  return state;
}

SSNStep ssn_step(const Mesh& mesh, const DofLayout& layout, const Params& params, const ProblemData& data,
                 const Eigen::VectorXd& state, const SSNConfig& config, int iteration) {
  SSNStep step;
  auto [residual, jacobian] =
      assemble_newton_system(mesh, layout, params, data, state, config.use_projection, &step.stats);
  step.residual_norm = residual.norm();
  try {
    step.delta = direct_solve(jacobian, -residual, cell_local_blocks(layout));
  } catch (const SingularMatrixError& e) {
    throw StepFailure(iteration, e.what());
  }
  return step;
}

SolveResult ssn_solve(const Mesh& mesh, const Params& params, const ProblemData& data, const SSNConfig& config) {
  params.validate();
  config.validate();
  check_compatibility(mesh, data);

  SolveResult result;
  result.layout = build_dof_layout(mesh);
  const DofLayout& layout = result.layout;
  Eigen::VectorXd& x = result.state;
  x = initialize(mesh, layout, params, data, config);
  SolveReport& report = result.report;

  // An initial residual this far below the data norm is roundoff: the start
  // already solves the discrete problem (e.g. the Stokes start without yield stress).
  const Eigen::VectorXd data_residual =
      assemble_residual(mesh, layout, params, data, Eigen::VectorXd::Zero(layout.total_dofs));
  const double floor = std::max(kAbsoluteResidualFloor, kDataRelativeFloor * data_residual.norm());

  DirectSolver solver(cell_local_blocks(layout));
  for (int n = 0;; ++n) {
    const Eigen::VectorXd residual = assemble_residual(mesh, layout, params, data, x);
    const double norm = residual.norm();
    report.residuals.push_back(norm);
    const double r0 = report.residuals.front();
    report.relative_residuals.push_back(n == 0 ? 1.0 : norm / r0);
    if (config.observer) config.observer(n, norm, report.relative_residuals.back());
    if (r0 <= floor || report.relative_residuals.back() <= config.tol) {
      report.converged = true;
      break;
    }
    if (n >= config.max_iters) break;

    JacobianStats stats;
    const SparseMatrix jacobian = assemble_jacobian(mesh, layout, params, data, x, config.use_projection, &stats);
    report.max_projected_q = std::max(report.max_projected_q, stats.max_projected_q);
    try {
      solver.factorize(jacobian);
      x += solver.solve(-residual);
    } catch (const SingularMatrixError& e) {
      throw StepFailure(n, e.what());
    }
    report.iterations = n + 1;
  }

  const ActiveSet active = active_set_stats(x, mesh, params);
  report.active_cells = active.active_cells;
  report.total_cells = mesh.num_cells();
  report.active_fraction = active.active_fraction;
  report.multiplier_identity = multiplier_identity_residual(mesh, layout, params, x);
  return result;
}

ActiveSet active_set_stats(const Eigen::VectorXd& state, const Mesh& mesh, const Params& params) {
  const DofLayout layout = build_dof_layout(mesh);
  if (state.size() != layout.total_dofs) throw std::invalid_argument("state size does not match mesh");
  ActiveSet out;
  out.active.assign(static_cast<std::size_t>(mesh.num_cells()), 0);
  const Eigen::Vector3d center = Eigen::Vector3d::Constant(1.0 / 3.0);
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const double t = p1_tensor_value(state, layout.begin(Field::Theta), c, center).norm();
    out.active[c] = static_cast<char>(chi_active(params, t));
    out.active_cells += out.active[c];
  }
  out.active_fraction = static_cast<double>(out.active_cells) / static_cast<double>(mesh.num_cells());
  return out;
}

double multiplier_identity_residual(const Mesh& mesh, const DofLayout& layout, const Params& params,
                                    const Eigen::VectorXd& state) {
  const double gts = params.gamma * params.tau_s;
  const auto theta = field_block(layout, state, Field::Theta);
  const auto q = field_block(layout, state, Field::Q);
  double worst = 0.0, max_theta = 0.0;
  for (Index node = 0; node < 3 * mesh.num_cells(); ++node) {
    const auto theta_i = theta.segment<4>(4 * node);
    const double t = theta_i.norm();
    max_theta = std::max(max_theta, t);
    worst = std::max(worst, (gts * theta_i - huber_abs(params, t) * q.segment<4>(4 * node)).norm());
  }
  const double scale = gts * max_theta + params.tau_s;
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace viscoflow

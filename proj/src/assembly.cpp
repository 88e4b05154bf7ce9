#include "viscoflow/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace viscoflow {

namespace {

// Local (per-cell) unknown numbering.
constexpr int kLocal = 41;
constexpr int kTheta = 0;
constexpr int kSigma = 12;  // + 4*j + 2*r + m
constexpr int kU = 24;
constexpr int kUHat = 26;
constexpr int kPhi = 27;
constexpr int kLambda = 28;
constexpr int kQ = 29;

using LocalVector = Eigen::Matrix<double, kLocal, 1>;
using LocalMatrix = Eigen::Matrix<double, kLocal, kLocal>;

enum class Mode { Full, Stokes, AGamma };

// Unit skew tensor; u_hat = s * S.
const Eigen::Matrix2d& skew_unit() {
  static const Eigen::Matrix2d s = (Eigen::Matrix2d() << 0.0, 1.0, -1.0, 0.0).finished();
  return s;
}

struct CellData {
  CellGeometry geom;
  std::array<Index, kLocal> dofs{};
  std::array<double, kLocal> sign{};
};

CellData make_cell_data(const Mesh& mesh, const DofLayout& layout, Index c) {
  CellData cell;
  cell.geom = cell_geometry(mesh, c);
  cell.sign.fill(1.0);
  const auto bdm_sign = bdm1_signs(mesh.cell_edges[c]);
  for (int a = 0; a < 12; ++a) {
    cell.dofs[kTheta + a] = layout.theta(c, a);
    cell.dofs[kQ + a] = layout.q(c, a);
  }
  for (int j = 0; j < 3; ++j) {
    for (int r = 0; r < 2; ++r) {
      for (int m = 0; m < 2; ++m) {
        const int a = kSigma + 4 * j + 2 * r + m;
        cell.dofs[a] = layout.sigma(mesh.cell_edges[c][j].edge, r, m);
        cell.sign[a] = bdm_sign[2 * j + m];
      }
    }
  }
  cell.dofs[kU] = layout.u(c, 0);
  cell.dofs[kU + 1] = layout.u(c, 1);
  cell.dofs[kUHat] = layout.u_hat(c);
  cell.dofs[kPhi] = layout.phi(c);
  cell.dofs[kLambda] = layout.lambda();
  return cell;
}

// Structurally nonzero local couplings; fixed so the global pattern never
// depends on the state.
const std::vector<std::pair<int, int>>& local_pattern() {
  static const std::vector<std::pair<int, int>> pattern = [] {
    Eigen::Matrix<bool, kLocal, kLocal> mask;
    mask.setConstant(false);
    for (int a = 0; a < 12; ++a) {
      const int k = (a % 4) / 2, l = a % 2;
      for (int b = 0; b < 12; ++b) {
        mask(kTheta + a, kTheta + b) = true;
        if (a % 4 == b % 4) mask(kTheta + a, kQ + b) = true;
        if (a / 4 == b / 4) mask(kQ + a, kTheta + b) = true;
        if (a == b) mask(kQ + a, kQ + b) = true;
      }
      for (int j = 0; j < 3; ++j) {
        for (int m = 0; m < 2; ++m) {
          const int s = kSigma + 4 * j + 2 * k + m;
          mask(kTheta + a, s) = mask(s, kTheta + a) = true;
        }
      }
      if (k == l) mask(kTheta + a, kPhi) = mask(kPhi, kTheta + a) = true;
    }
    for (int s = kSigma; s < kSigma + 12; ++s) {
      const int r = ((s - kSigma) % 4) / 2;
      mask(s, kU + r) = mask(kU + r, s) = true;
      mask(s, kUHat) = mask(kUHat, s) = true;
      mask(s, kLambda) = mask(kLambda, s) = true;
    }
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < kLocal; ++a)
      for (int b = 0; b < kLocal; ++b)
        if (mask(a, b)) out.emplace_back(a, b);
    return out;
  }();
  return pattern;
}

struct KernelOutput {
  CellData cell;
  LocalVector residual;
  LocalMatrix jacobian;
  double max_projected_q = 0.0;
  Index active_points = 0;
  Index points = 0;
};

struct KernelRequest {
  Mode mode = Mode::Full;
  bool residual = true;
  bool jacobian = false;
  bool use_projection = false;
};

Eigen::Vector2d reference_corner(int i) {
  return i == 0 ? Eigen::Vector2d(0, 0) : (i == 1 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1));
}

void element_kernel(const Mesh& mesh, Index c, const CellData& cell, const Params& params,
                    const ProblemData& data, const LocalVector& x, const KernelRequest& req,
                    KernelOutput& out) {
  const CellGeometry& geom = cell.geom;
  const QuadratureRule& rule = quadrature(kNonlinearQuadratureDegree);
  const Eigen::Matrix2d& skew = skew_unit();
  const bool stokes = req.mode == Mode::Stokes;
  const bool a_gamma_only = req.mode == Mode::AGamma;

  LocalVector& res = out.residual;
  LocalMatrix& jac = out.jacobian;
  if (req.residual) res.setZero();
  if (req.jacobian) jac.setZero();
  out.max_projected_q = 0.0;
  out.active_points = 0;
  out.points = 0;

  const double gts = params.gamma * params.tau_s;
  const Bdm1Values center = eval_bdm1_row_basis(geom, Eigen::Vector2d(1.0 / 3.0, 1.0 / 3.0));
  const auto& div = center.divergence;  // constant per basis function

  for (std::size_t g = 0; g < rule.size(); ++g) {
    const Eigen::Vector2d ref = rule.point(g);
    const Eigen::Vector3d lam = rule.barycentric[g];
    const double w = rule.weights[g] * geom.det;
    const Bdm1Values bdm = eval_bdm1_row_basis(geom, ref);

    Eigen::Matrix2d theta = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
    for (int i = 0; i < 3; ++i) {
      for (int kl = 0; kl < 4; ++kl) {
        theta(kl / 2, kl % 2) += lam[i] * x[kTheta + 4 * i + kl];
        q(kl / 2, kl % 2) += lam[i] * x[kQ + 4 * i + kl];
      }
    }
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
    for (int j = 0; j < 3; ++j)
      for (int r = 0; r < 2; ++r)
        for (int m = 0; m < 2; ++m)
          sigma.row(r) += x[kSigma + 4 * j + 2 * r + m] * bdm.values[2 * j + m].transpose();
    const double u_hat = x[kUHat];
    const double phi = x[kPhi];
    const double lambda = x[kLambda];
    const double t = theta.norm();

    double nu_v = params.mu, nu_p_over_t = 0.0, huber = params.tau_s;
    if (!stokes) {
      nu_v = nu(params, t);
      if (t >= kMagnitudeFloor) nu_p_over_t = nu_prime(params, t) / t;
      huber = huber_abs(params, t);
    }

    if (req.residual) {
      Eigen::Matrix2d theta_stress;
      if (stokes) {
        theta_stress = params.mu * theta - sigma - phi * Eigen::Matrix2d::Identity();
      } else if (a_gamma_only) {
        theta_stress = (nu_v + (gts > 0.0 ? gts / huber : 0.0)) * theta;
      } else {
        theta_stress = nu_v * theta + q - sigma - phi * Eigen::Matrix2d::Identity();
      }
      for (int i = 0; i < 3; ++i)
        for (int kl = 0; kl < 4; ++kl) res[kTheta + 4 * i + kl] += w * lam[i] * theta_stress(kl / 2, kl % 2);
      if (!a_gamma_only) {
        for (int j = 0; j < 3; ++j) {
          for (int r = 0; r < 2; ++r) {
            const Eigen::Vector2d strain_row = theta.row(r).transpose() + u_hat * skew.row(r).transpose();
            for (int m = 0; m < 2; ++m) {
              const Eigen::Vector2d& psi = bdm.values[2 * j + m];
              res[kSigma + 4 * j + 2 * r + m] += w * (-strain_row.dot(psi) + lambda * psi[r]);
            }
          }
        }
        res[kPhi] += -w * theta.trace();
        res[kUHat] += -w * (sigma(0, 1) - sigma(1, 0));
        res[kLambda] += w * sigma.trace();
      }
    }

    if (req.jacobian) {
      const double rank_one = (!stokes && t >= kMagnitudeFloor) ? nu_p_over_t : 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int ip = 0; ip < 3; ++ip) {
          const double mass = w * lam[i] * lam[ip];
          for (int kl = 0; kl < 4; ++kl) {
            const double th_kl = theta(kl / 2, kl % 2);
            for (int klp = 0; klp < 4; ++klp) {
              const double delta = kl == klp ? 1.0 : 0.0;
              const int row_t = kTheta + 4 * i + kl, col_t = kTheta + 4 * ip + klp;
              jac(row_t, col_t) += mass * (nu_v * delta + rank_one * th_kl * theta(klp / 2, klp % 2));
              if (!stokes) jac(row_t, kQ + 4 * ip + klp) += mass * delta;
            }
          }
        }
      }
      // linear couplings
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 2; ++k) {
          for (int l = 0; l < 2; ++l) {
            const int row_t = kTheta + 4 * i + 2 * k + l;
            for (int j = 0; j < 3; ++j) {
              for (int m = 0; m < 2; ++m) {
                const int s = kSigma + 4 * j + 2 * k + m;
                const double v = -w * lam[i] * bdm.values[2 * j + m][l];
                jac(row_t, s) += v;
                jac(s, row_t) += v;
              }
            }
            if (k == l) {
              jac(row_t, kPhi) += -w * lam[i];
              jac(kPhi, row_t) += -w * lam[i];
            }
          }
        }
      }
      for (int j = 0; j < 3; ++j) {
        for (int r = 0; r < 2; ++r) {
          for (int m = 0; m < 2; ++m) {
            const int s = kSigma + 4 * j + 2 * r + m;
            const Eigen::Vector2d& psi = bdm.values[2 * j + m];
            const double skew_pair = -w * skew.row(r).dot(psi.transpose());
            jac(s, kUHat) += skew_pair;
            jac(kUHat, s) += skew_pair;
            jac(s, kLambda) += w * psi[r];
            jac(kLambda, s) += w * psi[r];
          }
        }
      }
    }
  }

  if (a_gamma_only) return;

  // Multiplier rows, integrated with the vertex rule: each vertex carries its
  // own copy of gamma tau_s theta_i = |theta_i|_gamma q_i. Without a yield
  // stress that identity only says q = 0 and degenerates where theta vanishes,
  // so q is pinned directly.
  const double vertex_weight = geom.area / 3.0;
  const bool pin_q = stokes || params.tau_s == 0.0;
  for (int i = 0; i < 3; ++i) {
    const auto theta_i = x.segment<4>(kTheta + 4 * i);
    const auto q_i = x.segment<4>(kQ + 4 * i);
    if (pin_q) {
      if (req.residual) res.segment<4>(kQ + 4 * i) += vertex_weight * q_i;
      if (req.jacobian) jac.block<4, 4>(kQ + 4 * i, kQ + 4 * i).diagonal().array() += vertex_weight;
      continue;
    }
    const double t = theta_i.norm();
    const double huber = huber_abs(params, t);
    const int chi = chi_active(params, t);
    ++out.points;
    out.active_points += chi;
    if (req.residual) res.segment<4>(kQ + 4 * i) += vertex_weight * (gts * theta_i - huber * q_i);
    if (req.jacobian) {
      Eigen::Vector4d q_tilde = q_i;
      if (req.use_projection) {
        const Eigen::Matrix2d projected = project_q(params, Eigen::Matrix2d{{q_i[0], q_i[1]}, {q_i[2], q_i[3]}});
        q_tilde << projected(0, 0), projected(0, 1), projected(1, 0), projected(1, 1);
      }
      out.max_projected_q = std::max(out.max_projected_q, q_tilde.norm());
      const double active_coupling = (chi == 1 && t >= kMagnitudeFloor) ? params.gamma / t : 0.0;
      Eigen::Matrix4d d_theta = gts * Eigen::Matrix4d::Identity() - active_coupling * q_tilde * theta_i.transpose();
      jac.block<4, 4>(kQ + 4 * i, kTheta + 4 * i) += vertex_weight * d_theta;
      jac.block<4, 4>(kQ + 4 * i, kQ + 4 * i).diagonal().array() -= vertex_weight * huber;
    }
  }

  // divergence couplings: -int u . div(tau) and -int v . div(sigma)
  for (int j = 0; j < 3; ++j) {
    for (int r = 0; r < 2; ++r) {
      for (int m = 0; m < 2; ++m) {
        const int s = kSigma + 4 * j + 2 * r + m;
        const double d = -div[2 * j + m] * geom.area;
        if (req.residual) {
          res[s] += d * x[kU + r];
          res[kU + r] += d * x[s];
        }
        if (req.jacobian) {
          jac(s, kU + r) += d;
          jac(kU + r, s) += d;
        }
      }
    }
  }

  if (!req.residual) return;

  // load: -int f . v
  const QuadratureRule& load_rule = quadrature(6);
  for (std::size_t g = 0; g < load_rule.size(); ++g) {
    const Eigen::Vector2d f = data.f(geom.map(load_rule.point(g)));
    const double w = load_rule.weights[g] * geom.det;
    res[kU] -= w * f.x();
    res[kU + 1] -= w * f.y();
  }

  // Dirichlet data: + int_e (tau n) . u_D ds
  const LineRule& line = gauss_legendre(3);
  for (int j = 0; j < 3; ++j) {
    const Index edge = mesh.cell_edges[c][j].edge;
    if (!mesh.is_boundary(edge)) continue;
    const BoundaryTag tag = mesh.edge_tags[edge];
    if (data.kind(tag) != BoundaryKind::Dirichlet) continue;
    const Eigen::Vector2d a = reference_corner((j + 1) % 3);
    const Eigen::Vector2d b = reference_corner((j + 2) % 3);
    const Eigen::Vector2d& n = geom.edge_normals[j];
    for (std::size_t g = 0; g < line.nodes.size(); ++g) {
      const Eigen::Vector2d ref = a + 0.5 * (line.nodes[g] + 1.0) * (b - a);
      const double w = 0.5 * geom.edge_lengths[j] * line.weights[g];
      const Eigen::Vector2d u_d = data.u_d(geom.map(ref), tag);
      const Bdm1Values bdm = eval_bdm1_row_basis(geom, ref);
      for (int jj = 0; jj < 3; ++jj)
        for (int r = 0; r < 2; ++r)
          for (int m = 0; m < 2; ++m)
            res[kSigma + 4 * jj + 2 * r + m] += w * bdm.values[2 * jj + m].dot(n) * u_d[r];
    }
  }
}

LocalVector gather(const CellData& cell, const Eigen::VectorXd& state) {
  LocalVector x;
  for (int a = 0; a < kLocal; ++a) x[a] = cell.sign[a] * state[cell.dofs[a]];
  return x;
}

// Runs `compute(c, out)` for every cell on worker threads and hands the
// results to `scatter(c, out)` strictly in cell order.
template <typename Compute, typename Scatter>
void cell_loop(Index num_cells, Compute&& compute, Scatter&& scatter) {
  const int threads = assembly_threads();
  constexpr Index kBatchPerThread = 128;
  const Index batch = threads * kBatchPerThread;
  std::vector<KernelOutput> buffer(static_cast<std::size_t>(std::min(batch, num_cells)));
  for (Index start = 0; start < num_cells; start += batch) {
    const Index stop = std::min(num_cells, start + batch);
    const Index count = stop - start;
    if (threads <= 1 || count < 2 * kBatchPerThread) {
      for (Index c = start; c < stop; ++c) compute(c, buffer[c - start]);
    } else {
      std::vector<std::thread> workers;
      const Index per = (count + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const Index lo = start + t * per, hi = std::min(stop, lo + per);
        if (lo >= hi) break;
        workers.emplace_back([&, lo, hi] {
          for (Index c = lo; c < hi; ++c) compute(c, buffer[c - start]);
        });
      }
      for (auto& w : workers) w.join();
    }
    for (Index c = start; c < stop; ++c) scatter(c, buffer[c - start]);
  }
}

void require_finite(const Eigen::VectorXd& state, const DofLayout& layout) {
  if (state.size() != layout.total_dofs) throw std::invalid_argument("state size does not match dof layout");
  if (!state.allFinite()) throw std::invalid_argument("state has non-finite entries");
}

struct SystemParts {
  Eigen::VectorXd residual;
  Triplets triplets;
  JacobianStats stats;
};

SystemParts assemble_parts(const Mesh& mesh, const DofLayout& layout, const Params& params,
                           const ProblemData& data, const Eigen::VectorXd& state, const KernelRequest& req) {
  const std::vector<char> fixed = constrained_dofs(mesh, layout, data);
  SystemParts parts;
  if (req.residual) parts.residual = Eigen::VectorXd::Zero(layout.total_dofs);
  const auto& pattern = local_pattern();
  if (req.jacobian) parts.triplets.reserve(static_cast<std::size_t>(mesh.num_cells()) * pattern.size() + 64);

  cell_loop(
      mesh.num_cells(),
      [&](Index c, KernelOutput& out) {
        out.cell = make_cell_data(mesh, layout, c);
        element_kernel(mesh, c, out.cell, params, data, gather(out.cell, state), req, out);
      },
      [&](Index, const KernelOutput& out) {
        const CellData& cell = out.cell;
        if (req.residual) {
          for (int a = 0; a < kLocal; ++a) parts.residual[cell.dofs[a]] += cell.sign[a] * out.residual[a];
        }
        if (req.jacobian) {
          for (const auto& [a, b] : pattern) {
            const Index row = cell.dofs[a];
            if (fixed[row]) continue;
            parts.triplets.emplace_back(static_cast<int>(row), static_cast<int>(cell.dofs[b]),
                                        cell.sign[a] * cell.sign[b] * out.jacobian(a, b));
          }
          parts.stats.max_projected_q = std::max(parts.stats.max_projected_q, out.max_projected_q);
        }
        parts.stats.active_points += out.active_points;
        parts.stats.total_points += out.points;
      });

  for (Index d = 0; d < layout.total_dofs; ++d) {
    if (!fixed[d]) continue;
    if (req.residual) parts.residual[d] = state[d];
    if (req.jacobian) parts.triplets.emplace_back(static_cast<int>(d), static_cast<int>(d), 1.0);
  }
  return parts;
}

}  // namespace

int assembly_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("VISCOFLOW_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

bool has_stress_free_boundary(const Mesh& mesh, const ProblemData& data) {
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary(e) && data.kind(mesh.edge_tags[e]) == BoundaryKind::StressFree) return true;
  }
  return false;
}

double dirichlet_flux(const Mesh& mesh, const ProblemData& data) {
  const LineRule& line = gauss_legendre(5);
  double flux = 0.0;
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary(e)) continue;
    const BoundaryTag tag = mesh.edge_tags[e];
    if (data.kind(tag) != BoundaryKind::Dirichlet) continue;
    const Index c = mesh.edge_cells[e][0];
    const CellGeometry geom = cell_geometry(mesh, c);
    int j = 0;
    while (mesh.cell_edges[c][j].edge != e) ++j;
    const Eigen::Vector2d a = mesh.vertices[mesh.cells[c][(j + 1) % 3]];
    const Eigen::Vector2d b = mesh.vertices[mesh.cells[c][(j + 2) % 3]];
    for (std::size_t g = 0; g < line.nodes.size(); ++g) {
      const Eigen::Vector2d x = a + 0.5 * (line.nodes[g] + 1.0) * (b - a);
      flux += 0.5 * geom.edge_lengths[j] * line.weights[g] * data.u_d(x, tag).dot(geom.edge_normals[j]);
    }
  }
  return flux;
}

void check_compatibility(const Mesh& mesh, const ProblemData& data) {
  if (has_stress_free_boundary(mesh, data)) return;
  const double flux = dirichlet_flux(mesh, data);
  if (std::abs(flux) > 1e-10)
    throw std::invalid_argument("Dirichlet data violates the zero-flux compatibility condition (flux " +
                                std::to_string(flux) + ")");
}

std::vector<char> constrained_dofs(const Mesh& mesh, const DofLayout& layout, const ProblemData& data) {
  std::vector<char> fixed(static_cast<std::size_t>(layout.total_dofs), 0);
  bool any = false;
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.is_boundary(e) || data.kind(mesh.edge_tags[e]) != BoundaryKind::StressFree) continue;
    any = true;
    for (int r = 0; r < 2; ++r)
      for (int m = 0; m < 2; ++m) fixed[layout.sigma(e, r, m)] = 1;
  }
  if (any) fixed[layout.lambda()] = 1;
  return fixed;
}

Eigen::VectorXd assemble_residual(const Mesh& mesh, const DofLayout& layout, const Params& params,
                                  const ProblemData& data, const Eigen::VectorXd& state) {
  require_finite(state, layout);
  KernelRequest req;
  return assemble_parts(mesh, layout, params, data, state, req).residual;
}

SparseMatrix assemble_jacobian(const Mesh& mesh, const DofLayout& layout, const Params& params,
                               const ProblemData& data, const Eigen::VectorXd& state, bool use_projection,
                               JacobianStats* stats) {
  require_finite(state, layout);
  KernelRequest req;
  req.residual = false;
  req.jacobian = true;
  req.use_projection = use_projection;
  SystemParts parts = assemble_parts(mesh, layout, params, data, state, req);
  if (stats) *stats = parts.stats;
  return csr_from_triplets(layout.total_dofs, parts.triplets);
}

std::pair<Eigen::VectorXd, SparseMatrix> assemble_newton_system(const Mesh& mesh, const DofLayout& layout,
                                                                const Params& params, const ProblemData& data,
                                                                const Eigen::VectorXd& state, bool use_projection,
                                                                JacobianStats* stats) {
  require_finite(state, layout);
  KernelRequest req;
  req.jacobian = true;
  req.use_projection = use_projection;
  SystemParts parts = assemble_parts(mesh, layout, params, data, state, req);
  if (stats) *stats = parts.stats;
  return {std::move(parts.residual), csr_from_triplets(layout.total_dofs, parts.triplets)};
}

std::pair<SparseMatrix, Eigen::VectorXd> assemble_stokes_system(const Mesh& mesh, const DofLayout& layout,
                                                                const Params& params, const ProblemData& data) {
  KernelRequest req;
  req.mode = Mode::Stokes;
  req.jacobian = true;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(layout.total_dofs);
  SystemParts parts = assemble_parts(mesh, layout, params, data, zero, req);
  return {csr_from_triplets(layout.total_dofs, parts.triplets), -parts.residual};
}

Eigen::Matrix2d evaluate_sigma(const Mesh& mesh, const DofLayout& layout, const Eigen::VectorXd& state, Index cell,
                               const Eigen::Vector2d& ref) {
  if (state.size() != layout.total_dofs) throw std::invalid_argument("state size does not match dof layout");
  const CellData data = make_cell_data(mesh, layout, cell);
  const Bdm1Values bdm = eval_bdm1_row_basis(data.geom, ref);
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  for (int j = 0; j < 3; ++j)
    for (int r = 0; r < 2; ++r)
      for (int m = 0; m < 2; ++m) {
        const int a = kSigma + 4 * j + 2 * r + m;
        sigma.row(r) += data.sign[a] * state[data.dofs[a]] * bdm.values[2 * j + m].transpose();
      }
  return sigma;
}

LocalBlocks cell_local_blocks(const DofLayout& layout) {
  LocalBlocks blocks(static_cast<std::size_t>(layout.cells));
  for (Index c = 0; c < layout.cells; ++c) {
    auto& block = blocks[c];
    block.reserve(24);
    for (int k = 0; k < 12; ++k) block.push_back(layout.theta(c, k));
    for (int k = 0; k < 12; ++k) block.push_back(layout.q(c, k));
  }
  return blocks;
}

Eigen::VectorXd assemble_a_gamma(const Mesh& mesh, const Params& params, const Eigen::VectorXd& theta) {
  if (theta.size() != 12 * mesh.num_cells()) throw std::invalid_argument("theta block size mismatch");
  if (!theta.allFinite()) throw std::invalid_argument("theta has non-finite entries");
  KernelRequest req;
  req.mode = Mode::AGamma;
  ProblemData no_data;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(theta.size());
  cell_loop(
      mesh.num_cells(),
      [&](Index c, KernelOutput& result) {
        CellData cell;
        cell.geom = cell_geometry(mesh, c);
        LocalVector x = LocalVector::Zero();
        x.segment<12>(kTheta) = theta.segment<12>(12 * c);
        element_kernel(mesh, c, cell, params, no_data, x, req, result);
      },
      [&](Index c, const KernelOutput& result) { out.segment<12>(12 * c) = result.residual.segment<12>(kTheta); });
  return out;
}

}  // namespace viscoflow

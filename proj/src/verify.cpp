#include "viscoflow/verify.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <string>

#include "viscoflow/assembly.hpp"
#include "viscoflow/cases.hpp"
#include "viscoflow/solver.hpp"

namespace viscoflow {

namespace {

Eigen::Matrix2d random_tensor(std::mt19937_64& rng, double magnitude) {
  std::normal_distribution<double> normal;
  Eigen::Matrix2d t;
  do {
    t << normal(rng), normal(rng), normal(rng), normal(rng);
  } while (t.norm() < 1e-3);
  return magnitude * t / t.norm();
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace

int draw_kink_free_theta(std::mt19937_64& rng, const Params& params, ActivityRegime regime, int max_draws,
                         Eigen::Ref<Eigen::VectorXd> theta) {
  if (theta.size() != 12) throw std::invalid_argument("theta must hold 12 coefficients");
  const double kink = params.tau_s / params.gamma;
  const double margin = 1e-3 * kink;
  const double floor = 1e-3;
  const QuadratureRule& rule = quadrature(kNonlinearQuadratureDegree);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int draw = 1; draw <= max_draws; ++draw) {
    bool active = regime == ActivityRegime::Active || (regime == ActivityRegime::Mixed && coin(rng) == 1);
    if (kink <= floor) active = true;
    const double lo = active ? std::max(kink, floor) * 1.2 : floor * 1.2;
    const double hi = active ? std::max(kink, floor) * 20.0 : kink * 0.8;
    if (lo >= hi) continue;
    const Eigen::Matrix2d base = random_tensor(rng, log_uniform(rng, lo, hi));
    for (int i = 0; i < 3; ++i) {
      const Eigen::Matrix2d vertex = base + random_tensor(rng, 0.1 * base.norm());
      for (int kl = 0; kl < 4; ++kl) theta[4 * i + kl] = vertex(kl / 2, kl % 2);
    }
    const auto clear = [&](const Eigen::Vector3d& lam) {
      Eigen::Matrix2d t = Eigen::Matrix2d::Zero();
      for (int i = 0; i < 3; ++i)
        for (int kl = 0; kl < 4; ++kl) t(kl / 2, kl % 2) += lam[i] * theta[4 * i + kl];
      const double n = t.norm();
      return n >= floor && (params.tau_s == 0.0 || std::abs(n - kink) >= margin);
    };
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) ok = clear(Eigen::Vector3d::Unit(i));
    for (std::size_t g = 0; g < rule.size() && ok; ++g) ok = clear(rule.barycentric[g]);
    if (ok) return draw;
  }
  throw SeedFailure("no kink-free theta found in " + std::to_string(max_draws) + " draws");
}

FdCheckResult fd_jacobian_check(Index nx, const Params& params, std::uint64_t seed, const FdCheckOptions& options) {
  params.validate();
  const Mesh mesh = build_crossed_rect(nx, nx);
  const DofLayout layout = build_dof_layout(mesh);
  ProblemData data = reservoir_data();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  FdCheckResult result;
  Eigen::VectorXd x(layout.total_dofs);
  for (Index i = 0; i < x.size(); ++i) x[i] = normal(rng);
  for (Index c = 0; c < layout.cells; ++c) {
    result.draws = std::max(result.draws, draw_kink_free_theta(rng, params, options.regime, options.max_draws,
                                                               x.segment(layout.theta(c, 0), 12)));
  }
  const double q_scale = std::max(params.tau_s, 1.0);
  for (Index i = 0; i < layout.size(Field::Q); ++i) x[layout.begin(Field::Q) + i] = q_scale * normal(rng);

  SparseMatrix jac = assemble_jacobian(mesh, layout, params, data, x, false);
  if (options.theta_block_scale != 1.0) {
    const Index t0 = layout.begin(Field::Theta), t1 = t0 + layout.size(Field::Theta);
    for (Index r = t0; r < t1; ++r)
      for (SparseMatrix::InnerIterator it(jac, r); it; ++it)
        if (it.col() >= t0 && it.col() < t1) it.valueRef() *= options.theta_block_scale;
  }
  const Eigen::MatrixXd analytic(jac);
  const Eigen::VectorXd row_max = analytic.cwiseAbs().rowwise().maxCoeff();
  constexpr double kRowFloor = 1e-3;

  Eigen::VectorXd xp = x, xm = x;
  for (Index j = 0; j < layout.total_dofs; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const Eigen::VectorXd column = (assemble_residual(mesh, layout, params, data, xp) -
                                    assemble_residual(mesh, layout, params, data, xm)) /
                                   (2.0 * h);
    xp[j] = xm[j] = x[j];
    for (Index i = 0; i < layout.total_dofs; ++i) {
      const double a = analytic(i, j), fd = column[i];
      if (std::abs(a) <= 1e-8 && std::abs(fd) <= 1e-8) continue;
      // Entries far below their row's scale are compared against a floor of
      // 1e-3 times the row maximum; below it the differences are rounding.
      const double scale = std::max(std::abs(a), kRowFloor * row_max[i]);
      const double err = std::abs(fd - a) / scale;
      ++result.entries_compared;
      result.max_relative_error = std::max(result.max_relative_error, err);
    }
  }
  return result;
}

HuberSuiteResult huber_property_suite(Index samples, const std::vector<double>& gammas, std::uint64_t seed,
                                      double lipschitz_factor) {
  HuberSuiteResult r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kSlack = 1e-12;
  Params params;
  params.tau_s = 1.0;
  for (double gamma : gammas) {
    params.gamma = gamma;
    const double kink = params.tau_s / gamma;
    for (Index s = 0; s < samples; ++s) {
      const Eigen::Matrix2d a = random_tensor(rng, kink * log_uniform(rng, 1e-2, 1e2));
      Eigen::Matrix2d b;
      const double mode = unit(rng);
      if (mode < 0.4) {
        b = random_tensor(rng, kink * log_uniform(rng, 1e-2, 1e2));
      } else if (mode < 0.8) {
        // straddle the kink: rescale to just either side of tau_s/gamma
        const Eigen::Matrix2d dir = random_tensor(rng, 1.0);
        b = dir * kink * (1.0 + (unit(rng) - 0.5) * 1e-3);
      } else {
        b = a + random_tensor(rng, a.norm() * log_uniform(rng, 1e-6, 1.0));
      }
      ++r.samples;
      const double ta = a.norm(), tb = b.norm();
      const double ha = huber_abs(params, ta), hb = huber_abs(params, tb);
      const double diff = ha - hb;
      const double bound = lipschitz_factor * gamma * (a - b).norm();
      const double excess = diff - bound;
      if (excess > kSlack) {
        if (r.violations == 0 || excess > r.worst_excess) {
          r.counter_a = a;
          r.counter_b = b;
          r.counter_gamma = gamma;
        }
        ++r.violations;
      }
      r.worst_excess = std::max(r.worst_excess, excess);

      const bool act_a = chi_active(params, ta) == 1, act_b = chi_active(params, tb) == 1;
      int which = 0;
      double case_bound = 0.0;
      if (!act_a && !act_b) {
        which = 0;  // both equal tau_s
        case_bound = 0.0;
      } else if (act_a && act_b) {
        which = 1;
        case_bound = gamma * (ta - tb);
      } else if (act_a) {
        which = 2;  // gamma|A| - tau_s <= gamma|A| - gamma|B|
        case_bound = gamma * (ta - tb);
      } else {
        which = 3;  // tau_s - gamma|B| <= 0
        case_bound = 0.0;
      }
      ++r.case_counts[which];
      if (diff > case_bound + kSlack * std::max(1.0, std::abs(case_bound))) ++r.case_violations;

      for (const double t : {ta, tb}) {
        if (t / huber_abs(params, t) > (1.0 + 1e-14) / gamma) ++r.bound_violations;
      }
    }
  }
  return r;
}

MonotonicityResult monotonicity_suite(Index nx, const Params& params, Index samples, std::uint64_t seed,
                                      double operator_sign) {
  params.validate();
  const Mesh mesh = build_crossed_rect(nx, nx);
  const Index n = 12 * mesh.num_cells();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double kink = params.tau_s > 0.0 ? params.tau_s / params.gamma : 1.0;

  const auto random_theta = [&]() {
    Eigen::VectorXd t(n);
    for (Index c = 0; c < mesh.num_cells(); ++c) {
      const double scale = kink * log_uniform(rng, 1e-2, 1e2);
      for (int k = 0; k < 12; ++k) t[12 * c + k] = scale * normal(rng);
    }
    return t;
  };

  MonotonicityResult r;
  r.min_pairing = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < samples; ++s) {
    const Eigen::VectorXd t1 = random_theta();
    Eigen::VectorXd t2;
    const double mode = unit(rng);
    if (mode < 0.5) {
      t2 = random_theta();
    } else {
      // close pairs probe the local behaviour near each state
      t2 = t1;
      const double eps = log_uniform(rng, 1e-6, 1e-1);
      for (Index i = 0; i < n; ++i) t2[i] += eps * std::abs(t1[i]) * normal(rng);
    }
    const Eigen::VectorXd a1 = operator_sign * assemble_a_gamma(mesh, params, t1);
    const Eigen::VectorXd a2 = operator_sign * assemble_a_gamma(mesh, params, t2);
    r.min_pairing = std::min(r.min_pairing, (a1 - a2).dot(t1 - t2));
    ++r.pairs;
  }
  return r;
}

bool MmsResult::passed() const {
  if (velocity_rates.empty()) return false;
  for (double rate : velocity_rates)
    if (!(rate >= 0.9)) return false;
  return true;
}

namespace {

// psi = x^2 (1-x)^2 y^2 (1-y)^2 and u = (psi_y, -psi_x).
double g(double s) { return s * s * (1 - s) * (1 - s); }
double dg(double s) { return 2 * s * (1 - s) * (1 - 2 * s); }
double d2g(double s) { return 2 - 12 * s + 12 * s * s; }
double d3g(double s) { return -12 + 24 * s; }

Eigen::Vector2d mms_velocity(const Eigen::Vector2d& p) {
  const double x = p.x(), y = p.y();
  return {g(x) * dg(y), -dg(x) * g(y)};
}

double mms_pressure(const Eigen::Vector2d& p) { return p.x() * p.x() * p.x() - 0.25; }

// f = -(mu/2) Laplace(u) + grad(phi) with mu = 1.
Eigen::Vector2d mms_force(const Eigen::Vector2d& p) {
  const double x = p.x(), y = p.y();
  const double lap_u1 = d2g(x) * dg(y) + g(x) * d3g(y);
  const double lap_u2 = -(d3g(x) * g(y) + dg(x) * d2g(y));
  return {-0.5 * lap_u1 + 3 * x * x, -0.5 * lap_u2};
}

}  // namespace

MmsResult stokes_mms_convergence(const std::vector<Index>& levels, double force_scale) {
  if (levels.size() < 2) throw std::invalid_argument("need at least two levels");
  Params params;
  params.p = 2.0;
  params.mu = 1.0;
  params.tau_s = 0.0;
  ProblemData data;
  data.force = [force_scale](const Eigen::Vector2d& p) { return (force_scale * mms_force(p)).eval(); };
  data.dirichlet = [](const Eigen::Vector2d& p, BoundaryTag) { return mms_velocity(p); };

  MmsResult r;
  r.levels = levels;
  const QuadratureRule& rule = quadrature(6);
  for (Index nx : levels) {
    const Mesh mesh = build_crossed_rect(nx, nx);
    const DofLayout layout = build_dof_layout(mesh);
    auto [matrix, rhs] = assemble_stokes_system(mesh, layout, params, data);
    const Eigen::VectorXd x = direct_solve(matrix, rhs, cell_local_blocks(layout));
    double eu = 0.0, ep = 0.0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
      const CellGeometry geom = cell_geometry(mesh, c);
      const Eigen::Vector2d uh(x[layout.u(c, 0)], x[layout.u(c, 1)]);
      const double ph = x[layout.phi(c)];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Eigen::Vector2d pt = geom.map(rule.point(q));
        const double w = rule.weights[q] * geom.det;
        eu += w * (uh - mms_velocity(pt)).squaredNorm();
        ep += w * std::pow(ph - mms_pressure(pt), 2);
      }
    }
    r.velocity_errors.push_back(std::sqrt(eu));
    r.pressure_errors.push_back(std::sqrt(ep));
  }
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const double ratio = std::log(double(levels[k]) / double(levels[k - 1]));
    r.velocity_rates.push_back(std::log(r.velocity_errors[k - 1] / r.velocity_errors[k]) / ratio);
    r.pressure_rates.push_back(std::log(r.pressure_errors[k - 1] / r.pressure_errors[k]) / ratio);
  }
  return r;
}

double rotation_symmetry_error(const Mesh& mesh, const DofLayout& layout, const Eigen::VectorXd& state) {
  const Index nc = mesh.num_cells();
  const Eigen::Vector2d center(0.5, 0.5);
  const auto rotate = [](const Eigen::Vector2d& v) { return Eigen::Vector2d(-v.y(), v.x()); };
  // Match rotated barycenters by sorting on rounded coordinates.
  const auto key = [](const Eigen::Vector2d& p) {
    return std::pair<long long, long long>(std::llround(p.x() * 1e9), std::llround(p.y() * 1e9));
  };
  std::map<std::pair<long long, long long>, Index> by_center;
  for (Index c = 0; c < nc; ++c) by_center[key(mesh.barycenter(c))] = c;
  double max_u = 0.0, worst = 0.0;
  for (Index c = 0; c < nc; ++c) {
    const Eigen::Vector2d u(state[layout.u(c, 0)], state[layout.u(c, 1)]);
    max_u = std::max(max_u, u.cwiseAbs().maxCoeff());
    const auto it = by_center.find(key(center + rotate(mesh.barycenter(c) - center)));
    if (it == by_center.end()) throw std::invalid_argument("mesh is not symmetric under rotation");
    const Eigen::Vector2d v(state[layout.u(it->second, 0)], state[layout.u(it->second, 1)]);
    worst = std::max(worst, (v - rotate(u)).cwiseAbs().maxCoeff());
  }
  return max_u > 0.0 ? worst / max_u : worst;
}

}  // namespace viscoflow

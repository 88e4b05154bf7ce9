#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "viscoflow/fem.hpp"
#include "viscoflow/mesh.hpp"
#include "viscoflow/rheology.hpp"

namespace viscoflow {

/// No kink-free random state was found within the allowed number of draws.
class SeedFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ActivityRegime { Mixed, Inactive, Active };

struct FdCheckOptions {
  ActivityRegime regime = ActivityRegime::Mixed;
  int max_draws = 100;
  /// Mutation hook: scales the theta-theta block of the analytic Jacobian.
  double theta_block_scale = 1.0;
};

struct FdCheckResult {
  double max_relative_error = 0.0;
  Index entries_compared = 0;
  int draws = 0;  // largest number of draws any cell needed
};

/// Compares assemble_jacobian (without projection) against central
/// differences of assemble_residual on a crossed nx-by-nx mesh, at a random
/// state whose theta stays clear of the Huber kink.
FdCheckResult fd_jacobian_check(Index nx, const Params& params, std::uint64_t seed, const FdCheckOptions& options = {});

/// Random theta for one cell (12 coefficients) that keeps every vertex and
/// quadrature point of the cell at least 1e-3 tau_s/gamma away from the kink
/// and at magnitude >= 1e-3. Returns the number of draws used; throws
/// SeedFailure after `max_draws`.
int draw_kink_free_theta(std::mt19937_64& rng, const Params& params, ActivityRegime regime, int max_draws,
                         Eigen::Ref<Eigen::VectorXd> theta);

struct HuberSuiteResult {
  Index samples = 0;
  Index violations = 0;        // |A|_g - |B|_g > factor*gamma|A-B| + 1e-12
  Index case_violations = 0;   // per-case inequality of the four-set split
  Index bound_violations = 0;  // |theta / |theta|_g| > 1/gamma
  /// Pairs with (A inactive, B inactive), (active, active), (active, inactive), (inactive, active).
  std::array<Index, 4> case_counts{};
  double worst_excess = 0.0;
  Eigen::Matrix2d counter_a = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d counter_b = Eigen::Matrix2d::Zero();
  double counter_gamma = 0.0;

  bool passed() const {
    return violations == 0 && case_violations == 0 && bound_violations == 0 &&
           std::all_of(case_counts.begin(), case_counts.end(), [](Index n) { return n > 0; });
  }
};

/// `lipschitz_factor` below 1 is the harness's own mutation check.
HuberSuiteResult huber_property_suite(Index samples, const std::vector<double>& gammas, std::uint64_t seed,
                                      double lipschitz_factor = 1.0);

struct MonotonicityResult {
  double min_pairing = 0.0;
  Index pairs = 0;
  bool passed() const { return min_pairing >= -1e-12; }
};

/// Minimum of <A(theta1) - A(theta2), theta1 - theta2> over random pairs on a
/// crossed nx-by-nx mesh. `operator_sign` = -1 is the mutation check.
MonotonicityResult monotonicity_suite(Index nx, const Params& params, Index samples, std::uint64_t seed,
                                      double operator_sign = 1.0);

struct MmsResult {
  std::vector<Index> levels;
  std::vector<double> velocity_errors;
  std::vector<double> pressure_errors;
  std::vector<double> velocity_rates;
  std::vector<double> pressure_rates;

  bool passed() const;
};

/// Linear Stokes limit (p = 2, tau_s = 0, mu = 1) against the exact solution
/// u = curl(x^2 (1-x)^2 y^2 (1-y)^2), phi = x^3 - 1/4. `force_scale` != 1
/// is the mutation check.
MmsResult stokes_mms_convergence(const std::vector<Index>& levels, double force_scale = 1.0);

/// max over cells of |u(R c) - R u(c)| for the 90 degree rotation R about the
/// center of the unit square, relative to max|u|. Requires a mesh that maps to
/// itself under R.
double rotation_symmetry_error(const Mesh& mesh, const DofLayout& layout, const Eigen::VectorXd& state);

}  // namespace viscoflow

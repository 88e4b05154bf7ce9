#include <cmath>

#include "doctest.h"
#include "viscoflow/cases.hpp"
#include "viscoflow/solver.hpp"
#include "viscoflow/verify.hpp"

using namespace viscoflow;

namespace {

Eigen::VectorXd stokes_start(const BenchmarkCase& bc, const DofLayout& layout, const Params& params) {
  return initialize(bc.mesh, layout, params, bc.data, SSNConfig{});
}

double max_nodal_q(const DofLayout& layout, const Eigen::VectorXd& x) {
  const auto q = field_block(layout, x, Field::Q);
  double m = 0.0;
  for (Index node = 0; node < q.size() / 4; ++node) m = std::max(m, q.segment<4>(4 * node).norm());
  return m;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("configuration checks") {
    SSNConfig c;
    CHECK_NOTHROW(c.validate());
    c.tol = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.tol = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = SSNConfig{};
    c.max_iters = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);

    const StepFailure failure(4, "pivot");
    CHECK(failure.iteration() == 4);
    CHECK(std::string(failure.what()).find("4") != std::string::npos);
  }

  TEST_CASE("initialization") {
    const Mesh mesh = build_crossed_rect(4, 4);
    const DofLayout layout = build_dof_layout(mesh);
    const Params params = default_params(CaseKind::Reservoir);
    SSNConfig c;
    for (InitMode mode : {InitMode::Stokes, InitMode::Zero}) {
      c.init = mode;
      CHECK(initialize(mesh, layout, params, ProblemData{}, c).norm() == 0.0);
    }
    c.init = InitMode::Given;
    c.initial_state = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(initialize(mesh, layout, params, ProblemData{}, c), std::invalid_argument);
    c.initial_state = Eigen::VectorXd::Constant(layout.total_dofs, 0.5);
    CHECK(initialize(mesh, layout, params, ProblemData{}, c) == c.initial_state);

    const BenchmarkCase bc = make_case(CaseKind::Reservoir, 8);
    const DofLayout l8 = build_dof_layout(bc.mesh);
    const Eigen::VectorXd x = stokes_start(bc, l8, params);
    CHECK(field_block(l8, x, Field::U).norm() > 0.0);
    CHECK(max_nodal_q(l8, x) <= params.tau_s + 1e-12);
    CHECK(multiplier_identity_residual(bc.mesh, l8, params, x) <= 1e-15);
  }

  TEST_CASE("reservoir solve at nx=8") {
    const BenchmarkCase bc = make_case(CaseKind::Reservoir, 8);
    const Params params = default_params(CaseKind::Reservoir);
    SSNConfig c;
    c.tol = 1e-10;
    std::vector<double> observed;
    c.observer = [&](int n, double, double rel) {
      CHECK(n == static_cast<int>(observed.size()));
      observed.push_back(rel);
    };
    const SolveResult result = ssn_solve(bc.mesh, params, bc.data, c);
    const SolveReport& r = result.report;
    REQUIRE(r.converged);
    CHECK(r.relative_residuals.front() == 1.0);
    CHECK(r.residuals.size() == static_cast<std::size_t>(r.iterations + 1));
    CHECK(r.relative_residuals.back() <= c.tol);
    CHECK(observed == r.relative_residuals);
    CHECK(r.total_cells == bc.mesh.num_cells());
    CHECK(r.active_fraction == static_cast<double>(r.active_cells) / static_cast<double>(r.total_cells));
    CHECK(r.multiplier_identity <= 1e-6);
    CHECK(r.max_projected_q <= params.tau_s + 1e-12);
    CHECK(rotation_symmetry_error(bc.mesh, result.layout, result.state) <= 1e-8);

    SUBCASE("newton fixed point") {
      Eigen::VectorXd x = result.state;
      for (int k = 0; k < 2; ++k) x += ssn_step(bc.mesh, result.layout, params, bc.data, x, c).delta;
      const SSNStep step = ssn_step(bc.mesh, result.layout, params, bc.data, x, c);
      CHECK(step.residual_norm < 1e-11);
      CHECK(step.delta.norm() < 1e-10);
    }

    SUBCASE("repeat runs give identical reports") {
      SSNConfig quiet = c;
      quiet.observer = nullptr;
      const SolveResult again = ssn_solve(bc.mesh, params, bc.data, quiet);
      CHECK(again.report.residuals == r.residuals);
      CHECK(again.report.active_cells == r.active_cells);
      CHECK(again.state == result.state);
    }
  }

  TEST_CASE("iteration cap is reported, not thrown") {
    const BenchmarkCase bc = make_case(CaseKind::Reservoir, 4);
    SSNConfig c;
    c.tol = 1e-12;
    c.max_iters = 2;
    const SolveResult result = ssn_solve(bc.mesh, default_params(CaseKind::Reservoir), bc.data, c);
    CHECK_FALSE(result.report.converged);
    CHECK(result.report.iterations == 2);
    CHECK(result.report.residuals.size() == 3);
  }

  TEST_CASE("linear limit") {
    const BenchmarkCase bc = make_case(CaseKind::Reservoir, 8);
    Params params;
    params.p = 2.0;
    params.tau_s = 0.0;
    SSNConfig c;
    c.tol = 1e-10;
    const SolveResult from_stokes = ssn_solve(bc.mesh, params, bc.data, c);
    CHECK(from_stokes.report.converged);
    CHECK(from_stokes.report.iterations <= 1);
    c.init = InitMode::Zero;
    const SolveResult from_zero = ssn_solve(bc.mesh, params, bc.data, c);
    CHECK(from_zero.report.converged);
    CHECK(from_zero.report.iterations == 1);
    CHECK((from_zero.state - from_stokes.state).norm() <= 1e-10 * from_stokes.state.norm());
  }

  TEST_CASE("first step from the Stokes start") {
    const BenchmarkCase bc = make_case(CaseKind::Reservoir, 16);
    const DofLayout layout = build_dof_layout(bc.mesh);
    const Params params = default_params(CaseKind::Reservoir);
    const Eigen::VectorXd x0 = stokes_start(bc, layout, params);

    SUBCASE("projection is inert when the multiplier is inside the ball") {
      SSNConfig with, without;
      without.use_projection = false;
      const SSNStep a = ssn_step(bc.mesh, layout, params, bc.data, x0, with);
      const SSNStep b = ssn_step(bc.mesh, layout, params, bc.data, x0, without);
      CHECK((a.delta - b.delta).norm() <= 1e-14 * a.delta.norm());
    }

    SUBCASE("the constitutive rows decrease") {
      // The multiplier rows start at zero and dominate the full norm after
      // one step; the strain rows carry the whole initial residual.
      const SSNStep step = ssn_step(bc.mesh, layout, params, bc.data, x0, SSNConfig{});
      const Eigen::VectorXd r0 = assemble_residual(bc.mesh, layout, params, bc.data, x0);
      const Eigen::VectorXd r1 = assemble_residual(bc.mesh, layout, params, bc.data, x0 + step.delta);
      CHECK(field_block(layout, r0, Field::Q).norm() <= 1e-12);
      CHECK(field_block(layout, r1, Field::Theta).norm() < field_block(layout, r0, Field::Theta).norm());
    }
  }

  TEST_CASE("active set statistics") {
    const BenchmarkCase bc = make_case(CaseKind::Reservoir, 4);
    const DofLayout layout = build_dof_layout(bc.mesh);
    Params params = default_params(CaseKind::Reservoir);
    const ActiveSet none = active_set_stats(Eigen::VectorXd::Zero(layout.total_dofs), bc.mesh, params);
    CHECK(none.active_cells == 0);
    CHECK(none.active_fraction == 0.0);
    params.tau_s = 1e-12;
    const ActiveSet all = active_set_stats(stokes_start(bc, layout, params), bc.mesh, params);
    CHECK(all.active_cells == bc.mesh.num_cells());
    CHECK(all.active_fraction == 1.0);
    CHECK_THROWS_AS(active_set_stats(Eigen::VectorXd::Zero(4), bc.mesh, params), std::invalid_argument);
  }

  TEST_CASE("incompatible data is rejected before solving") {
    const Mesh mesh = build_crossed_rect(2, 2);
    ProblemData inflow_only;
    inflow_only.dirichlet = [](const Eigen::Vector2d&, BoundaryTag tag) {
      return tag == BoundaryTag::Left ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d::Zero();
    };
    CHECK_THROWS_AS(ssn_solve(mesh, Params{}, inflow_only, SSNConfig{}), std::invalid_argument);
  }
}

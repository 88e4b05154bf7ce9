#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "viscoflow/cases.hpp"
#include "viscoflow/output.hpp"

using namespace viscoflow;

namespace {

struct Solved {
  BenchmarkCase bc = make_case(CaseKind::Reservoir, 4);
  Params params = default_params(CaseKind::Reservoir);
  SolveResult result;
  Solved() {
    SSNConfig c;
    c.tol = 1e-8;
    result = ssn_solve(bc.mesh, params, bc.data, c);
  }
};

const Solved& solved() {
  static const Solved s;
  return s;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("viscoflow_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("output") {
  TEST_CASE("VTK round trip") {
    const Solved& s = solved();
    std::stringstream file;
    write_vtk(s.bc.mesh, s.result.layout, s.params, s.result.state, file);
    const VtkData d = read_vtk(file);
    REQUIRE(d.points.size() == static_cast<std::size_t>(s.bc.mesh.num_vertices()));
    REQUIRE(d.cells.size() == static_cast<std::size_t>(s.bc.mesh.num_cells()));
    for (Index v = 0; v < s.bc.mesh.num_vertices(); ++v) {
      CHECK(d.points[v].x() == s.bc.mesh.vertices[v].x());
      CHECK(d.points[v].y() == s.bc.mesh.vertices[v].y());
    }
    for (Index c = 0; c < s.bc.mesh.num_cells(); ++c)
      for (int i = 0; i < 3; ++i) CHECK(d.cells[c][i] == s.bc.mesh.cells[c][i]);

    const auto u = field_block(s.result.layout, s.result.state, Field::U);
    const auto& vel = d.vectors.at("velocity");
    for (Index c = 0; c < s.bc.mesh.num_cells(); ++c) {
      CHECK(vel[c].x() == u[2 * c]);
      CHECK(vel[c].y() == u[2 * c + 1]);
      CHECK(vel[c].z() == 0.0);
    }
    const auto& active = d.scalars.at("active");
    const ActiveSet set = active_set_stats(s.result.state, s.bc.mesh, s.params);
    for (Index c = 0; c < s.bc.mesh.num_cells(); ++c) {
      CHECK((active[c] == 0.0 || active[c] == 1.0));
      CHECK(active[c] == set.active[c]);
    }
    for (const char* name : {"pressure", "theta_norm", "sigma_norm", "q_norm"})
      CHECK(d.scalars.at(name).size() == static_cast<std::size_t>(s.bc.mesh.num_cells()));
  }

  TEST_CASE("residual CSV") {
    const SolveReport& r = solved().result.report;
    std::stringstream out;
    write_residual_csv(r, out);
    std::string line;
    std::getline(out, line);
    CHECK(line == "iteration,absolute,relative\r");
    int rows = 0;
    while (std::getline(out, line)) {
      REQUIRE(line.back() == '\r');
      std::stringstream fields(line);
      std::string it, abs, rel;
      std::getline(fields, it, ',');
      std::getline(fields, abs, ',');
      std::getline(fields, rel, ',');
      CHECK(std::stoi(it) == rows);
      CHECK(std::stod(abs) == r.residuals[rows]);
      CHECK(std::stod(rel) == r.relative_residuals[rows]);
      ++rows;
    }
    CHECK(rows == r.iterations + 1);
  }

  TEST_CASE("stats JSON round trip") {
    const SolveReport& r = solved().result.report;
    const nlohmann::json params = params_to_json(solved().params);
    const nlohmann::json j = report_to_json(r, params);
    const SolveReport back = report_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.iterations == r.iterations);
    CHECK(back.converged == r.converged);
    CHECK(back.residuals == r.residuals);
    CHECK(back.relative_residuals == r.relative_residuals);
    CHECK(back.active_cells == r.active_cells);
    CHECK(back.total_cells == r.total_cells);
    CHECK(back.active_fraction == r.active_fraction);
    CHECK(back.max_projected_q == r.max_projected_q);
    CHECK(back.multiplier_identity == r.multiplier_identity);
    CHECK(j.at("parameters") == params);
    CHECK(params.at("tau_s").get<double>() == solved().params.tau_s);
  }

  TEST_CASE("SVG plot") {
    std::stringstream out;
    write_residual_svg(solved().result.report, out);
    const std::string svg = out.str();
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("nan") == std::string::npos);
  }

  TEST_CASE("report files") {
    const auto dir = scratch_dir("report");
    write_report(solved().result.report, nlohmann::json::object(), dir);
    for (const char* f : {"residuals.csv", "stats.json", "residuals.svg"})
      CHECK(std::filesystem::exists(dir / f));

    const auto partial = scratch_dir("partial");
    OutputToggles t;
    t.residual_svg = false;
    t.residual_csv = false;
    write_report(solved().result.report, nlohmann::json::object(), partial, t);
    CHECK(std::filesystem::exists(partial / "stats.json"));
    CHECK_FALSE(std::filesystem::exists(partial / "residuals.svg"));
    CHECK_FALSE(std::filesystem::exists(partial / "residuals.csv"));

    // A regular file where the directory should be.
    const auto blocker = dir / "residuals.csv";
    CHECK_THROWS_AS(write_report(solved().result.report, nlohmann::json::object(), blocker), std::runtime_error);
    CHECK(nlohmann::json::parse(slurp(dir / "stats.json")).at("converged").get<bool>());
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(partial);
  }
}

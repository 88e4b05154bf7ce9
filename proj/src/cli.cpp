#include "viscoflow/cli.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

namespace viscoflow {

namespace {

std::vector<double> parse_numbers(const std::string& text, std::size_t expected) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw UsageError("bad number '" + item + "' in '" + text + "'");
    values.push_back(v);
  }
  if (values.size() != expected)
    throw UsageError("expected " + std::to_string(expected) + " comma-separated numbers, got '" + text + "'");
  return values;
}

Eigen::Vector2d constant_on(const std::map<BoundaryTag, Eigen::Vector2d>& values, BoundaryTag tag) {
  const auto it = values.find(tag);
  return it == values.end() ? Eigen::Vector2d::Zero() : it->second;
}

}  // namespace

BoundaryTag parse_boundary_tag(std::string_view name) {
  for (BoundaryTag tag : {BoundaryTag::Left, BoundaryTag::Right, BoundaryTag::Bottom, BoundaryTag::Top,
                          BoundaryTag::Wall, BoundaryTag::Inflow, BoundaryTag::Outflow}) {
    if (tag_name(tag) == name) return tag;
  }
  throw UsageError("unknown boundary tag '" + std::string(name) + "'");
}

InitMode parse_init(std::string_view name) {
  if (name == "stokes") return InitMode::Stokes;
  if (name == "zero") return InitMode::Zero;
  throw UsageError("unknown init mode '" + std::string(name) + "'");
}

std::string_view init_name(InitMode mode) {
  switch (mode) {
    case InitMode::Stokes:
      return "stokes";
    case InitMode::Zero:
      return "zero";
    case InitMode::Given:
      return "given";
  }
  return "unknown";
}

Rect parse_rect(const std::string& text) {
  const auto v = parse_numbers(text, 4);
  Rect r{v[0], v[2], v[1], v[3]};
  if (!(r.x1 > r.x0 && r.y1 > r.y0)) throw UsageError("empty rectangle '" + text + "'");
  return r;
}

Eigen::Vector2d parse_vector(const std::string& text) {
  const auto v = parse_numbers(text, 2);
  return {v[0], v[1]};
}

BenchmarkCase build_case(const RunConfig& config) {
  if (config.nx < 1) throw UsageError("nx must be positive");
  if (config.kind != CaseKind::Custom) return make_case(config.kind, config.nx, config.channel);
  const CustomSpec& spec = config.custom;
  if (!spec.rect) throw UsageError("custom case needs a mesh (--rect x0,x1,y0,y1)");
  if (!spec.force && spec.dirichlet.empty())
    throw UsageError("custom case needs data (--force and/or --dirichlet TAG:ux,uy)");
  BenchmarkCase out;
  out.mesh = build_crossed_rect(config.nx, spec.ny > 0 ? spec.ny : config.nx, *spec.rect);
  if (spec.force) {
    const Eigen::Vector2d f = *spec.force;
    out.data.force = [f](const Eigen::Vector2d&) { return f; };
  }
  const auto dirichlet = spec.dirichlet;
  out.data.dirichlet = [dirichlet](const Eigen::Vector2d&, BoundaryTag tag) { return constant_on(dirichlet, tag); };
  for (BoundaryTag tag : spec.stress_free) out.data.kinds[tag] = BoundaryKind::StressFree;
  return out;
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  nlohmann::json j;
  j["case"] = std::string(case_name(config.kind));
  j["nx"] = config.nx;
  j["model"] = params_to_json(config.params);
  j["solver"] = {{"tol", config.ssn.tol},
                 {"max_iters", config.ssn.max_iters},
                 {"use_projection", config.ssn.use_projection},
                 {"init", std::string(init_name(config.ssn.init))}};
  if (config.kind == CaseKind::Channel) {
    j["channel"] = {{"length", config.channel.length},
                    {"half_height", config.channel.half_height},
                    {"ratio", config.channel.ratio}};
  }
  if (config.kind == CaseKind::Custom) {
    const CustomSpec& s = config.custom;
    nlohmann::json c;
    if (s.rect) c["rect"] = {s.rect->x0, s.rect->x1, s.rect->y0, s.rect->y1};
    c["ny"] = s.ny > 0 ? s.ny : config.nx;
    if (s.force) c["force"] = {s.force->x(), s.force->y()};
    for (const auto& [tag, v] : s.dirichlet) c["dirichlet"][std::string(tag_name(tag))] = {v.x(), v.y()};
    for (BoundaryTag tag : s.stress_free) c["stress_free"].push_back(std::string(tag_name(tag)));
    j["custom"] = c;
  }
  j["threads"] = assembly_threads();
  return j;
}

int run(const RunConfig& config, std::ostream& log) {
  config.params.validate();
  config.ssn.validate();
  const BenchmarkCase bench = build_case(config);
  check_mesh(bench.mesh);

  SSNConfig ssn = config.ssn;
  ssn.observer = [&log](int n, double absolute, double relative) {
    char line[96];
    std::snprintf(line, sizeof(line), "iter %3d  residual %.6e  relative %.6e", n, absolute, relative);
    log << line << '\n';
  };
  log << "case " << case_name(config.kind) << ", " << bench.mesh.num_cells() << " cells, model "
      << law_name(config.params.law) << '\n';
  const SolveResult result = ssn_solve(bench.mesh, config.params, bench.data, ssn);
  const SolveReport& report = result.report;
  log << (report.converged ? "converged" : "not converged") << " after " << report.iterations
      << " iterations; active cells " << report.active_cells << " of " << report.total_cells << '\n';

  nlohmann::json echo = run_config_to_json(config);
  echo.erase("threads");
  write_report(report, echo, config.out_dir, config.outputs);
  if (config.outputs.vtk)
    write_vtk(bench.mesh, result.layout, config.params, result.state, config.out_dir / "solution.vtk");
  return report.converged ? 0 : 1;
}

}  // namespace viscoflow

#include "viscoflow/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "viscoflow/assembly.hpp"

namespace viscoflow {

namespace {

// Shortest text that parses back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_vtk(const Mesh& mesh, const DofLayout& layout, const Params& params, const Eigen::VectorXd& state,
               std::ostream& out) {
  if (state.size() != layout.total_dofs) throw std::invalid_argument("state size does not match dof layout");
  const Index nc = mesh.num_cells();
  out << "# vtk DataFile Version 3.0\nviscoflow solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& v : mesh.vertices) out << fmt(v.x()) << ' ' << fmt(v.y()) << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const auto& c : mesh.cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (Index c = 0; c < nc; ++c) out << "5\n";

  const Eigen::Vector3d center = Eigen::Vector3d::Constant(1.0 / 3.0);
  const Eigen::Vector2d ref_center(1.0 / 3.0, 1.0 / 3.0);
  const ActiveSet active = active_set_stats(state, mesh, params);
  out << "CELL_DATA " << nc << '\n';
  out << "VECTORS velocity double\n";
  for (Index c = 0; c < nc; ++c) out << fmt(state[layout.u(c, 0)]) << ' ' << fmt(state[layout.u(c, 1)]) << " 0\n";

  const auto scalar_header = [&](const char* name, const char* type) {
    out << "SCALARS " << name << ' ' << type << " 1\nLOOKUP_TABLE default\n";
  };
  scalar_header("pressure", "double");
  for (Index c = 0; c < nc; ++c) out << fmt(state[layout.phi(c)]) << '\n';
  scalar_header("theta_norm", "double");
  for (Index c = 0; c < nc; ++c) out << fmt(p1_tensor_value(state, layout.begin(Field::Theta), c, center).norm()) << '\n';
  scalar_header("sigma_norm", "double");
  for (Index c = 0; c < nc; ++c) out << fmt(evaluate_sigma(mesh, layout, state, c, ref_center).norm()) << '\n';
  scalar_header("active", "int");
  for (Index c = 0; c < nc; ++c) out << static_cast<int>(active.active[c]) << '\n';
  scalar_header("q_norm", "double");
  for (Index c = 0; c < nc; ++c) out << fmt(p1_tensor_value(state, layout.begin(Field::Q), c, center).norm()) << '\n';
}

void write_vtk(const Mesh& mesh, const DofLayout& layout, const Params& params, const Eigen::VectorXd& state,
               const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_vtk(mesh, layout, params, state, out);
  finish(out, path);
}

VtkData read_vtk(std::istream& in) {
  VtkData data;
  std::string line;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated VTK header");
  }
  if (line != "DATASET UNSTRUCTURED_GRID") throw std::runtime_error("unsupported VTK dataset");
  const auto expect = [&](const std::string& keyword) {
    std::string word;
    if (!(in >> word) || word != keyword) throw std::runtime_error("expected " + keyword + " in VTK file");
  };
  const auto read_double = [&]() {
    std::string word;
    if (!(in >> word)) throw std::runtime_error("truncated VTK data");
    double v = 0.0;
    const auto [end, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || end != word.data() + word.size()) throw std::runtime_error("bad number '" + word + "'");
    return v;
  };

  std::string type;
  Index n = 0;
  expect("POINTS");
  in >> n >> type;
  data.points.resize(static_cast<std::size_t>(n));
  for (auto& p : data.points)
    for (int k = 0; k < 3; ++k) p[k] = read_double();
  Index nc = 0, total = 0;
  expect("CELLS");
  in >> nc >> total;
  data.cells.resize(static_cast<std::size_t>(nc));
  for (auto& c : data.cells) {
    Index k = 0;
    in >> k;
    c.resize(static_cast<std::size_t>(k));
    for (auto& v : c) in >> v;
  }
  expect("CELL_TYPES");
  in >> n;
  for (Index i = 0; i < n; ++i) in >> total;
  expect("CELL_DATA");
  in >> n;
  if (!in) throw std::runtime_error("malformed VTK file");

  std::string keyword, name;
  while (in >> keyword) {
    in >> name >> type;
    if (keyword == "VECTORS") {
      auto& values = data.vectors[name];
      values.resize(static_cast<std::size_t>(n));
      for (auto& v : values)
        for (int k = 0; k < 3; ++k) v[k] = read_double();
    } else if (keyword == "SCALARS") {
      int components = 0;
      in >> components;
      expect("LOOKUP_TABLE");
      in >> keyword;
      auto& values = data.scalars[name];
      values.resize(static_cast<std::size_t>(n));
      for (auto& v : values) v = read_double();
    } else {
      throw std::runtime_error("unsupported VTK section " + keyword);
    }
  }
  return data;
}

void write_residual_csv(const SolveReport& report, std::ostream& out) {
  out << "iteration,absolute,relative\r\n";
  for (std::size_t i = 0; i < report.residuals.size(); ++i)
    out << i << ',' << fmt(report.residuals[i]) << ',' << fmt(report.relative_residuals[i]) << "\r\n";
}

nlohmann::json params_to_json(const Params& params) {
  return {{"law", std::string(law_name(params.law))},
          {"p", params.p},
          {"mu", params.mu},
          {"tau_s", params.tau_s},
          {"gamma", params.gamma}};
}

nlohmann::json report_to_json(const SolveReport& report, const nlohmann::json& parameters) {
  return {{"iterations", report.iterations},
          {"converged", report.converged},
          {"active_cells", report.active_cells},
          {"total_cells", report.total_cells},
          {"active_fraction", report.active_fraction},
          {"residuals", report.residuals},
          {"relative_residuals", report.relative_residuals},
          {"max_projected_q", report.max_projected_q},
          {"multiplier_identity", report.multiplier_identity},
          {"parameters", parameters}};
}

SolveReport report_from_json(const nlohmann::json& j) {
  SolveReport r;
  r.iterations = j.at("iterations").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.active_cells = j.at("active_cells").get<Index>();
  r.total_cells = j.at("total_cells").get<Index>();
  r.active_fraction = j.at("active_fraction").get<double>();
  r.residuals = j.at("residuals").get<std::vector<double>>();
  r.relative_residuals = j.at("relative_residuals").get<std::vector<double>>();
  r.max_projected_q = j.at("max_projected_q").get<double>();
  r.multiplier_identity = j.at("multiplier_identity").get<double>();
  return r;
}

void write_residual_svg(const SolveReport& report, std::ostream& out) {
  constexpr double width = 640, height = 400, left = 70, right = 20, top = 20, bottom = 50;
  const auto& rel = report.relative_residuals;
  double lo = 0.0, hi = 0.0;  // decades
  for (double v : rel) {
    const double d = std::log10(std::max(v, 1e-300));
    lo = std::min(lo, std::floor(d));
    hi = std::max(hi, std::ceil(d));
  }
  if (hi - lo < 1.0) hi = lo + 1.0;
  const double n = std::max<double>(1.0, static_cast<double>(rel.size()) - 1.0);
  const auto px = [&](double i) { return left + (width - left - right) * i / n; };
  const auto py = [&](double v) {
    const double d = std::log10(std::max(v, 1e-300));
    return top + (height - top - bottom) * (hi - d) / (hi - lo);
  };
  const auto num = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  for (double d = lo; d <= hi; d += 1.0) {
    const double y = top + (height - top - bottom) * (hi - d) / (hi - lo);
    out << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << width - right << "\" y2=\"" << num(y)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4) << "\" font-size=\"11\" text-anchor=\"end\">1e"
        << static_cast<int>(d) << "</text>\n";
  }
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n";
  out << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (top + height - bottom) / 2
      << ")\">relative residual</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < rel.size(); ++i) out << (i ? " " : "") << num(px(double(i))) << ',' << num(py(rel[i]));
  out << "\"/>\n";
  for (std::size_t i = 0; i < rel.size(); ++i)
    out << "<circle cx=\"" << num(px(double(i))) << "\" cy=\"" << num(py(rel[i])) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  out << "</svg>\n";
}

void write_report(const SolveReport& report, const nlohmann::json& parameters, const std::filesystem::path& dir,
                  const OutputToggles& toggles) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  if (toggles.residual_csv) {
    const auto path = dir / "residuals.csv";
    auto out = open_for_write(path);
    write_residual_csv(report, out);
    finish(out, path);
  }
  if (toggles.stats_json) {
    const auto path = dir / "stats.json";
    auto out = open_for_write(path);
    out << report_to_json(report, parameters).dump(2) << '\n';
    finish(out, path);
  }
  if (toggles.residual_svg) {
    const auto path = dir / "residuals.svg";
    auto out = open_for_write(path);
    write_residual_svg(report, out);
    finish(out, path);
  }
}

}  // namespace viscoflow

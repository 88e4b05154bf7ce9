#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "viscoflow/fem.hpp"
#include "viscoflow/mesh.hpp"
#include "viscoflow/rheology.hpp"
#include "viscoflow/solver.hpp"

namespace viscoflow {

/// Legacy ASCII VTK with per-cell fields: velocity, pressure, theta_norm,
/// sigma_norm (both at the barycenter), active (0/1) and q_norm.
void write_vtk(const Mesh& mesh, const DofLayout& layout, const Params& params, const Eigen::VectorXd& state,
               std::ostream& out);
void write_vtk(const Mesh& mesh, const DofLayout& layout, const Params& params, const Eigen::VectorXd& state,
               const std::filesystem::path& path);

/// What read_vtk recovers from a file written by write_vtk.
struct VtkData {
  std::vector<Eigen::Vector3d> points;
  std::vector<std::vector<Index>> cells;
  std::map<std::string, std::vector<double>> scalars;
  std::map<std::string, std::vector<Eigen::Vector3d>> vectors;
};

/// Minimal reader for the unstructured-grid files this library writes.
VtkData read_vtk(std::istream& in);

/// iteration,absolute,relative; one row per entry of report.residuals.
void write_residual_csv(const SolveReport& report, std::ostream& out);

/// Solve statistics plus the echoed run parameters.
nlohmann::json report_to_json(const SolveReport& report, const nlohmann::json& parameters = nlohmann::json::object());
SolveReport report_from_json(const nlohmann::json& j);

/// Relative residual history on a log axis.
void write_residual_svg(const SolveReport& report, std::ostream& out);

nlohmann::json params_to_json(const Params& params);

struct OutputToggles {
  bool vtk = true;
  bool residual_csv = true;
  bool stats_json = true;
  bool residual_svg = true;
};

/// Writes residuals.csv, stats.json and residuals.svg into `dir` as toggled.
/// Throws std::runtime_error when a file cannot be written.
void write_report(const SolveReport& report, const nlohmann::json& parameters, const std::filesystem::path& dir,
                  const OutputToggles& toggles = {});

}  // namespace viscoflow

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "viscoflow/cases.hpp"
#include "viscoflow/output.hpp"
#include "viscoflow/solver.hpp"

namespace viscoflow {

/// Invalid or incomplete run configuration.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mesh and data of the custom case: a crossed rectangle with constant load
/// and constant boundary velocities per side.
struct CustomSpec {
  std::optional<Rect> rect;
  Index ny = 0;  // 0: same as nx
  std::optional<Eigen::Vector2d> force;
  std::map<BoundaryTag, Eigen::Vector2d> dirichlet;
  std::vector<BoundaryTag> stress_free;
};

struct RunConfig {
  CaseKind kind = CaseKind::Reservoir;
  Index nx = 32;
  Params params = default_params(CaseKind::Reservoir);
  SSNConfig ssn;
  ChannelGeometry channel;
  CustomSpec custom;
  std::filesystem::path out_dir = "viscoflow_out";
  OutputToggles outputs;
};

BoundaryTag parse_boundary_tag(std::string_view name);
InitMode parse_init(std::string_view name);
std::string_view init_name(InitMode mode);

/// "x0,x1,y0,y1" and "a,b" parsers used for flags and config values.
Rect parse_rect(const std::string& text);
Eigen::Vector2d parse_vector(const std::string& text);

/// Mesh and data for the configured case. Throws UsageError for a custom
/// case without a mesh or without any data.
BenchmarkCase build_case(const RunConfig& config);

/// Echo of every parameter that determines the run.
nlohmann::json run_config_to_json(const RunConfig& config);

/// Builds the case, solves, prints one line per iteration to `log` and writes
/// the toggled outputs. Returns 0 on convergence and 1 otherwise; invalid
/// input, I/O and solver failures propagate as exceptions.
int run(const RunConfig& config, std::ostream& log);

}  // namespace viscoflow

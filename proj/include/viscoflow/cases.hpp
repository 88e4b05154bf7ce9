#pragma once

#include <string>
#include <string_view>

#include "viscoflow/assembly.hpp"
#include "viscoflow/mesh.hpp"
#include "viscoflow/rheology.hpp"

namespace viscoflow {

enum class CaseKind { Reservoir, Cavity, Channel, Custom };

std::string_view case_name(CaseKind kind);
CaseKind parse_case(std::string_view name);

/// Rotating load f = 300 (y - 0.5, 0.5 - x) in the unit square, u = 0 on the boundary.
ProblemData reservoir_data();

/// Lid-driven cavity: u = (1, 0) on the top edge, zero elsewhere, no load.
ProblemData cavity_data();

/// Parabolic inflow (1 - (y/H)^2, 0), no-slip walls, stress-free outflow.
ProblemData channel_data(double half_height = 1.0);

struct ChannelGeometry {
  double length = 4.0;
  double half_height = 1.0;
  double ratio = 0.5;
};

/// Mesh and data of a preset; `nx` is cells per side for the square cases and
/// cells per unit length for the channel.
struct BenchmarkCase {
  Mesh mesh;
  ProblemData data;
};

BenchmarkCase make_case(CaseKind kind, Index nx, const ChannelGeometry& channel = {});

/// Parameters the presets start from before flag overrides.
Params default_params(CaseKind kind);

}  // namespace viscoflow

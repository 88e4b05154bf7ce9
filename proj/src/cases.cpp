#include "viscoflow/cases.hpp"

#include <stdexcept>

namespace viscoflow {

std::string_view case_name(CaseKind kind) {
  switch (kind) {
    case CaseKind::Reservoir:
      return "reservoir";
    case CaseKind::Cavity:
      return "cavity";
    case CaseKind::Channel:
      return "channel";
    case CaseKind::Custom:
      return "custom";
  }
  return "unknown";
}

CaseKind parse_case(std::string_view name) {
  if (name == "reservoir") return CaseKind::Reservoir;
  if (name == "cavity") return CaseKind::Cavity;
  if (name == "channel") return CaseKind::Channel;
  if (name == "custom") return CaseKind::Custom;
  throw std::invalid_argument("unknown case '" + std::string(name) + "'");
}

ProblemData reservoir_data() {
  ProblemData data;
  data.force = [](const Eigen::Vector2d& x) { return Eigen::Vector2d(300.0 * (x.y() - 0.5), 300.0 * (0.5 - x.x())); };
  return data;
}

ProblemData cavity_data() {
  ProblemData data;
  data.dirichlet = [](const Eigen::Vector2d&, BoundaryTag tag) {
    return tag == BoundaryTag::Top ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d::Zero();
  };
  return data;
}

ProblemData channel_data(double half_height) {
  ProblemData data;
  data.dirichlet = [half_height](const Eigen::Vector2d& x, BoundaryTag tag) {
    if (tag != BoundaryTag::Inflow) return Eigen::Vector2d::Zero().eval();
    const double s = x.y() / half_height;
    return Eigen::Vector2d(1.0 - s * s, 0.0);
  };
  data.kinds[BoundaryTag::Outflow] = BoundaryKind::StressFree;
  return data;
}

BenchmarkCase make_case(CaseKind kind, Index nx, const ChannelGeometry& channel) {
  if (nx < 1) throw std::invalid_argument("mesh resolution must be positive");
  switch (kind) {
    case CaseKind::Reservoir:
      return {build_crossed_rect(nx, nx), reservoir_data()};
    case CaseKind::Cavity:
      return {build_crossed_rect(nx, nx), cavity_data()};
    case CaseKind::Channel:
      return {build_channel(channel.length, channel.half_height, channel.ratio, nx), channel_data(channel.half_height)};
    case CaseKind::Custom:
      break;
  }
  throw std::invalid_argument("the custom case has no preset mesh or data");
}

Params default_params(CaseKind kind) {
  Params p;
  p.gamma = 1e3;
  switch (kind) {
    case CaseKind::Reservoir:
      p.p = 1.75;
      p.tau_s = 10.0;
      break;
    case CaseKind::Cavity:
      p.p = 1.75;
      p.tau_s = 2.5;
      break;
    case CaseKind::Channel:
      p.law = Law::Casson;
      p.p = 2.0;
      p.tau_s = 2.5;
      break;
    case CaseKind::Custom:
      break;
  }
  return p;
}

}  // namespace viscoflow

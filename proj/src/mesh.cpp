#include "viscoflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace viscoflow {

std::string_view tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Left: return "left";
    case BoundaryTag::Right: return "right";
    case BoundaryTag::Bottom: return "bottom";
    case BoundaryTag::Top: return "top";
    case BoundaryTag::Wall: return "wall";
    case BoundaryTag::Inflow: return "inflow";
    case BoundaryTag::Outflow: return "outflow";
  }
  return "unknown";
}

Eigen::Vector2d Mesh::barycenter(Index cell) const {
  const auto& c = cells[cell];
  return (vertices[c[0]] + vertices[c[1]] + vertices[c[2]]) / 3.0;
}

Eigen::Vector2d Mesh::edge_midpoint(Index edge) const {
  return 0.5 * (vertices[edges[edge][0]] + vertices[edges[edge][1]]);
}

namespace {

using Tagger = std::function<BoundaryTag(const Eigen::Vector2d& midpoint)>;

// Builds edges, incidence and tags from vertices + counterclockwise cells.
Mesh finalize(std::vector<Eigen::Vector2d> vertices, std::vector<std::array<Index, 3>> cells,
              const Tagger& tagger) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells = std::move(cells);
  mesh.cell_edges.resize(mesh.cells.size());

  std::map<std::pair<Index, Index>, Index> lookup;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    for (int j = 0; j < 3; ++j) {
      const Index a = cell[(j + 1) % 3];
      const Index b = cell[(j + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, mesh.num_edges());
      if (inserted) {
        mesh.edges.push_back({key.first, key.second});
        mesh.edge_cells.push_back({c, -1});
      } else {
        auto& owners = mesh.edge_cells[it->second];
        if (owners[1] >= 0) throw std::logic_error("edge shared by more than two cells");
        owners[1] = c;
      }
      mesh.cell_edges[c][j] = CellEdge{it->second, a < b ? 1 : -1};
    }
  }

  mesh.edge_tags.assign(mesh.edges.size(), BoundaryTag::Interior);
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.is_boundary(e)) mesh.edge_tags[e] = tagger(mesh.edge_midpoint(e));
  }
  return mesh;
}

// Crossed blocks on the tensor grid xs x ys; `keep(i, j)` selects block (i, j).
Mesh crossed_blocks(const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::function<bool(std::size_t, std::size_t)>& keep,
                    const Tagger& tagger) {
  const std::size_t nx = xs.size() - 1;
  const std::size_t ny = ys.size() - 1;
  std::vector<Index> corner_id((nx + 1) * (ny + 1), -1);
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<Index, 3>> cells;

  auto corner = [&](std::size_t i, std::size_t j) {
    Index& id = corner_id[j * (nx + 1) + i];
    if (id < 0) {
      id = static_cast<Index>(vertices.size());
      vertices.emplace_back(xs[i], ys[j]);
    }
    return id;
  };

  // Corners first (row-major) so vertex numbering does not depend on block order.
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      const bool used = (i > 0 && j > 0 && keep(i - 1, j - 1)) || (i < nx && j > 0 && keep(i, j - 1)) ||
                        (i > 0 && j < ny && keep(i - 1, j)) || (i < nx && j < ny && keep(i, j));
      if (used) corner(i, j);
    }
  }
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      if (!keep(i, j)) continue;
      const Index sw = corner(i, j), se = corner(i + 1, j);
      const Index ne = corner(i + 1, j + 1), nw = corner(i, j + 1);
      const Index center = static_cast<Index>(vertices.size());
      vertices.emplace_back(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
      cells.push_back({sw, se, center});
      cells.push_back({se, ne, center});
      cells.push_back({ne, nw, center});
      cells.push_back({nw, sw, center});
    }
  }
  return finalize(std::move(vertices), std::move(cells), tagger);
}

std::vector<double> linspace(double a, double b, Index n) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (Index i = 0; i <= n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
  out.back() = b;
  return out;
}

// Appends the open-left segment (a, b] split into n pieces.
void append_segment(std::vector<double>& coords, double a, double b, Index n) {
  if (n <= 0) return;
  auto piece = linspace(a, b, n);
  coords.insert(coords.end(), piece.begin() + 1, piece.end());
}

}  // namespace

Mesh build_crossed_rect(Index nx, Index ny, const Rect& bounds) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("crossed mesh needs at least one cell per direction");
  if (!(bounds.x1 > bounds.x0) || !(bounds.y1 > bounds.y0))
    throw std::invalid_argument("degenerate rectangle");
  const auto xs = linspace(bounds.x0, bounds.x1, nx);
  const auto ys = linspace(bounds.y0, bounds.y1, ny);
  const double tol = 1e-12 * std::max(bounds.x1 - bounds.x0, bounds.y1 - bounds.y0);
  const Tagger tagger = [bounds, tol](const Eigen::Vector2d& m) {
    if (std::abs(m.y() - bounds.y0) < tol) return BoundaryTag::Bottom;
    if (std::abs(m.y() - bounds.y1) < tol) return BoundaryTag::Top;
    if (std::abs(m.x() - bounds.x0) < tol) return BoundaryTag::Left;
    return BoundaryTag::Right;
  };
  return crossed_blocks(xs, ys, [](std::size_t, std::size_t) { return true; }, tagger);
}

Mesh build_channel(double length, double half_height, double contraction_ratio, Index resolution) {
  if (!(contraction_ratio > 0.0 && contraction_ratio < 1.0))
    throw std::invalid_argument("contraction ratio must lie in (0, 1)");
  if (resolution < 2) throw std::invalid_argument("channel resolution must be at least 2");
  if (!(length > 0.0) || !(half_height > 0.0)) throw std::invalid_argument("channel dimensions must be positive");

  const double res = static_cast<double>(resolution);
  const Index n_third = std::max<Index>(1, std::llround(res * length / 3.0));
  const double inner = contraction_ratio * half_height;
  const Index n_inner = std::max<Index>(1, std::llround(res * 2.0 * inner));
  const Index n_outer = std::llround(res * (half_height - inner));

  std::vector<double> xs{0.0};
  append_segment(xs, 0.0, length / 3.0, n_third);
  append_segment(xs, length / 3.0, 2.0 * length / 3.0, n_third);
  append_segment(xs, 2.0 * length / 3.0, length, n_third);

  std::vector<double> ys{-half_height};
  if (n_outer > 0) {
    append_segment(ys, -half_height, -inner, n_outer);
  } else {
    ys.front() = -inner;
  }
  append_segment(ys, -inner, inner, n_inner);
  append_segment(ys, inner, half_height, n_outer);

  const std::size_t x_lo = static_cast<std::size_t>(n_third);
  const std::size_t x_hi = static_cast<std::size_t>(2 * n_third);
  const std::size_t y_lo = static_cast<std::size_t>(n_outer);
  const std::size_t y_hi = static_cast<std::size_t>(n_outer + n_inner);
  const auto keep = [=](std::size_t i, std::size_t j) {
    const bool middle = i >= x_lo && i < x_hi;
    return !middle || (j >= y_lo && j < y_hi);
  };
  const double tol = 1e-12 * std::max(length, half_height);
  const Tagger tagger = [length, tol](const Eigen::Vector2d& m) {
    if (std::abs(m.x()) < tol) return BoundaryTag::Inflow;
    if (std::abs(m.x() - length) < tol) return BoundaryTag::Outflow;
    return BoundaryTag::Wall;
  };
  return crossed_blocks(xs, ys, keep, tagger);
}

CellGeometry cell_geometry(const Mesh& mesh, Index cell) {
  if (cell < 0 || cell >= mesh.num_cells()) throw std::invalid_argument("cell index out of range");
  const auto& c = mesh.cells[cell];
  const Eigen::Vector2d& a = mesh.vertices[c[0]];
  const Eigen::Vector2d& b = mesh.vertices[c[1]];
  const Eigen::Vector2d& d = mesh.vertices[c[2]];

  CellGeometry g;
  g.origin = a;
  g.jacobian.col(0) = b - a;
  g.jacobian.col(1) = d - a;
  g.det = g.jacobian.determinant();
  if (!(g.det > 0.0)) throw std::invalid_argument("degenerate or clockwise cell");
  g.inv_transpose = g.jacobian.inverse().transpose();
  g.area = 0.5 * g.det;
  const std::array<Eigen::Vector2d, 3> pts{a, b, d};
  for (int j = 0; j < 3; ++j) {
    const Eigen::Vector2d tangent = pts[(j + 2) % 3] - pts[(j + 1) % 3];
    g.edge_lengths[j] = tangent.norm();
    // Counterclockwise traversal: outward normal is the tangent turned clockwise.
    g.edge_normals[j] = Eigen::Vector2d(tangent.y(), -tangent.x()) / g.edge_lengths[j];
  }
  return g;
}

double total_area(const Mesh& mesh) {
  double area = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) area += cell_geometry(mesh, c).area;
  return area;
}

void check_mesh(const Mesh& mesh) {
  if (mesh.cells.empty()) throw std::logic_error("mesh has no cells");
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    if (!(cell_geometry(mesh, c).det > 0.0)) throw std::logic_error("cell with non-positive area");
    for (int j = 0; j < 3; ++j) {
      const auto [edge, sign] = mesh.cell_edges[c][j];
      const auto& owners = mesh.edge_cells[edge];
      if (owners[0] != c && owners[1] != c) throw std::logic_error("edge incidence mismatch");
      const Index a = mesh.cells[c][(j + 1) % 3];
      const Index b = mesh.cells[c][(j + 2) % 3];
      if ((a < b ? 1 : -1) != sign) throw std::logic_error("edge sign mismatch");
    }
  }
  std::vector<int> uses(mesh.edges.size(), 0);
  for (const auto& ce : mesh.cell_edges)
    for (const auto& e : ce) ++uses[e.edge];
  for (Index e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e][0] >= mesh.edges[e][1]) throw std::logic_error("edge not oriented low to high");
    const int expected = mesh.is_boundary(e) ? 1 : 2;
    if (uses[e] != expected) throw std::logic_error("edge multiplicity mismatch");
    if (mesh.is_boundary(e) == (mesh.edge_tags[e] == BoundaryTag::Interior))
      throw std::logic_error("boundary tag inconsistent with incidence");
  }
}

void write_mesh_vtk(const Mesh& mesh, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\nviscoflow mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out.precision(17);
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << " 0\n";
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (Index c = 0; c < mesh.num_cells(); ++c) out << "5\n";
}

}  // namespace viscoflow

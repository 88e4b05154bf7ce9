#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace viscoflow {

using Index = std::int64_t;

enum class BoundaryTag : std::uint8_t { Interior, Left, Right, Bottom, Top, Wall, Inflow, Outflow };

std::string_view tag_name(BoundaryTag tag);

/// Global edge seen from a cell. `sign` is +1 when the local counterclockwise
/// traversal agrees with the global low-to-high vertex orientation.
struct CellEdge {
  Index edge;
  int sign;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
};

/// Conforming triangulation in 2D.
///
/// Local edge j of a cell joins its vertices (j+1)%3 and (j+2)%3, i.e. it is
/// the edge opposite local vertex j. Cells are counterclockwise.
struct Mesh {
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<Index, 3>> cells;
  std::vector<std::array<Index, 2>> edges;  // (low, high) vertex indices
  std::vector<std::array<CellEdge, 3>> cell_edges;
  std::vector<std::array<Index, 2>> edge_cells;  // second entry -1 on the boundary
  std::vector<BoundaryTag> edge_tags;            // Interior for interior edges

  Index num_vertices() const { return static_cast<Index>(vertices.size()); }
  Index num_cells() const { return static_cast<Index>(cells.size()); }
  Index num_edges() const { return static_cast<Index>(edges.size()); }
  bool is_boundary(Index edge) const { return edge_cells[edge][1] < 0; }
  Eigen::Vector2d barycenter(Index cell) const;
  Eigen::Vector2d edge_midpoint(Index edge) const;
};

/// Affine map data of one cell relative to the reference triangle
/// {(0,0), (1,0), (0,1)}.
struct CellGeometry {
  Eigen::Matrix2d jacobian;
  double det = 0.0;
  Eigen::Matrix2d inv_transpose;
  double area = 0.0;
  std::array<Eigen::Vector2d, 3> edge_normals;  // outward unit normals, local edge order
  std::array<double, 3> edge_lengths{};
  Eigen::Vector2d origin;

  Eigen::Vector2d map(const Eigen::Vector2d& ref) const { return origin + jacobian * ref; }
};

/// Crossed-pattern triangulation: every one of the nx*ny rectangles is split into
/// four triangles meeting at its barycenter. Sides are tagged left/right/bottom/top.
Mesh build_crossed_rect(Index nx, Index ny, const Rect& bounds = {});

/// Symmetric channel y in [-half_height, half_height], x in [0, length], whose
/// middle third narrows to contraction_ratio * half_height. Meshed with crossed
/// blocks at roughly `resolution` blocks per unit length. Tags: inflow at x = 0,
/// outflow at x = length, wall elsewhere.
Mesh build_channel(double length, double half_height, double contraction_ratio, Index resolution);

CellGeometry cell_geometry(const Mesh& mesh, Index cell);

/// Throws std::logic_error when a structural invariant is violated.
void check_mesh(const Mesh& mesh);

double total_area(const Mesh& mesh);

/// Legacy ASCII VTK unstructured grid (triangles only, no data).
void write_mesh_vtk(const Mesh& mesh, std::ostream& out);

}  // namespace viscoflow

#pragma once

// Reference domains discretized on a masked uniform grid.
//
// A cell is active when its center lies inside the domain. Nodes touching
// only active cells are Interior (free unknowns); nodes touching both active
// and inactive cells are Boundary (Dirichlet) and are moved onto the exact
// boundary curve, so cells along the boundary are general bilinear quads.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ldg/qtensor.hpp"

namespace ldg {

struct Disk {
  double radius = 1.0;
};

struct Ellipse {
  double a = 1.0;  // semi-axis along x
  double b = 0.5;  // semi-axis along y
};

struct RoundedRect {
  double width = 2.0;
  double height = 1.0;
  double corner_radius = 0.2;
};

/// A closed C^1 (piecewise C-infinity) convex curve with a center.
struct ShapeSpec {
  std::variant<Disk, Ellipse, RoundedRect> kind = Disk{};
  Vec2 center{};

  std::string name() const;
  bool is_disk() const { return std::holds_alternative<Disk>(kind); }
};

struct BoundaryPoint {
  Vec2 point;   // closest point on the curve
  Vec2 normal;  // outward unit normal there
  double t = 0; // arc-length parameter in [0, 1), t = 0 on the +x axis from the center
};

/// Analytic geometry of a shape: signed distance, projection, arc length.
class Shape {
 public:
  explicit Shape(ShapeSpec spec);

  const ShapeSpec& spec() const { return spec_; }
  double signed_distance(Vec2 x) const;
  BoundaryPoint project(Vec2 x) const;
  Vec2 point_at(double t) const;
  double perimeter() const { return perimeter_; }
  double area() const;
  double min_feature() const;
  std::array<double, 4> bounding_box() const;  // xmin, xmax, ymin, ymax

 private:
  // Local (centered) geometry.
  double sd_local(Vec2 x) const;
  BoundaryPoint project_local(Vec2 x) const;

  ShapeSpec spec_;
  double perimeter_ = 0.0;
  // Ellipse arc-length table: cumulative length at uniformly spaced parametric angles.
  std::vector<double> ellipse_arc_;
};

enum class NodeKind : std::uint8_t { Exterior = 0, Interior = 1, Boundary = 2 };

/// Shape-function derivatives and quadrature weight at one Gauss point.
struct GaussGeometry {
  std::array<double, 4> dndx{};  // corner order: (i,j), (i+1,j), (i+1,j+1), (i,j+1)
  std::array<double, 4> dndy{};
  double weight = 0.0;
};

using CellGeometry = std::array<GaussGeometry, 4>;

class Grid {
 public:
  /// resolution = nodes per unit length.
  static std::shared_ptr<const Grid> build(const ShapeSpec& shape, double resolution);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int num_nodes() const { return nx_ * ny_; }
  int num_cells() const { return (nx_ - 1) * (ny_ - 1); }
  double h() const { return h_; }
  double resolution() const { return 1.0 / h_; }
  const Shape& shape() const { return shape_; }

  int node(int i, int j) const { return j * nx_ + i; }
  int cell(int i, int j) const { return j * (nx_ - 1) + i; }
  int node_i(int n) const { return n % nx_; }
  int node_j(int n) const { return n / nx_; }

  NodeKind kind(int n) const { return kind_[n]; }
  bool active(int n) const { return kind_[n] != NodeKind::Exterior; }
  bool interior(int n) const { return kind_[n] == NodeKind::Interior; }
  /// Position (snapped onto the curve for boundary nodes).
  Vec2 position(int n) const { return pos_[n]; }
  /// Lattice position ignoring snapping.
  Vec2 lattice(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }

  bool cell_active(int c) const { return cell_geom_[c] >= 0; }
  const CellGeometry& geometry(int c) const { return geom_table_[cell_geom_[c]]; }
  /// True if the cell is an undistorted h x h square.
  bool cell_uniform(int c) const { return cell_geom_[c] == 0; }
  std::array<int, 4> cell_nodes(int c) const;

  /// Lumped (trapezoid) nodal quadrature weight: a quarter of the area of each incident cell.
  double node_weight(int n) const { return node_weight_[n]; }
  double discrete_area() const;

  // Boundary loop, counterclockwise.
  const std::vector<int>& boundary_loop() const { return loop_; }
  int boundary_size() const { return static_cast<int>(loop_.size()); }
  /// Index of a node within the boundary loop, -1 if not on it.
  int loop_index(int n) const { return loop_index_[n]; }
  Vec2 boundary_normal(int k) const { return loop_normal_[k]; }
  /// Counterclockwise unit tangent, the normal rotated by +90 degrees.
  Vec2 boundary_tangent(int k) const { return {-loop_normal_[k].y, loop_normal_[k].x}; }
  double boundary_t(int k) const { return loop_t_[k]; }
  /// Trapezoid weight (half the adjacent polyline edge lengths).
  double boundary_ds(int k) const { return loop_ds_[k]; }

  int count(NodeKind kind) const;

  /// Locates the active cell containing x and the reference coordinates within it.
  /// Returns false if x is outside the discrete domain.
  bool locate(Vec2 x, int& cell, double& xi, double& eta) const;

 private:
  Grid(ShapeSpec spec) : shape_(std::move(spec)) {}

  Shape shape_;
  int nx_ = 0, ny_ = 0;
  double h_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  std::vector<NodeKind> kind_;
  std::vector<Vec2> pos_;
  std::vector<int> cell_geom_;  // -1 inactive, 0 uniform, >0 table index
  std::vector<CellGeometry> geom_table_;
  std::vector<double> node_weight_;
  std::vector<int> loop_;
  std::vector<int> loop_index_;
  std::vector<Vec2> loop_normal_;
  std::vector<double> loop_t_;
  std::vector<double> loop_ds_;
};

/// Evaluates the isoparametric bilinear map of a cell at reference coordinates.
Vec2 map_to_physical(const Grid& grid, int cell, double xi, double eta);

}  // namespace ldg

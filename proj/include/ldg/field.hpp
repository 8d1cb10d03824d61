#pragma once

// Nodal fields on a Grid. Values are interleaved per node: an LdG field
// stores (p1, p2, r), a Ginzburg-Landau or CSH field stores (v1, v2).

#include <functional>
#include <memory>
#include <vector>

#include "ldg/grid.hpp"

namespace ldg {

/// Dirichlet trace on the boundary loop, indexed by loop position.
struct BoundaryData {
  double s = 1.0;
  int k = 0;
  double offset = 0.0;
  std::vector<Vec2> p0;
  std::vector<double> r0;
};

/// p0 = (s/2)(cos 2a(t), sin 2a(t)) with a(t) = pi k t + offset/2, r0 = s/3.
BoundaryData make_boundary_data(const Grid& grid, double s, int k, double offset = 0.0);

/// Boundary data with a caller-supplied p0; r0 = s/3. `k` is the declared winding.
BoundaryData make_boundary_data(const Grid& grid, double s, int k,
                                const std::function<Vec2(const BoundaryPoint&)>& p0);

/// Winding of p0 along the loop. Throws PhaseJumpTooLarge if a single
/// increment reaches pi/2 in magnitude.
int boundary_degree(const BoundaryData& data);

/// Winding number of a closed sequence of planar vectors: sum of
/// principal-branch phase increments divided by 2 pi.
/// Throws PhaseJumpTooLarge if an increment reaches max_jump in magnitude
/// or a vector is shorter than min_modulus.
int winding_number(const std::vector<Vec2>& values, double min_modulus = 0.0,
                   double max_jump = 1.5707963267948966);

class Field {
 public:
  Field() = default;
  Field(std::shared_ptr<const Grid> grid, int ncomp);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  int ncomp() const { return ncomp_; }
  int size() const { return static_cast<int>(v_.size()); }

  double& operator()(int node, int c) { return v_[static_cast<std::size_t>(node) * ncomp_ + c]; }
  double operator()(int node, int c) const { return v_[static_cast<std::size_t>(node) * ncomp_ + c]; }
  Vec2 p(int node) const { return {(*this)(node, 0), (*this)(node, 1)}; }
  double r(int node) const { return (*this)(node, 2); }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  /// Writes the trace on boundary nodes (p0 and, for three components, r0).
  void apply_boundary(const BoundaryData& data);
  /// True if every boundary node equals the trace bit for bit.
  bool matches_boundary(const BoundaryData& data) const;

 private:
  std::shared_ptr<const Grid> grid_;
  int ncomp_ = 0;
  std::vector<double> v_;
};

/// Field with (p1, p2, r) per node.
inline Field make_pr_field(std::shared_ptr<const Grid> grid) { return Field(std::move(grid), 3); }
/// Field with a planar vector per node.
inline Field make_vector_field(std::shared_ptr<const Grid> grid) { return Field(std::move(grid), 2); }

}  // namespace ldg

#include "ldg/field.hpp"

#include <cmath>
#include <numbers>

#include "ldg/error.hpp"

namespace ldg {

BoundaryData make_boundary_data(const Grid& grid, double s, int k, double offset) {
  BoundaryData out;
  out.s = s;
  out.k = k;
  out.offset = offset;
  const int nb = grid.boundary_size();
  out.p0.resize(nb);
  out.r0.assign(nb, s / 3.0);
  for (int i = 0; i < nb; ++i) {
    const double phase = 2.0 * std::numbers::pi * k * grid.boundary_t(i) + offset;
    out.p0[i] = {0.5 * s * std::cos(phase), 0.5 * s * std::sin(phase)};
  }
  return out;
}

BoundaryData make_boundary_data(const Grid& grid, double s, int k,
                                const std::function<Vec2(const BoundaryPoint&)>& p0) {
  BoundaryData out;
  out.s = s;
  out.k = k;
  const int nb = grid.boundary_size();
  out.p0.resize(nb);
  out.r0.assign(nb, s / 3.0);
  for (int i = 0; i < nb; ++i) {
    const int n = grid.boundary_loop()[i];
    out.p0[i] = p0({grid.position(n), grid.boundary_normal(i), grid.boundary_t(i)});
  }
  return out;
}

int winding_number(const std::vector<Vec2>& values, double min_modulus, double max_jump) {
  const std::size_t n = values.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "winding needs a loop of at least 3 samples");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = values[i];
    const Vec2 b = values[(i + 1) % n];
    if (norm(a) < min_modulus || norm(a) == 0.0) {
      throw Error(ErrorCode::PhaseJumpTooLarge, "loop passes through a region of small |p|");
    }
    // Principal branch of arg(b / a) in (-pi, pi].
    const double d = std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
    if (std::abs(d) >= max_jump) {
      throw Error(ErrorCode::PhaseJumpTooLarge, "phase increment too large; loop sampled too coarsely");
    }
    total += d;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

int boundary_degree(const BoundaryData& data) {
  return winding_number(data.p0, 0.25 * std::abs(data.s));
}

Field::Field(std::shared_ptr<const Grid> grid, int ncomp) : grid_(std::move(grid)), ncomp_(ncomp) {
  if (ncomp < 1) throw Error(ErrorCode::InvalidArgument, "field needs at least one component");
  v_.assign(static_cast<std::size_t>(grid_->num_nodes()) * ncomp, 0.0);
}

void Field::apply_boundary(const BoundaryData& data) {
  const auto& loop = grid_->boundary_loop();
  if (data.p0.size() != loop.size()) {
    throw Error(ErrorCode::InvalidArgument, "boundary data does not match the grid");
  }
  for (std::size_t i = 0; i < loop.size(); ++i) {
    (*this)(loop[i], 0) = data.p0[i].x;
    (*this)(loop[i], 1) = data.p0[i].y;
    if (ncomp_ >= 3) (*this)(loop[i], 2) = data.r0[i];
  }
}

bool Field::matches_boundary(const BoundaryData& data) const {
  const auto& loop = grid_->boundary_loop();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    if ((*this)(loop[i], 0) != data.p0[i].x || (*this)(loop[i], 1) != data.p0[i].y) return false;
    if (ncomp_ >= 3 && (*this)(loop[i], 2) != data.r0[i]) return false;
  }
  return true;
}

}  // namespace ldg

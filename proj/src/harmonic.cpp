#include "ldg/harmonic.hpp"

#include <cmath>
#include <numbers>

#include "ldg/error.hpp"

namespace ldg {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Element stiffness entries, visited once per active cell.
template <class F>
void for_each_stiffness(const Grid& g, F&& f) {
  for (int c = 0; c < g.num_cells(); ++c) {
    if (!g.cell_active(c)) continue;
    const auto nodes = g.cell_nodes(c);
    double ke[4][4] = {};
    for (const GaussGeometry& gp : g.geometry(c))
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) ke[a][b] += gp.weight * (gp.dndx[a] * gp.dndx[b] + gp.dndy[a] * gp.dndy[b]);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) f(nodes[a], nodes[b], ke[a][b]);
  }
}

std::vector<int> interior_nodes(const Grid& g, std::vector<int>* index) {
  std::vector<int> out;
  if (index) index->assign(g.num_nodes(), -1);
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (!g.interior(n)) continue;
    if (index) (*index)[n] = static_cast<int>(out.size());
    out.push_back(n);
  }
  return out;
}

}  // namespace

LaplaceSolver::LaplaceSolver(std::shared_ptr<const Grid> grid) : grid_(std::move(grid)) {
  const Grid& g = *grid_;
  interior_ = interior_nodes(g, &interior_index_);
  const int ni = num_interior(), nb = g.boundary_size();
  Triplets tii, tib, tbb;
  for_each_stiffness(g, [&](int a, int b, double v) {
    const int ia = interior_index_[a], ib = interior_index_[b];
    const int la = g.loop_index(a), lb = g.loop_index(b);
    if (ia >= 0 && ib >= 0) tii.emplace_back(ia, ib, v);
    else if (ia >= 0 && lb >= 0) tib.emplace_back(ia, lb, v);
    else if (la >= 0 && lb >= 0) tbb.emplace_back(la, lb, v);
  });
  Kii_.resize(ni, ni);
  Kii_.setFromTriplets(tii.begin(), tii.end());
  Kib_.resize(ni, nb);
  Kib_.setFromTriplets(tib.begin(), tib.end());
  Kbb_.resize(nb, nb);
  Kbb_.setFromTriplets(tbb.begin(), tbb.end());
  ldlt_.compute(Kii_);
  if (ldlt_.info() != Eigen::Success) throw Error(ErrorCode::GridTopology, "stiffness matrix is singular");
}

std::vector<double> LaplaceSolver::solve(const std::vector<double>& boundary_values) const {
  const Grid& g = *grid_;
  if (static_cast<int>(boundary_values.size()) != g.boundary_size()) {
    throw Error(ErrorCode::InvalidArgument, "boundary values do not match the loop");
  }
  const Eigen::Map<const Eigen::VectorXd> gb(boundary_values.data(), g.boundary_size());
  const Eigen::VectorXd ui = ldlt_.solve(-(Kib_ * gb));
  std::vector<double> u(g.num_nodes(), 0.0);
  for (int i = 0; i < num_interior(); ++i) u[interior_[i]] = ui[i];
  for (int k = 0; k < g.boundary_size(); ++k) u[g.boundary_loop()[k]] = boundary_values[k];
  return u;
}

double LaplaceSolver::dirichlet_energy(const std::vector<double>& u) const {
  double e = 0.0;
  for_each_stiffness(*grid_, [&](int a, int b, double v) { e += u[a] * v * u[b]; });
  return 0.5 * e;
}

double LaplaceSolver::residual(const std::vector<double>& u) const {
  std::vector<double> r(grid_->num_nodes(), 0.0);
  for_each_stiffness(*grid_, [&](int a, int b, double v) { r[a] += v * u[b]; });
  double m = 0.0;
  for (int n : interior_) m = std::max(m, std::abs(r[n]));
  return m;
}

void LaplaceSolver::build_schur() const {
  if (schur_.size() > 0) return;
  const Eigen::MatrixXd kib = Eigen::MatrixXd(Kib_);
  const Eigen::MatrixXd x = ldlt_.solve(kib);
  schur_ = Eigen::MatrixXd(Kbb_) - kib.transpose() * x;
  schur_ = 0.5 * (schur_ + schur_.transpose()).eval();
}

const Eigen::MatrixXd& LaplaceSolver::schur() const {
  build_schur();
  return schur_;
}

double LaplaceSolver::extension_energy(const std::vector<double>& boundary_values) const {
  build_schur();
  const Eigen::Map<const Eigen::VectorXd> gb(boundary_values.data(), grid_->boundary_size());
  return 0.5 * gb.dot(schur_ * gb);
}

std::vector<double> unwrapped_boundary_phase(const Grid& grid, const BoundaryData& data,
                                             const std::vector<Vec2>& points) {
  const int nb = grid.boundary_size();
  if (static_cast<int>(data.p0.size()) != nb) {
    throw Error(ErrorCode::InvalidArgument, "boundary data does not match the grid");
  }
  std::vector<double> raw(nb);
  for (int k = 0; k < nb; ++k) {
    const Vec2 x = grid.position(grid.boundary_loop()[k]);
    double v = std::atan2(data.p0[k].y, data.p0[k].x);
    for (const Vec2& b : points) v -= std::atan2(x.y - b.y, x.x - b.x);
    raw[k] = v;
  }
  std::vector<double> out(nb);
  out[0] = std::remainder(raw[0], 2.0 * std::numbers::pi);
  double total = 0.0;
  for (int k = 0; k < nb; ++k) {
    const double d = std::remainder(raw[(k + 1) % nb] - raw[k], 2.0 * std::numbers::pi);
    if (std::abs(d) >= 0.5 * std::numbers::pi) {
      throw Error(ErrorCode::UnwrapFailure, "boundary phase sampled too coarsely to unwrap");
    }
    total += d;
    if (k + 1 < nb) out[k + 1] = out[k] + d;
  }
  if (std::abs(total) > 1.0) {
    throw Error(ErrorCode::UnwrapFailure, "number of points does not match the boundary winding");
  }
  return out;
}

std::vector<double> harmonic_phase(const LaplaceSolver& laplace, const BoundaryData& data,
                                   const std::vector<Vec2>& points) {
  return laplace.solve(unwrapped_boundary_phase(laplace.grid(), data, points));
}

ShiftedLaplace::ShiftedLaplace(const Grid& grid, int ncomp, std::vector<double> stiffness_scale, double sigma)
    : grid_(grid), ncomp_(ncomp), scale_(std::move(stiffness_scale)), sigma_(sigma) {
  if (static_cast<int>(scale_.size()) != ncomp) throw Error(ErrorCode::InvalidArgument, "one scale per component");
  std::vector<int> index;
  interior_ = interior_nodes(grid, &index);
  const int ni = static_cast<int>(interior_.size());
  Triplets tk;
  for_each_stiffness(grid, [&](int a, int b, double v) {
    if (index[a] >= 0 && index[b] >= 0) tk.emplace_back(index[a], index[b], v);
  });
  Eigen::SparseMatrix<double> K(ni, ni), W(ni, ni);
  K.setFromTriplets(tk.begin(), tk.end());
  Triplets tw;
  for (int i = 0; i < ni; ++i) tw.emplace_back(i, i, grid.node_weight(interior_[i]));
  W.setFromTriplets(tw.begin(), tw.end());
  for (int c = 0; c < ncomp; ++c) {
    ldlt_.push_back(std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>());
    ldlt_[c]->compute(scale_[c] * K + sigma_ * W);
    if (ldlt_[c]->info() != Eigen::Success) throw Error(ErrorCode::InvalidArgument, "preconditioner is singular");
  }
}

void ShiftedLaplace::apply(const double* in, double* out) const {
  const int ni = static_cast<int>(interior_.size());
  for (int n = 0; n < grid_.num_nodes() * ncomp_; ++n) out[n] = 0.0;
  Eigen::VectorXd rhs(ni);
  for (int c = 0; c < ncomp_; ++c) {
    for (int i = 0; i < ni; ++i) rhs[i] = in[static_cast<std::size_t>(interior_[i]) * ncomp_ + c];
    const Eigen::VectorXd z = ldlt_[c]->solve(rhs);
    for (int i = 0; i < ni; ++i) out[static_cast<std::size_t>(interior_[i]) * ncomp_ + c] = z[i];
  }
}

}  // namespace ldg

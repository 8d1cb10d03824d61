#pragma once

// Scalar Dirichlet problems on a Grid with the bilinear (Q1) stiffness
// matrix: harmonic extensions, their Dirichlet-to-energy map, and the
// shifted-Laplace preconditioner used by the solver.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "ldg/field.hpp"

namespace ldg {

class LaplaceSolver {
 public:
  explicit LaplaceSolver(std::shared_ptr<const Grid> grid);

  const Grid& grid() const { return *grid_; }
  int num_interior() const { return static_cast<int>(interior_.size()); }

  /// Harmonic extension of boundary values given in loop order. Returns a
  /// node-indexed vector, zero at exterior nodes.
  std::vector<double> solve(const std::vector<double>& boundary_values) const;

  /// Dirichlet energy 1/2 int |grad u|^2 of a node-indexed vector.
  double dirichlet_energy(const std::vector<double>& u) const;

  /// 1/2 g^T S g, the Dirichlet energy of the harmonic extension of g,
  /// through the Schur complement S = K_bb - K_bi K_ii^-1 K_ib (built on first use).
  double extension_energy(const std::vector<double>& boundary_values) const;
  /// The Schur complement itself, in loop order.
  const Eigen::MatrixXd& schur() const;

  /// Max-norm of K u over interior rows (discrete Laplace residual).
  double residual(const std::vector<double>& u) const;

 private:
  void build_schur() const;

  std::shared_ptr<const Grid> grid_;
  std::vector<int> interior_;        // interior index -> node
  std::vector<int> interior_index_;  // node -> interior index or -1
  Eigen::SparseMatrix<double> Kii_, Kib_, Kbb_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  mutable Eigen::MatrixXd schur_;
};

/// Phase of the boundary trace minus sum_l arg(x - b_l), unwrapped along the
/// loop and extended harmonically. Throws UnwrapFailure if the winding of p0
/// differs from the number of points or the sampling is too coarse.
std::vector<double> harmonic_phase(const LaplaceSolver& laplace, const BoundaryData& data,
                                   const std::vector<Vec2>& points);

/// Boundary values of harmonic_phase (loop order).
std::vector<double> unwrapped_boundary_phase(const Grid& grid, const BoundaryData& data,
                                             const std::vector<Vec2>& points);

/// Applies (a_c K + sigma W)^-1 componentwise to interior values, where K is
/// the stiffness and W the lumped mass. Used as the L-BFGS initial Hessian.
class ShiftedLaplace {
 public:
  ShiftedLaplace(const Grid& grid, int ncomp, std::vector<double> stiffness_scale, double sigma);
  /// out = P^-1 in on interior entries; other entries are zeroed.
  void apply(const double* in, double* out) const;

 private:
  const Grid& grid_;
  int ncomp_;
  std::vector<double> scale_;
  double sigma_;
  std::vector<int> interior_;
  std::vector<std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>> ldlt_;
};

}  // namespace ldg

#pragma once

// The limiting problem: renormalized energy W(b) of point configurations,
// the argmin search over configurations, and the radial cell problem L(tau)
// with its core energy gamma.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ldg/energy.hpp"
#include "ldg/harmonic.hpp"
#include "ldg/solver.hpp"

namespace ldg {

using Configuration = std::vector<Vec2>;

/// h_b: harmonic, with boundary values phase(p0) - sum_l arg(x - b_l)
/// unwrapped along the loop. Node-indexed.
std::vector<double> harmonic_h(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace);

struct WTerms {
  double pair = 0.0;       // -pi sum_{l != j} log |b_l - b_j|
  double r_normal = 0.0;   // 1/2 oint R d_nu R
  double h_tangent = 0.0;  // oint h d_tau R, tau = nu rotated clockwise
  double dirichlet = 0.0;  // 1/2 int |grad h|^2
  double total() const { return pair + r_normal + h_tangent + dirichlet; }
};

/// Evaluates W(b) with R = sum_l log |x - b_l|. Boundary integrals use the
/// trapezoid rule on the loop with analytic derivatives of R; the Dirichlet
/// term is 1/2 g^T S g with S the Schur complement of the stiffness matrix.
/// Per-point boundary data can be cached so that W on a lattice of
/// candidate points costs O(k^2 n_boundary) per configuration.
class WEvaluator {
 public:
  WEvaluator(const LaplaceSolver& laplace, const BoundaryData& data);

  const Grid& grid() const { return laplace_.grid(); }
  /// Smallest admissible distance from a point to the boundary (4h).
  double margin() const { return 4.0 * grid().h(); }
  bool admissible(Vec2 b) const;

  /// Throws DefectTooCloseToBoundary for points within 4h of the boundary,
  /// InvalidArgument for coincident points, UnwrapFailure if the number of
  /// points differs from the boundary winding.
  WTerms terms(const Configuration& b) const;
  double operator()(const Configuration& b) const { return terms(b).total(); }

  /// Same terms with h_b solved explicitly and its Dirichlet energy integrated.
  WTerms terms_direct(const Configuration& b) const;

  /// Caches per-point data for the given candidate points (all admissible).
  void cache(const std::vector<Vec2>& points);
  int cached_size() const { return static_cast<int>(cached_.size()); }
  Vec2 cached_point(int i) const { return cached_[i].b; }
  /// W of the configuration made of cached points.
  double cached_W(const std::vector<int>& index) const;

 private:
  struct PointData {
    Vec2 b;
    double winding = 0.0;       // total phase increment of x - b along the loop
    std::vector<double> theta;  // arg(x - b), unwrapped along the open loop
    std::vector<double> s_theta;
    std::vector<double> R;
    std::vector<double> dnu;   // d_nu log|x - b| times ds
    std::vector<double> dtau;  // d_tau log|x - b| (counterclockwise) times ds
    double dtau_sum = 0.0;
  };
  PointData point_data(Vec2 b) const;
  WTerms combine(const std::vector<const PointData*>& pts) const;
  void validate(const Configuration& b) const;

  const LaplaceSolver& laplace_;
  int nb_ = 0;
  std::vector<double> phi_;  // phase of p0 unwrapped along the open loop
  std::vector<double> s_phi_;
  double phi_s_phi_ = 0.0;
  double phi_winding_ = 0.0;
  std::vector<PointData> cached_;
};

double renormalized_W(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace);

/// Nelder-Mead minimization of f over R^n from x0 with initial simplex size step.
/// Stops when the simplex diameter falls below xtol or after max_evals evaluations.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                double step, double xtol, int max_evals, int* evals = nullptr);

/// Golden-section minimization of f on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, double tol);

struct ArgminResult {
  Configuration config;  // sorted by x, then y
  double W = 0.0;
  int evaluations = 0;
  double scan_cell = 0.0;  // lattice spacing of the scan (0 if no scan)
  bool certified = false;  // exhaustive scan over the lattice
};

/// Candidate points: centers of a lattice with `scan` cells across the longer
/// side of the bounding box, kept if at least 4h inside the domain.
std::vector<Vec2> scan_lattice(const Grid& grid, int scan, double* spacing = nullptr);

/// k <= 2: exhaustive scan over the lattice followed by Nelder-Mead refinement.
/// k > 2: Nelder-Mead from `starts` seeded configurations (a ring, then random).
ArgminResult argmin_W(int k, const BoundaryData& data, const LaplaceSolver& laplace, int scan = 24, int starts = 8,
                      std::uint64_t seed = 1);

struct WSample {
  Configuration config;
  double W = 0.0;
};
/// k = 1: W at every lattice point. k = 2: for every lattice point b1, the best
/// partner b2 on the lattice and the resulting W.
std::vector<WSample> W_landscape(int k, const BoundaryData& data, const LaplaceSolver& laplace, int scan);

/// 1/2 int over the domain minus the discs B_rho(b_l) of |grad q_b|^2, where
/// q_b = (|s|/2) prod_l (x - b_l)/|x - b_l| e^{i h_b}. Cell quadrature away
/// from the points and polar quadrature around them, joined by a smooth
/// partition of unity.
double annulus_energy(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace, double rho);

struct AnnulusFit {
  std::vector<double> rho;
  std::vector<double> energy;
  double W_fit = 0.0;    // intercept of (energy/(s^2/4) - pi k log(1/rho)) against rho
  double W = 0.0;        // renormalized_W
  double rel_error = 0.0;
};
AnnulusFit annulus_identity(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace,
                            const std::vector<double>& rho);

struct CellProblemResult {
  std::vector<double> tau;   // increasing
  std::vector<double> L;
  std::vector<double> G;     // minimal energies before the log shift
  std::vector<RungReport> rungs;
  double gamma = 0.0;        // fitted limit of L as tau -> 0
  double c = 0.0, q = 0.0;   // L = gamma + c tau^q
  double fit_rms = 0.0;
  double monotone_slack = 0.0;  // largest decrease of L along increasing tau
};

/// Minimizes int_{B_1} g_e + tau^-2 g_b with boundary data (s/2) e^{i(theta + beta)}, r = s/3,
/// descending the tau ladder with warm starts, and adds (2L1+L2+L3)(s^2/4) pi log tau.
CellProblemResult cell_problem_L(const std::vector<double>& tau, const ModelParams& params, double resolution,
                                 double beta = 0.0, double tol = 1e-8, int max_iters = 20000);

/// Least squares fit of L = gamma + c tau^q, with q scanned over [0.25, 4] and refined.
void fit_core_energy(CellProblemResult& result);

}  // namespace ldg

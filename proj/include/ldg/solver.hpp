#pragma once

// Minimization of the discrete energies over interior nodal values with
// pinned Dirichlet data, using preconditioned L-BFGS and eps-continuation.

#include <cstdint>
#include <functional>
#include <random>
#include <variant>
#include <vector>

#include "ldg/energy.hpp"

namespace ldg {

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// |p| = (|s|/2) prod_l zeta(|x - b_l| / eps) with phase sum_l arg(x - b_l) + h,
/// h the harmonic correction matching the boundary phase; r = s/3.
struct ProductAnsatz {
  std::vector<Vec2> points;
  double eps = 0.1;
};
/// Independent uniform values around the well scale.
struct RandomInit {
  std::uint64_t seed = 1;
};
/// The boundary value at t = 0 everywhere, r = s/3.
struct ConstantWell {};

using InitStrategy = std::variant<ProductAnsatz, RandomInit, ConstantWell>;

/// Initial field with the boundary trace applied. ncomp = 3 gives (p, r);
/// ncomp = 2 gives a planar field for the GL and CSH energies.
/// Throws DefectsTooClose for product-ansatz points within 4h of each other
/// or of the boundary, InvalidArgument if their number differs from the winding.
Field init_field(std::shared_ptr<const Grid> grid, const BoundaryData& data, const InitStrategy& strategy,
                 int ncomp = 3);

struct SolveSchedule {
  std::vector<double> eps;  // strictly decreasing
  int max_iters = 20000;
  double tol = 1e-6;        // stop when max |dE/dx| < tol * scale^2 / eps
  double perturb = 0.0;     // seeded perturbation amplitude (times the well scale) between rungs
  std::uint64_t seed = 1;
  int memory = 8;

  void validate() const;
  /// Geometric ladder from eps_max to eps_min with the given number of rungs.
  static std::vector<double> ladder(double eps_max, double eps_min, int rungs);
};

struct RungReport {
  double eps = 0.0;
  EnergyBreakdown energy;
  double initial_energy = 0.0;  // warm start evaluated at this eps
  double grad_max = 0.0;
  double grad_tol = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool monotone = true;  // every accepted step lowered the energy
  double wall_seconds = 0.0;
};

struct SolveReport {
  std::vector<RungReport> rungs;
  bool converged() const;
};

using RungCallback = std::function<void(const RungReport&, const Field&)>;

/// Landau-de Gennes G_eps. The field must carry the boundary trace.
SolveReport minimize(Field& field, const ModelParams& params, const SolveSchedule& schedule,
                     const RungCallback& on_rung = {});

enum class PlanarEnergy { GinzburgLandau, ChernSimonsHiggs };

/// E_eps or the CSH energy on a planar field.
SolveReport minimize_planar(Field& field, PlanarEnergy kind, const SolveSchedule& schedule,
                            const RungCallback& on_rung = {});

/// Max-norm over interior nodes of the continuum Euler-Lagrange operator
/// evaluated by centered differences (only nodes whose 3x3 neighbourhood is
/// interior are used).
double el_residual(const Field& field, const ModelParams& params);

}  // namespace ldg

#pragma once

// Defect detection and the well-convergence observables of a solved field.

#include <optional>
#include <string>
#include <vector>

#include "ldg/field.hpp"

namespace ldg {

struct Defect {
  Vec2 position;
  int winding = 0;           // winding of p; the Q-degree is winding / 2
  double core_radius = 0.0;  // area-equivalent radius of {|p| < 0.9 |s|/2} around the defect
  int node = -1;             // argmin node of |p|
};

struct DefectSet {
  std::vector<Defect> defects;
  double mu = 0.5;
  std::vector<std::string> warnings;

  int total_charge() const;
  double max_core_radius() const;
  double min_core_radius() const;
};

/// Flood-fills {|p| < (1 - mu) |s|/2} into 8-connected components; each
/// interior component gives one defect at its |p| argmin, refined by a
/// quadratic fit of |p|^2 on the 3x3 neighbourhood. Components touching the
/// boundary are reported as warnings. If expected_charge is given and the
/// windings do not sum to it, throws ChargeMismatch.
DefectSet detect_defects(const Field& field, double s, double mu = 0.5,
                         std::optional<int> expected_charge = std::nullopt);

/// Winding of p along a closed node cycle. Throws PhaseJumpTooLarge if
/// |p| < |s|/4 somewhere on the loop or a phase increment reaches pi/2.
int winding_on_loop(const Field& field, const std::vector<int>& loop, double s);

/// Counterclockwise node cycle around the lattice rectangle [i0, i1] x [j0, j1].
std::vector<int> rectangle_loop(const Grid& grid, int i0, int j0, int i1, int j1);

struct WellMetrics {
  double rho = 0.0;
  double sup_p = 0.0;  // sup over Omega_rho of ||p| - |s|/2|
  double sup_r = 0.0;  // sup over Omega_rho of |r - s/3| (0 for planar fields)
  std::vector<double> mu;
  std::vector<double> bad_area;  // area of {dist((p, r), well) > mu} per mu
};

/// Omega_rho excludes the balls B_rho(a_l) around detected defects. The
/// well distance is sqrt((|p| - |s|/2)^2 + (r - s/3)^2).
WellMetrics well_metrics(const Field& field, const DefectSet& defects, double s, double rho,
                         const std::vector<double>& mu_ladder = {0.05, 0.1, 0.2});

/// Default exclusion radius: 4 times the largest core radius.
double default_rho(const DefectSet& defects);

struct DirectorSample {
  Vec2 x;
  double angle = 0.0;  // half the phase of p, in [0, pi)
  double abs_p = 0.0;
  double r = 0.0;
};

/// Line-field angle at every active node of Omega_rho with p != 0.
std::vector<DirectorSample> director_field(const Field& field, const DefectSet& defects, double rho);

}  // namespace ldg

#pragma once

// Checks on solved fields: the Pohozaev identity on a disk, the bulk-energy
// monitor along an eps ladder, energy-asymptotics fits, and the energy shift
// between the reduced and full-tensor energies.

#include <variant>
#include <vector>

#include "ldg/energy.hpp"
#include "ldg/solver.hpp"

namespace ldg {

struct PohozaevReport {
  double radius = 0.0;
  double tangential_p = 0.0;  // R (L1 + (L2+L3)/2) oint |p_tau|^2
  double normal_p = 0.0;      // R (L1 + (L2+L3)/2) oint |p_nu|^2
  double normal_r = 0.0;      // R (3L1/4 + (L2+L3)/8) oint (|r_nu|^2 - |r_tau|^2)
  double mixed = 0.0;         // (L2+L3)/2 R oint r_nu (cos 2theta, sin 2theta) . p_nu
  double mixed_bound = 0.0;   // R |L2+L3|/2 oint (|r_nu|^2/4 + |p_nu|^2)
  double interior = 0.0;      // 2 eps^-2 int g_b
  double residual = 0.0;      // normal_p - tangential_p + normal_r + mixed + interior
  double relative_residual = 0.0;  // |residual| / tangential_p
  double data_bound = 0.0;    // R (L1 + (L2+L3)/2) oint |p0_tau|^2 from the boundary trace
  bool inequality_holds = false;  // data_bound >= interior
  bool mixed_bound_holds = false;
};

/// Boundary terms by quadrature on the boundary loop: tangential derivatives
/// by three-point differences along the loop, normal derivatives by a
/// one-sided second-order stencil along the inward normal with interpolated
/// samples at distances h and 2h. Throws NotADisk for other shapes.
PohozaevReport pohozaev_check(const Field& field, const ModelParams& params);

struct BulkBoundRow {
  double eps = 0.0;
  double scaled_bulk = 0.0;  // eps^-2 int g_b
  bool flagged = false;      // grew by more than 50% over the previous rung
};
std::vector<BulkBoundRow> bulk_bound_monitor(const std::vector<RungReport>& rungs);

struct LdGSlope {
  int k = 1;
  double s = 1.0;
  double L1 = 1.0, L2 = 0.0, L3 = 0.0;
};
struct PlanarSlope {
  int k = 1;
};
using SlopeTarget = std::variant<LdGSlope, PlanarSlope>;

/// (2L1+L2+L3) s^2 pi k / 4 for LdG, pi k for the planar energies.
double target_slope(const SlopeTarget& target);

struct EnergySample {
  double eps = 0.0;
  double energy = 0.0;
};

struct AsymptoticsFit {
  std::vector<EnergySample> samples;
  double slope = 0.0;  // of energy against log(1/eps)
  double intercept = 0.0;
  double target = 0.0;
  double rel_error = 0.0;       // |slope - target| / |target|
  double slope_drop_largest = 0.0;  // slope without the largest-eps sample (0 if fewer than 5 samples)
};

/// Least squares fit of energy against log(1/eps). Throws InsufficientSamples
/// with fewer than 4 samples or an eps range under a factor of 4.
AsymptoticsFit fit_energy_asymptotics(const std::vector<EnergySample>& samples, const SlopeTarget& target);

struct ShiftCheck {
  double G = 0.0;
  double F = 0.0;
  double shift = 0.0;     // G - F
  double expected = 0.0;  // (L3 - L2 + |L3 + L2|) s^2 pi k / 4
  double rel_error = 0.0;
};
/// k is taken from the boundary winding of the field.
ShiftCheck corollary_shift_check(const Field& field, const ModelParams& params);

}  // namespace ldg

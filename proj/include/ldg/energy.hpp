#pragma once

// Energy densities of the thin-film problem and discrete total energies.

#include <functional>
#include <variant>

#include "ldg/field.hpp"

namespace ldg {

/// Classic bulk potential a|Q|^2 - (2b/3) tr Q^3 + (c/2)|Q|^4 + d, written in (|p|^2, r) as
///   a(2P + 1.5 r^2) - 2 b r (P - r^2/4) + (c/2)(2P + 1.5 r^2)^2 + d.
struct ClassicBulk {
  double a = 0.0, b = 3.0, c = 1.0;
  double d = 0.0;  // calibrated so that the minimum is zero
  double s = 0.0;  // well scalar
};

/// User-supplied bulk density g(P, r) with P = |p|^2, plus its partials.
struct CustomBulk {
  std::function<double(double, double)> value;
  std::function<double(double, double)> d_psq;
  std::function<double(double, double)> d_r;
  double s = 1.0;
};

class BulkSpec {
 public:
  /// Requires b > 0, c > 0, a < b^2 / (27 c). Computes s and d.
  static BulkSpec classic(double a, double b, double c);
  static BulkSpec custom(CustomBulk bulk);

  double s() const;
  bool is_classic() const { return std::holds_alternative<ClassicBulk>(spec_); }
  const ClassicBulk& classic_coefficients() const { return std::get<ClassicBulk>(spec_); }

  double value(double psq, double r) const;
  double d_psq(double psq, double r) const;
  double d_r(double psq, double r) const;

 private:
  std::variant<ClassicBulk, CustomBulk> spec_;
};

/// g_b0 for classic coefficients. Throws NegativePsq.
double g_b0(double psq, double r, const ClassicBulk& spec);

class ModelParams {
 public:
  /// Enforces L1 > 0, L1 + L2 + L3 > 0 and eps > 0.
  ModelParams(double L1, double L2, double L3, BulkSpec bulk, double eps);

  double L1() const { return L1_; }
  double L2() const { return L2_; }
  double L3() const { return L3_; }
  double eps() const { return eps_; }
  double s() const { return bulk_.s(); }
  const BulkSpec& bulk() const { return bulk_; }

  ModelParams with_eps(double eps) const;
  /// c0 with g_e >= c0 (|grad p|^2 + |grad r|^2): (3/4) min(L1, L1 + L2 + L3).
  double coercivity() const;

 private:
  double L1_, L2_, L3_;
  BulkSpec bulk_;
  double eps_;
};

/// Derivatives at a point: p[i][d] = d p_{i+1} / d x_d, r[d] = d r / d x_d.
struct GradientSample {
  double p[2][2] = {{0, 0}, {0, 0}};
  double r[2] = {0, 0};
};

double g_e_mixed(const GradientSample& g, const ModelParams& params);
double g_e_sos(const GradientSample& g, const ModelParams& params);

struct EnergyBreakdown {
  double elastic = 0.0;
  double bulk = 0.0;  // already multiplied by eps^-2
  double total() const { return elastic + bulk; }
};

EnergyBreakdown total_G(const Field& field, const ModelParams& params);
/// Full-tensor energy F_eps of from_pr(field), assembled from Q_ij,k.
double total_F(const Field& field, const ModelParams& params);
/// Ginzburg-Landau: 1/2 int |grad v|^2 + (1 - |v|^2)^2 / (2 eps^2).
double total_GL(const Field& field, double eps);
/// CSH: int 1/2 |grad p|^2 + eps^-2 |p|^2 (1 - |p|^2)^2.
double total_CSH(const Field& field, double eps);

/// Exact gradient of total_G with respect to interior nodal values; zero at
/// boundary and exterior nodes.
Field gradient_G(const Field& field, const ModelParams& params);

/// (L3 - L2 + |L3 + L2|) s^2 pi k / 4.
double corollary_shift(const ModelParams& params, int k);

}  // namespace ldg

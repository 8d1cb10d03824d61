#include "ldg/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "ldg/error.hpp"
#include "ldg/kernels.hpp"

namespace ldg {

namespace {
int g_workers = 0;
}

int worker_count() {
  if (g_workers > 0) return g_workers;
  if (const char* env = std::getenv("LDG_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int n) { g_workers = n > 0 ? n : 0; }

BulkSpec BulkSpec::classic(double a, double b, double c) {
  if (!(b > 0.0) || !(c > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "classic bulk needs b > 0 and c > 0");
  }
  if (!(a < b * b / (27.0 * c))) {
    throw Error(ErrorCode::InvalidArgument, "classic bulk needs a < b^2 / (27 c)");
  }
  ClassicBulk cb{a, b, c, 0.0, (b + std::sqrt(b * b - 24.0 * a * c)) / (4.0 * c)};
  cb.d = -g_b0(cb.s * cb.s / 4.0, cb.s / 3.0, cb);
  BulkSpec out;
  out.spec_ = cb;
  return out;
}

BulkSpec BulkSpec::custom(CustomBulk bulk) {
  if (!bulk.value || !bulk.d_psq || !bulk.d_r) {
    throw Error(ErrorCode::InvalidArgument, "custom bulk needs a density and both partials");
  }
  if (bulk.s == 0.0) throw Error(ErrorCode::InvalidArgument, "well scalar must be nonzero");
  BulkSpec out;
  out.spec_ = std::move(bulk);
  return out;
}

double BulkSpec::s() const {
  return std::visit([](const auto& b) { return b.s; }, spec_);
}

double BulkSpec::value(double psq, double r) const {
  if (const auto* c = std::get_if<ClassicBulk>(&spec_)) return g_b0(psq, r, *c);
  return std::get<CustomBulk>(spec_).value(psq, r);
}

double BulkSpec::d_psq(double psq, double r) const {
  if (const auto* c = std::get_if<ClassicBulk>(&spec_)) {
    return 2 * c->a - 2 * c->b * r + 2 * c->c * (2 * psq + 1.5 * r * r);
  }
  return std::get<CustomBulk>(spec_).d_psq(psq, r);
}

double BulkSpec::d_r(double psq, double r) const {
  if (const auto* c = std::get_if<ClassicBulk>(&spec_)) {
    return 3 * c->a * r - 2 * c->b * (psq - 0.75 * r * r) + 3 * c->c * r * (2 * psq + 1.5 * r * r);
  }
  return std::get<CustomBulk>(spec_).d_r(psq, r);
}

double g_b0(double psq, double r, const ClassicBulk& spec) {
  if (psq < 0.0) throw Error(ErrorCode::NegativePsq, "|p|^2 must be nonnegative");
  const double q = 2.0 * psq + 1.5 * r * r;
  return spec.a * q - 2.0 * spec.b * r * (psq - 0.25 * r * r) + 0.5 * spec.c * q * q + spec.d;
}

ModelParams::ModelParams(double L1, double L2, double L3, BulkSpec bulk, double eps)
    : L1_(L1), L2_(L2), L3_(L3), bulk_(std::move(bulk)), eps_(eps) {
  if (!(L1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "L1 must be positive");
  if (!(L1 + L2 + L3 > 0.0)) throw Error(ErrorCode::InvalidArgument, "L1 + L2 + L3 must be positive");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
}

ModelParams ModelParams::with_eps(double eps) const { return ModelParams(L1_, L2_, L3_, bulk_, eps); }

double ModelParams::coercivity() const { return 0.75 * std::min(L1_, L1_ + L2_ + L3_); }

double g_e_mixed(const GradientSample& g, const ModelParams& params) {
  const double L1 = params.L1(), L23 = params.L2() + params.L3();
  const double p1x = g.p[0][0], p1y = g.p[0][1], p2x = g.p[1][0], p2y = g.p[1][1];
  const double rx = g.r[0], ry = g.r[1];
  const double gp2 = p1x * p1x + p1y * p1y + p2x * p2x + p2y * p2y;
  const double gr2 = rx * rx + ry * ry;
  return (L1 + 0.5 * L23) * gp2 + (0.75 * L1 + 0.125 * L23) * gr2 +
         0.5 * L23 * (p1x * rx - p1y * ry + rx * p2y + ry * p2x) + std::abs(L23) * (p1x * p2y - p1y * p2x);
}

double g_e_sos(const GradientSample& g, const ModelParams& params) {
  const double grad[6] = {g.p[0][0], g.p[0][1], g.p[1][0], g.p[1][1], g.r[0], g.r[1]};
  return LdGDensity(params).elastic(grad, nullptr);
}

EnergyBreakdown total_G(const Field& field, const ModelParams& params) {
  if (field.ncomp() != 3) throw Error(ErrorCode::InvalidArgument, "total_G needs a (p, r) field");
  Assembler<LdGDensity> a(field.grid(), LdGDensity(params));
  return a.evaluate(field.data(), nullptr);
}

Field gradient_G(const Field& field, const ModelParams& params) {
  if (field.ncomp() != 3) throw Error(ErrorCode::InvalidArgument, "gradient_G needs a (p, r) field");
  Field out(field.grid_ptr(), 3);
  Assembler<LdGDensity> a(field.grid(), LdGDensity(params));
  a.evaluate(field.data(), out.data());
  return out;
}

double total_GL(const Field& field, double eps) {
  if (field.ncomp() != 2) throw Error(ErrorCode::InvalidArgument, "total_GL needs a vector field");
  Assembler<GLDensity> a(field.grid(), GLDensity(eps));
  return a.evaluate(field.data(), nullptr).total();
}

double total_CSH(const Field& field, double eps) {
  if (field.ncomp() != 2) throw Error(ErrorCode::InvalidArgument, "total_CSH needs a vector field");
  Assembler<CSHDensity> a(field.grid(), CSHDensity(eps));
  return a.evaluate(field.data(), nullptr).total();
}

double total_F(const Field& field, const ModelParams& params) {
  if (field.ncomp() != 3) throw Error(ErrorCode::InvalidArgument, "total_F needs a (p, r) field");
  const Grid& grid = field.grid();
  const double L1 = params.L1(), L2 = params.L2(), L3 = params.L3();
  double elastic = 0.0;
  for (int c = 0; c < grid.num_cells(); ++c) {
    if (!grid.cell_active(c)) continue;
    const auto nodes = grid.cell_nodes(c);
    std::array<Mat3, 4> q;
    for (int k = 0; k < 4; ++k) q[k] = from_pr({field.p(nodes[k]), field.r(nodes[k])}).matrix();
    for (const GaussGeometry& gp : grid.geometry(c)) {
      // dQ[i][j][k] = d Q_ij / d x_k with the third derivative identically zero.
      double dQ[3][3][3] = {};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 4; ++k) {
            dQ[i][j][0] += q[k][i][j] * gp.dndx[k];
            dQ[i][j][1] += q[k][i][j] * gp.dndy[k];
          }
      double t1 = 0.0, t2 = 0.0, t3 = 0.0;
      for (int i = 0; i < 3; ++i) {
        double div = 0.0;
        for (int j = 0; j < 3; ++j) {
          div += dQ[i][j][j];
          for (int k = 0; k < 3; ++k) {
            t1 += dQ[i][j][k] * dQ[i][j][k];
            t3 += dQ[i][j][k] * dQ[i][k][j];
          }
        }
        t2 += div * div;
      }
      elastic += gp.weight * (0.5 * L1 * t1 + 0.5 * L2 * t2 + 0.5 * L3 * t3);
    }
  }
  double bulk = 0.0;
  for (int n = 0; n < grid.num_nodes(); ++n) {
    if (!grid.active(n)) continue;
    const Vec2 p = field.p(n);
    bulk += grid.node_weight(n) * params.bulk().value(dot(p, p), field.r(n));
  }
  return elastic + bulk / (params.eps() * params.eps());
}

double corollary_shift(const ModelParams& params, int k) {
  const double s = params.s();
  return (params.L3() - params.L2() + std::abs(params.L3() + params.L2())) * s * s * std::numbers::pi * k / 4.0;
}

}  // namespace ldg

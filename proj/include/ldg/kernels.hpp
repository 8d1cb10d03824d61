#pragma once

// Energy and gradient assembly over the active cells of a Grid.
//
// Elastic terms use 2x2 Gauss quadrature on each bilinear cell; bulk terms
// use the lumped nodal weights. Two implementations share the density
// models: an OpenMP kernel (cells by rows into per-cell buffers, then a
// per-node gather, so the result does not depend on the thread count) and a
// plain serial scatter loop kept as the reference.

#include <cmath>
#include <vector>

#include "ldg/energy.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ldg {

/// Landau-de Gennes in (p1, p2, r). Gradient layout g[2c + d] = d v_c / d x_d.
struct LdGDensity {
  static constexpr int N = 3;

  explicit LdGDensity(const ModelParams& params)
      : L1(params.L1()), c(0.5 * (params.L2() + params.L3())), Ltot(params.L1() + params.L2() + params.L3()),
        bulk(&params.bulk()), inv_eps2(1.0 / (params.eps() * params.eps())) {
    if (bulk->is_classic()) classic = bulk->classic_coefficients();
  }

  double elastic(const double* g, double* dg) const {
    const double p1x = g[0], p1y = g[1], p2x = g[2], p2y = g[3], rx = g[4], ry = g[5];
    if (c >= 0.0) {
      const double A = p1x + 0.5 * rx + p2y;
      const double B = p2x - p1y + 0.5 * ry;
      if (dg) {
        dg[0] = 2 * L1 * p1x + 2 * c * A;
        dg[1] = 2 * L1 * p1y - 2 * c * B;
        dg[2] = 2 * L1 * p2x + 2 * c * B;
        dg[3] = 2 * L1 * p2y + 2 * c * A;
        dg[4] = 1.5 * L1 * rx + c * A;
        dg[5] = 1.5 * L1 * ry + c * B;
      }
      return L1 * (p1x * p1x + p1y * p1y + p2x * p2x + p2y * p2y + 0.75 * (rx * rx + ry * ry)) +
             c * (A * A + B * B);
    }
    const double C = 0.5 * rx - p1x - p2y;
    const double D = p2x - p1y - 0.5 * ry;
    if (dg) {
      dg[0] = 2 * Ltot * p1x + 2 * c * C;
      dg[1] = 2 * Ltot * p1y + 2 * c * D;
      dg[2] = 2 * Ltot * p2x - 2 * c * D;
      dg[3] = 2 * Ltot * p2y + 2 * c * C;
      dg[4] = 1.5 * Ltot * rx - c * C - 2 * c * rx;
      dg[5] = 1.5 * Ltot * ry + c * D - 2 * c * ry;
    }
    return Ltot * (p1x * p1x + p1y * p1y + p2x * p2x + p2y * p2y + 0.75 * (rx * rx + ry * ry)) -
           c * (C * C + D * D + rx * rx + ry * ry);
  }

  // eps^-2 g_b(|p|^2, r) and its derivative.
  double bulk_density(const double* v, double* dv) const {
    const double P = v[0] * v[0] + v[1] * v[1];
    const double r = v[2];
    double val, gP, gr;
    if (bulk->is_classic()) {
      const double a = classic.a, b = classic.b, cc = classic.c;
      const double q = 2 * P + 1.5 * r * r;
      val = a * q - 2 * b * r * (P - 0.25 * r * r) + 0.5 * cc * q * q + classic.d;
      gP = 2 * a - 2 * b * r + 2 * cc * q;
      gr = 3 * a * r - 2 * b * (P - 0.75 * r * r) + 3 * cc * r * q;
    } else {
      val = bulk->value(P, r);
      gP = bulk->d_psq(P, r);
      gr = bulk->d_r(P, r);
    }
    if (dv) {
      dv[0] = inv_eps2 * 2 * v[0] * gP;
      dv[1] = inv_eps2 * 2 * v[1] * gP;
      dv[2] = inv_eps2 * gr;
    }
    return inv_eps2 * val;
  }

  double L1, c, Ltot;
  const BulkSpec* bulk;
  ClassicBulk classic{};
  double inv_eps2;
};

/// Ginzburg-Landau: 1/2 |grad v|^2 + eps^-2 (1 - |v|^2)^2 / 4.
struct GLDensity {
  static constexpr int N = 2;
  explicit GLDensity(double eps) : inv_eps2(1.0 / (eps * eps)) {}

  double elastic(const double* g, double* dg) const {
    if (dg)
      for (int i = 0; i < 4; ++i) dg[i] = g[i];
    return 0.5 * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
  }
  double bulk_density(const double* v, double* dv) const {
    const double m = 1.0 - (v[0] * v[0] + v[1] * v[1]);
    if (dv) {
      dv[0] = -inv_eps2 * m * v[0];
      dv[1] = -inv_eps2 * m * v[1];
    }
    return 0.25 * inv_eps2 * m * m;
  }
  double inv_eps2;
};

/// Chern-Simons-Higgs limit: 1/2 |grad p|^2 + eps^-2 |p|^2 (1 - |p|^2)^2.
struct CSHDensity {
  static constexpr int N = 2;
  explicit CSHDensity(double eps) : inv_eps2(1.0 / (eps * eps)) {}

  double elastic(const double* g, double* dg) const {
    if (dg)
      for (int i = 0; i < 4; ++i) dg[i] = g[i];
    return 0.5 * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
  }
  double bulk_density(const double* v, double* dv) const {
    const double P = v[0] * v[0] + v[1] * v[1];
    const double m = 1.0 - P;
    if (dv) {
      const double gP = m * (1.0 - 3.0 * P);
      dv[0] = inv_eps2 * 2 * v[0] * gP;
      dv[1] = inv_eps2 * 2 * v[1] * gP;
    }
    return inv_eps2 * P * m * m;
  }
  double inv_eps2;
};

/// Number of OpenMP workers used by the parallel kernels.
int worker_count();
/// Overrides the worker count (<= 0 restores the default).
void set_worker_count(int n);

template <class Model>
class Assembler {
 public:
  static constexpr int N = Model::N;

  Assembler(const Grid& grid, Model model) : grid_(grid), model_(model) {}

  /// Energy of the nodal values x (size num_nodes * N). If grad is non-null
  /// it receives dE/dx at interior nodes and zero elsewhere.
  EnergyBreakdown evaluate(const double* x, double* grad) {
    const int nx = grid_.nx(), ny = grid_.ny();
    const int ncx = nx - 1, ncy = ny - 1;
    row_elastic_.assign(ncy, 0.0);
    row_bulk_.assign(ny, 0.0);
    if (grad) cell_buf_.resize(static_cast<std::size_t>(grid_.num_cells()) * 4 * N);

#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int j = 0; j < ncy; ++j) {
      double sum = 0.0;
      for (int i = 0; i < ncx; ++i) {
        const int c = j * ncx + i;
        if (!grid_.cell_active(c)) continue;
        sum += cell_term(c, x, grad ? &cell_buf_[static_cast<std::size_t>(c) * 4 * N] : nullptr);
      }
      row_elastic_[j] = sum;
    }

#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (int j = 0; j < ny; ++j) {
      double sum = 0.0;
      for (int i = 0; i < nx; ++i) {
        const int n = j * nx + i;
        double* g = grad ? grad + static_cast<std::size_t>(n) * N : nullptr;
        if (!grid_.active(n)) {
          if (g)
            for (int k = 0; k < N; ++k) g[k] = 0.0;
          continue;
        }
        double dv[N];
        sum += grid_.node_weight(n) * model_.bulk_density(x + static_cast<std::size_t>(n) * N, dv);
        if (!g) continue;
        if (!grid_.interior(n)) {
          for (int k = 0; k < N; ++k) g[k] = 0.0;
          continue;
        }
        // Interior nodes touch four active cells; gather their corner terms.
        const int cells[4] = {(j - 1) * ncx + (i - 1), (j - 1) * ncx + i, j * ncx + i, j * ncx + (i - 1)};
        const int corner[4] = {2, 3, 0, 1};
        for (int k = 0; k < N; ++k) {
          double acc = grid_.node_weight(n) * dv[k];
          for (int q = 0; q < 4; ++q) acc += cell_buf_[(static_cast<std::size_t>(cells[q]) * 4 + corner[q]) * N + k];
          g[k] = acc;
        }
      }
      row_bulk_[j] = sum;
    }

    EnergyBreakdown e;
    for (double v : row_elastic_) e.elastic += v;
    for (double v : row_bulk_) e.bulk += v;
    return e;
  }

  /// Serial scatter reference of evaluate().
  EnergyBreakdown evaluate_serial(const double* x, double* grad) const {
    const int nn = grid_.num_nodes();
    if (grad)
      for (std::size_t k = 0; k < static_cast<std::size_t>(nn) * N; ++k) grad[k] = 0.0;
    EnergyBreakdown e;
    double local[4 * N];
    for (int c = 0; c < grid_.num_cells(); ++c) {
      if (!grid_.cell_active(c)) continue;
      e.elastic += cell_term(c, x, grad ? local : nullptr);
      if (!grad) continue;
      const auto nodes = grid_.cell_nodes(c);
      for (int q = 0; q < 4; ++q)
        for (int k = 0; k < N; ++k) grad[static_cast<std::size_t>(nodes[q]) * N + k] += local[q * N + k];
    }
    for (int n = 0; n < nn; ++n) {
      if (!grid_.active(n)) continue;
      double dv[N];
      e.bulk += grid_.node_weight(n) * model_.bulk_density(x + static_cast<std::size_t>(n) * N, dv);
      if (grad)
        for (int k = 0; k < N; ++k) grad[static_cast<std::size_t>(n) * N + k] += grid_.node_weight(n) * dv[k];
    }
    if (grad)
      for (int n = 0; n < nn; ++n)
        if (!grid_.interior(n))
          for (int k = 0; k < N; ++k) grad[static_cast<std::size_t>(n) * N + k] = 0.0;
    return e;
  }

  const Model& model() const { return model_; }

 private:
  double cell_term(int c, const double* x, double* local) const {
    const auto nodes = grid_.cell_nodes(c);
    const CellGeometry& geo = grid_.geometry(c);
    double v[4][N];
    for (int q = 0; q < 4; ++q)
      for (int k = 0; k < N; ++k) v[q][k] = x[static_cast<std::size_t>(nodes[q]) * N + k];
    if (local)
      for (int k = 0; k < 4 * N; ++k) local[k] = 0.0;
    double energy = 0.0;
    for (const GaussGeometry& gp : geo) {
      double g[2 * N];
      for (int k = 0; k < N; ++k) {
        double gx = 0.0, gy = 0.0;
        for (int q = 0; q < 4; ++q) {
          gx += v[q][k] * gp.dndx[q];
          gy += v[q][k] * gp.dndy[q];
        }
        g[2 * k] = gx;
        g[2 * k + 1] = gy;
      }
      double dg[2 * N];
      energy += gp.weight * model_.elastic(g, local ? dg : nullptr);
      if (!local) continue;
      for (int q = 0; q < 4; ++q)
        for (int k = 0; k < N; ++k)
          local[q * N + k] += gp.weight * (dg[2 * k] * gp.dndx[q] + dg[2 * k + 1] * gp.dndy[q]);
    }
    return energy;
  }

  const Grid& grid_;
  Model model_;
  std::vector<double> row_elastic_, row_bulk_, cell_buf_;
};

}  // namespace ldg

#include "ldg/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "ldg/error.hpp"
#include "ldg/harmonic.hpp"
#include "ldg/kernels.hpp"

namespace ldg {

namespace {

using Eval = std::function<double(const double*, double*)>;
using Precond = std::function<void(const double*, double*)>;

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Outcome {
  int iterations = 0;
  int evaluations = 0;
  double f = 0.0;
  double gmax = 0.0;
  bool converged = false;
  bool monotone = true;
};

// Strong Wolfe line search along d from x (Nocedal & Wright, Alg. 3.5/3.6).
// On success xn, gn, fn hold the accepted point. Falls back to the best
// point with sufficient decrease if the curvature condition cannot be met.
class LineSearch {
 public:
  LineSearch(const Eval& eval, int& evals) : eval_(eval), evals_(evals) {}

  bool run(const std::vector<double>& x, double f0, double dg0, const std::vector<double>& d,
           std::vector<double>& xn, std::vector<double>& gn, double& fn) {
    x_ = &x;
    d_ = &d;
    f0_ = f0;
    dg0_ = dg0;
    have_best_ = false;
    double a_prev = 0.0, f_prev = f0, dg_prev = dg0;
    double a = 1.0;
    for (int i = 0; i < 25; ++i) {
      double fa, dga;
      trial(a, xn, gn, fa, dga);
      if (!(fa <= f0 + c1 * a * dg0) || (i > 0 && fa >= f_prev)) {
        return zoom(a_prev, f_prev, dg_prev, a, fa, xn, gn, fn);
      }
      if (std::abs(dga) <= -c2 * dg0) {
        fn = fa;
        return true;
      }
      if (dga >= 0.0) return zoom(a, fa, dga, a_prev, f_prev, xn, gn, fn);
      a_prev = a;
      f_prev = fa;
      dg_prev = dga;
      a *= 2.0;
    }
    return fallback(xn, gn, fn);
  }

 private:
  static constexpr double c1 = 1e-4, c2 = 0.9;

  void trial(double a, std::vector<double>& xn, std::vector<double>& gn, double& fa, double& dga) {
    for (std::size_t i = 0; i < xn.size(); ++i) xn[i] = (*x_)[i] + a * (*d_)[i];
    fa = eval_(xn.data(), gn.data());
    ++evals_;
    if (!std::isfinite(fa)) {
      fa = std::numeric_limits<double>::infinity();
      dga = 0.0;
      return;
    }
    dga = dotv(gn, *d_);
    if (fa < f0_ + c1 * a * dg0_ && (!have_best_ || fa < best_f_)) {
      have_best_ = true;
      best_f_ = fa;
      best_a_ = a;
    }
  }

  bool zoom(double lo, double flo, double dglo, double hi, double fhi, std::vector<double>& xn,
            std::vector<double>& gn, double& fn) {
    for (int j = 0; j < 30; ++j) {
      const double w = hi - lo;
      // Quadratic through (lo, flo, dglo) and (hi, fhi), safeguarded.
      double a = lo + 0.5 * w;
      const double den = 2.0 * (fhi - flo - dglo * w);
      if (std::isfinite(fhi) && den > 0.0) {
        const double q = lo - dglo * w * w / den;
        const double amin = std::min(lo, hi) + 0.1 * std::abs(w), amax = std::max(lo, hi) - 0.1 * std::abs(w);
        if (q > amin && q < amax) a = q;
      }
      double fa, dga;
      trial(a, xn, gn, fa, dga);
      if (!(fa <= f0_ + c1 * a * dg0_) || fa >= flo) {
        hi = a;
        fhi = fa;
      } else {
        if (std::abs(dga) <= -c2 * dg0_) {
          fn = fa;
          return true;
        }
        if (dga * (hi - lo) >= 0.0) {
          hi = lo;
          fhi = flo;
        }
        lo = a;
        flo = fa;
        dglo = dga;
      }
      if (std::abs(hi - lo) < 1e-14 * std::max(1.0, std::abs(lo))) break;
    }
    return fallback(xn, gn, fn);
  }

  bool fallback(std::vector<double>& xn, std::vector<double>& gn, double& fn) {
    if (!have_best_ || !(best_f_ < f0_)) return false;
    double dga;
    trial(best_a_, xn, gn, fn, dga);
    return fn < f0_;
  }

  const Eval& eval_;
  int& evals_;
  const std::vector<double>* x_ = nullptr;
  const std::vector<double>* d_ = nullptr;
  double f0_ = 0.0, dg0_ = 0.0;
  bool have_best_ = false;
  double best_f_ = 0.0, best_a_ = 0.0;
};

Outcome lbfgs(const Eval& eval, const Precond& precond, std::vector<double>& x, int m, double gtol,
              int max_iters) {
  const std::size_t n = x.size();
  std::vector<double> g(n), d(n), q(n), xn(n), gn(n);
  Outcome out;
  double f = eval(x.data(), g.data());
  out.evaluations = 1;
  if (!std::isfinite(f)) throw Error(ErrorCode::Diverged, "energy is not finite at the starting point");
  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> hist;
  std::vector<double> alpha(m);
  LineSearch ls(eval, out.evaluations);

  for (out.iterations = 0; out.iterations < max_iters; ++out.iterations) {
    out.gmax = max_abs(g);
    if (out.gmax < gtol) {
      out.converged = true;
      break;
    }
    q = g;
    for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
      alpha[i] = hist[i].rho * dotv(hist[i].s, q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[i] * hist[i].y[k];
    }
    precond(q.data(), d.data());
    for (std::size_t i = 0; i < hist.size(); ++i) {
      const double b = hist[i].rho * dotv(hist[i].y, d);
      for (std::size_t k = 0; k < n; ++k) d[k] += hist[i].s[k] * (alpha[i] - b);
    }
    for (double& v : d) v = -v;
    double dg = dotv(g, d);
    if (!(dg < 0.0)) {
      hist.clear();
      precond(g.data(), d.data());
      for (double& v : d) v = -v;
      dg = dotv(g, d);
      if (!(dg < 0.0)) break;
    }
    double fn;
    if (!ls.run(x, f, dg, d, xn, gn, fn)) {
      if (hist.empty()) break;  // stalled at the resolution of the arithmetic
      hist.clear();
      continue;
    }
    if (!std::isfinite(fn)) throw Error(ErrorCode::Diverged, "energy became non-finite");
    if (!(fn < f)) out.monotone = false;
    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      p.s[k] = xn[k] - x[k];
      p.y[k] = gn[k] - g[k];
    }
    const double sy = dotv(p.s, p.y);
    if (sy > 1e-16 * std::sqrt(dotv(p.s, p.s) * dotv(p.y, p.y))) {
      p.rho = 1.0 / sy;
      hist.push_back(std::move(p));
      if (static_cast<int>(hist.size()) > m) hist.pop_front();
    }
    x.swap(xn);
    g.swap(gn);
    f = fn;
  }
  out.f = f;
  out.gmax = max_abs(g);
  if (out.gmax < gtol) out.converged = true;
  return out;
}

double zeta(double t) {
  if (t >= 1.0) return 1.0;
  const double u = 1.0 - t;
  return 1.0 - u * u * u;
}

template <class Model, class MakeModel>
SolveReport run_ladder(Field& field, const SolveSchedule& schedule, double scale, MakeModel make_model,
                       const std::function<ShiftedLaplace(double)>& make_precond, const RungCallback& on_rung) {
  schedule.validate();
  SolveReport report;
  const Grid& grid = field.grid();
  std::mt19937_64 rng(schedule.seed);
  for (std::size_t i = 0; i < schedule.eps.size(); ++i) {
    const double eps = schedule.eps[i];
    const auto t0 = std::chrono::steady_clock::now();
    if (i > 0 && schedule.perturb > 0.0) {
      const double amp = schedule.perturb * scale;
      for (int n = 0; n < grid.num_nodes(); ++n) {
        if (!grid.interior(n)) continue;
        for (int c = 0; c < field.ncomp(); ++c) field(n, c) += amp * (2.0 * unit_uniform(rng) - 1.0);
      }
    }
    Assembler<Model> assembler(grid, make_model(eps));
    const ShiftedLaplace pre = make_precond(eps);
    const Eval eval = [&](const double* x, double* g) { return assembler.evaluate(x, g).total(); };
    const Precond precond = [&](const double* in, double* out) { pre.apply(in, out); };

    RungReport rung;
    rung.eps = eps;
    rung.initial_energy = assembler.evaluate(field.data(), nullptr).total();
    rung.grad_tol = schedule.tol * scale * scale / eps;
    const Outcome o = lbfgs(eval, precond, field.values(), schedule.memory, rung.grad_tol, schedule.max_iters);
    rung.energy = assembler.evaluate(field.data(), nullptr);
    rung.grad_max = o.gmax;
    rung.iterations = o.iterations;
    rung.evaluations = o.evaluations;
    rung.converged = o.converged;
    rung.monotone = o.monotone;
    rung.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.rungs.push_back(rung);
    if (on_rung) on_rung(rung, field);
  }
  return report;
}

}  // namespace

void SolveSchedule::validate() const {
  if (eps.empty()) throw Error(ErrorCode::InvalidArgument, "schedule needs at least one eps");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw Error(ErrorCode::InvalidArgument, "eps ladder must decrease");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (max_iters < 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be nonnegative");
  if (memory < 1) throw Error(ErrorCode::InvalidArgument, "L-BFGS memory must be at least 1");
  if (perturb < 0.0) throw Error(ErrorCode::InvalidArgument, "perturbation amplitude must be nonnegative");
}

std::vector<double> SolveSchedule::ladder(double eps_max, double eps_min, int rungs) {
  if (rungs < 1 || !(eps_max > 0.0) || !(eps_min > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid eps ladder");
  }
  if (rungs == 1) return {eps_max};
  std::vector<double> out(rungs);
  for (int i = 0; i < rungs; ++i) out[i] = eps_max * std::pow(eps_min / eps_max, double(i) / (rungs - 1));
  out.back() = eps_min;
  return out;
}

bool SolveReport::converged() const {
  return std::all_of(rungs.begin(), rungs.end(), [](const RungReport& r) { return r.converged; });
}

Field init_field(std::shared_ptr<const Grid> grid, const BoundaryData& data, const InitStrategy& strategy,
                 int ncomp) {
  if (ncomp != 2 && ncomp != 3) throw Error(ErrorCode::InvalidArgument, "fields have 2 or 3 components");
  const Grid& g = *grid;
  Field f(grid, ncomp);
  const double amp = 0.5 * std::abs(data.s);
  if (const auto* pa = std::get_if<ProductAnsatz>(&strategy)) {
    if (static_cast<int>(pa->points.size()) != data.k) {
      throw Error(ErrorCode::InvalidArgument, "product ansatz needs exactly k points");
    }
    if (!(pa->eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "product ansatz needs eps > 0");
    const double minsep = 4.0 * g.h();
    for (std::size_t a = 0; a < pa->points.size(); ++a) {
      if (!(-g.shape().signed_distance(pa->points[a]) > minsep)) {
        throw Error(ErrorCode::DefectsTooClose, "ansatz point within 4h of the boundary");
      }
      for (std::size_t b = 0; b < a; ++b)
        if (!(norm(pa->points[a] - pa->points[b]) > minsep)) {
          throw Error(ErrorCode::DefectsTooClose, "ansatz points within 4h of each other");
        }
    }
    const LaplaceSolver laplace(grid);
    const std::vector<double> h = harmonic_phase(laplace, data, pa->points);
    for (int n = 0; n < g.num_nodes(); ++n) {
      if (!g.active(n)) continue;
      const Vec2 x = g.position(n);
      double mod = amp, phase = h[n];
      for (const Vec2& b : pa->points) {
        mod *= zeta(norm(x - b) / pa->eps);
        phase += std::atan2(x.y - b.y, x.x - b.x);
      }
      f(n, 0) = mod * std::cos(phase);
      f(n, 1) = mod * std::sin(phase);
      if (ncomp == 3) f(n, 2) = data.s / 3.0;
    }
  } else if (const auto* ri = std::get_if<RandomInit>(&strategy)) {
    std::mt19937_64 rng(ri->seed);
    for (int n = 0; n < g.num_nodes(); ++n) {
      if (!g.active(n)) continue;
      f(n, 0) = amp * (2.0 * unit_uniform(rng) - 1.0);
      f(n, 1) = amp * (2.0 * unit_uniform(rng) - 1.0);
      if (ncomp == 3) f(n, 2) = data.s / 3.0 + amp / 3.0 * (2.0 * unit_uniform(rng) - 1.0);
    }
  } else {
    const Vec2 p = data.p0.empty() ? Vec2{amp, 0.0} : data.p0.front();
    for (int n = 0; n < g.num_nodes(); ++n) {
      if (!g.active(n)) continue;
      f(n, 0) = p.x;
      f(n, 1) = p.y;
      if (ncomp == 3) f(n, 2) = data.s / 3.0;
    }
  }
  f.apply_boundary(data);
  return f;
}

SolveReport minimize(Field& field, const ModelParams& params, const SolveSchedule& schedule,
                     const RungCallback& on_rung) {
  if (field.ncomp() != 3) throw Error(ErrorCode::InvalidArgument, "minimize needs a (p, r) field");
  const double c = 0.5 * (params.L2() + params.L3());
  const double ap = 2.0 * (params.L1() + c);
  const double ar = 1.5 * params.L1() + 0.5 * c;
  auto make_pre = [&](double eps) {
    return ShiftedLaplace(field.grid(), 3, {ap, ap, ar}, 1.0 / (eps * eps));
  };
  return run_ladder<LdGDensity>(
      field, schedule, std::abs(params.s()), [&](double eps) { return LdGDensity(params.with_eps(eps)); },
      make_pre, on_rung);
}

SolveReport minimize_planar(Field& field, PlanarEnergy kind, const SolveSchedule& schedule,
                            const RungCallback& on_rung) {
  if (field.ncomp() != 2) throw Error(ErrorCode::InvalidArgument, "planar energies need a 2-component field");
  auto make_pre = [&](double eps) { return ShiftedLaplace(field.grid(), 2, {1.0, 1.0}, 1.0 / (eps * eps)); };
  if (kind == PlanarEnergy::GinzburgLandau) {
    return run_ladder<GLDensity>(field, schedule, 1.0, [](double eps) { return GLDensity(eps); }, make_pre,
                                 on_rung);
  }
  return run_ladder<CSHDensity>(field, schedule, 1.0, [](double eps) { return CSHDensity(eps); }, make_pre,
                                on_rung);
}

double el_residual(const Field& field, const ModelParams& params) {
  if (field.ncomp() != 3) throw Error(ErrorCode::InvalidArgument, "el_residual needs a (p, r) field");
  const Grid& g = field.grid();
  const double h2 = g.h() * g.h();
  const double L1 = params.L1(), L23 = params.L2() + params.L3();
  const double ie2 = 1.0 / (params.eps() * params.eps());
  double worst = 0.0;
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      bool ok = true;
      for (int dj = -1; dj <= 1 && ok; ++dj)
        for (int di = -1; di <= 1 && ok; ++di) ok = g.interior(g.node(i + di, j + dj));
      if (!ok) continue;
      auto at = [&](int di, int dj, int c) { return field(g.node(i + di, j + dj), c); };
      double lap[3], xx[3], yy[3], xy[3];
      for (int c = 0; c < 3; ++c) {
        xx[c] = (at(1, 0, c) - 2 * at(0, 0, c) + at(-1, 0, c)) / h2;
        yy[c] = (at(0, 1, c) - 2 * at(0, 0, c) + at(0, -1, c)) / h2;
        xy[c] = (at(1, 1, c) - at(-1, 1, c) - at(1, -1, c) + at(-1, -1, c)) / (4 * h2);
        lap[c] = xx[c] + yy[c];
      }
      const double p1 = at(0, 0, 0), p2 = at(0, 0, 1), r = at(0, 0, 2);
      const double P = p1 * p1 + p2 * p2;
      const double gP = params.bulk().d_psq(P, r), gr = params.bulk().d_r(P, r);
      const double R1 = -2 * L1 * lap[0] - L23 * (lap[0] + 0.5 * (xx[2] - yy[2])) + ie2 * 2 * p1 * gP;
      const double R2 = -2 * L1 * lap[1] - L23 * (lap[1] + xy[2]) + ie2 * 2 * p2 * gP;
      const double R3 = -1.5 * L1 * lap[2] - 0.5 * L23 * (xx[0] - yy[0] + 2 * xy[1] + 0.5 * lap[2]) + ie2 * gr;
      worst = std::max({worst, std::abs(R1), std::abs(R2), std::abs(R3)});
    }
  return worst;
}

}  // namespace ldg

#include "ldg/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "ldg/error.hpp"
#include "ldg/kernels.hpp"

namespace ldg {

namespace {

constexpr double kPi = std::numbers::pi;

// Unwraps a closed sequence of angles along the open loop. Returns the total
// increment including the closing step.
double unwrap(std::vector<double>& a) {
  const int n = static_cast<int>(a.size());
  double total = 0.0;
  double prev_raw = a[0];
  for (int i = 1; i <= n; ++i) {
    const double raw = a[i % n];
    const double d = std::remainder(raw - prev_raw, 2.0 * kPi);
    if (std::abs(d) >= 0.5 * kPi) {
      throw Error(ErrorCode::UnwrapFailure, "boundary phase sampled too coarsely to unwrap");
    }
    total += d;
    if (i < n) a[i] = a[i - 1] + d;
    prev_raw = raw;
  }
  return total;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void sort_config(Configuration& b) {
  std::sort(b.begin(), b.end(), [](Vec2 u, Vec2 v) { return u.x < v.x || (u.x == v.x && u.y < v.y); });
}

}  // namespace

std::vector<double> harmonic_h(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace) {
  return harmonic_phase(laplace, data, b);
}

WEvaluator::WEvaluator(const LaplaceSolver& laplace, const BoundaryData& data) : laplace_(laplace) {
  const Grid& g = laplace.grid();
  nb_ = g.boundary_size();
  if (static_cast<int>(data.p0.size()) != nb_) throw Error(ErrorCode::InvalidArgument, "boundary data does not match the grid");
  phi_.resize(nb_);
  for (int i = 0; i < nb_; ++i) phi_[i] = std::atan2(data.p0[i].y, data.p0[i].x);
  phi_winding_ = unwrap(phi_);
  const Eigen::MatrixXd& S = laplace.schur();
  const Eigen::Map<const Eigen::VectorXd> phi(phi_.data(), nb_);
  const Eigen::VectorXd sp = S * phi;
  s_phi_.assign(sp.data(), sp.data() + nb_);
  phi_s_phi_ = phi.dot(sp);
}

bool WEvaluator::admissible(Vec2 b) const { return grid().shape().signed_distance(b) < -margin(); }

void WEvaluator::validate(const Configuration& b) const {
  for (std::size_t l = 0; l < b.size(); ++l) {
    if (!admissible(b[l])) {
      throw Error(ErrorCode::DefectTooCloseToBoundary, "point closer than 4h to the boundary");
    }
    for (std::size_t j = 0; j < l; ++j)
      if (b[l] == b[j]) throw Error(ErrorCode::InvalidArgument, "configuration points must be distinct");
  }
}

WEvaluator::PointData WEvaluator::point_data(Vec2 b) const {
  const Grid& g = grid();
  PointData d;
  d.b = b;
  d.theta.resize(nb_);
  d.R.resize(nb_);
  d.dnu.resize(nb_);
  d.dtau.resize(nb_);
  for (int i = 0; i < nb_; ++i) {
    const Vec2 x = g.position(g.boundary_loop()[i]) - b;
    const double r2 = x.x * x.x + x.y * x.y;
    const double ds = g.boundary_ds(i);
    d.theta[i] = std::atan2(x.y, x.x);
    d.R[i] = 0.5 * std::log(r2);
    d.dnu[i] = ds * dot(x, g.boundary_normal(i)) / r2;
    d.dtau[i] = ds * dot(x, g.boundary_tangent(i)) / r2;
    d.dtau_sum += d.dtau[i];
  }
  d.winding = unwrap(d.theta);
  return d;
}

void WEvaluator::cache(const std::vector<Vec2>& points) {
  for (Vec2 b : points)
    if (!admissible(b)) throw Error(ErrorCode::DefectTooCloseToBoundary, "point closer than 4h to the boundary");
  const std::size_t first = cached_.size();
  cached_.resize(first + points.size());
  for (std::size_t i = 0; i < points.size(); ++i) cached_[first + i] = point_data(points[i]);
  // S theta for all new points in one product.
  const Eigen::MatrixXd& S = laplace_.schur();
  const int m = static_cast<int>(points.size());
  Eigen::MatrixXd theta(nb_, m);
  for (int i = 0; i < m; ++i) theta.col(i) = Eigen::Map<const Eigen::VectorXd>(cached_[first + i].theta.data(), nb_);
  const Eigen::MatrixXd st = S * theta;
  for (int i = 0; i < m; ++i) cached_[first + i].s_theta.assign(st.col(i).data(), st.col(i).data() + nb_);
}

WTerms WEvaluator::combine(const std::vector<const PointData*>& pts) const {
  const std::size_t k = pts.size();
  double winding = 0.0;
  for (const PointData* p : pts) winding += p->winding;
  if (std::abs(phi_winding_ - winding) > 1.0) {
    throw Error(ErrorCode::UnwrapFailure, "number of points does not match the boundary winding");
  }
  WTerms w;
  for (std::size_t l = 0; l < k; ++l)
    for (std::size_t j = 0; j < l; ++j) w.pair -= 2.0 * kPi * std::log(norm(pts[l]->b - pts[j]->b));

  // g = phi - sum_l theta_l + c, with c placing g[0] on the principal branch.
  double g0 = phi_[0];
  for (const PointData* p : pts) g0 -= p->theta[0];
  const double c = std::remainder(g0, 2.0 * kPi) - g0;

  double tangent = 0.0;  // oint g d_tau R with tau counterclockwise
  for (std::size_t m = 0; m < k; ++m) {
    const PointData& pm = *pts[m];
    tangent += dot(phi_, pm.dtau) + c * pm.dtau_sum;
    for (std::size_t l = 0; l < k; ++l) {
      tangent -= dot(pts[l]->theta, pm.dtau);
      w.r_normal += 0.5 * dot(pts[l]->R, pm.dnu);
    }
  }
  w.h_tangent = -tangent;

  double e = 0.5 * phi_s_phi_;
  for (std::size_t l = 0; l < k; ++l) {
    e -= dot(s_phi_, pts[l]->theta);
    for (std::size_t m = 0; m < k; ++m) e += 0.5 * dot(pts[l]->theta, pts[m]->s_theta);
  }
  w.dirichlet = e;
  return w;
}

WTerms WEvaluator::terms(const Configuration& b) const {
  validate(b);
  std::vector<PointData> data;
  data.reserve(b.size());
  const Eigen::MatrixXd& S = laplace_.schur();
  for (Vec2 x : b) {
    data.push_back(point_data(x));
    const Eigen::VectorXd st = S * Eigen::Map<const Eigen::VectorXd>(data.back().theta.data(), nb_);
    data.back().s_theta.assign(st.data(), st.data() + nb_);
  }
  std::vector<const PointData*> pts;
  for (const PointData& d : data) pts.push_back(&d);
  return combine(pts);
}

WTerms WEvaluator::terms_direct(const Configuration& b) const {
  WTerms w = terms(b);
  const Grid& g = grid();
  std::vector<double> gb(nb_);
  for (int i = 0; i < nb_; ++i) {
    const Vec2 x = g.position(g.boundary_loop()[i]);
    double v = phi_[i];
    for (Vec2 p : b) v -= std::atan2(x.y - p.y, x.x - p.x);
    gb[i] = v;
  }
  double prev = gb[0];
  gb[0] = std::remainder(gb[0], 2.0 * kPi);
  for (int i = 1; i < nb_; ++i) {
    const double raw = gb[i];
    gb[i] = gb[i - 1] + std::remainder(raw - prev, 2.0 * kPi);
    prev = raw;
  }
  const std::vector<double> h = laplace_.solve(gb);
  w.dirichlet = laplace_.dirichlet_energy(h);
  double tangent = 0.0;
  for (int i = 0; i < nb_; ++i) {
    const Vec2 x = g.position(g.boundary_loop()[i]);
    double dR = 0.0;
    for (Vec2 p : b) {
      const Vec2 d = x - p;
      dR += dot(d, g.boundary_tangent(i)) / dot(d, d);
    }
    tangent += h[g.boundary_loop()[i]] * dR * g.boundary_ds(i);
  }
  w.h_tangent = -tangent;
  return w;
}

double WEvaluator::cached_W(const std::vector<int>& index) const {
  std::vector<const PointData*> pts;
  for (int i : index) pts.push_back(&cached_[i]);
  for (std::size_t l = 0; l < pts.size(); ++l)
    for (std::size_t j = 0; j < l; ++j)
      if (pts[l]->b == pts[j]->b) throw Error(ErrorCode::InvalidArgument, "configuration points must be distinct");
  return combine(pts).total();
}

double renormalized_W(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace) {
  return WEvaluator(laplace, data)(b);
}

std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                double step, double xtol, int max_evals, int* evals) {
  const std::size_t n = x0.size();
  int count = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++count;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<std::vector<double>> xs(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += step;
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(xs[i]);
  std::vector<std::size_t> order(n + 1);
  while (count < max_evals) {
    for (std::size_t i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    double diameter = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t d = 0; d < n; ++d) diameter = std::max(diameter, std::abs(xs[i][d] - xs[best][d]));
    if (diameter < xtol) break;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t d = 0; d < n; ++d) centroid[d] += xs[i][d] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> x(n);
      for (std::size_t d = 0; d < n; ++d) x[d] = centroid[d] + t * (xs[worst][d] - centroid[d]);
      return x;
    };
    const std::vector<double> xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      const std::vector<double> xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    const std::vector<double> xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst])) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t d = 0; d < n; ++d) xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
      fs[i] = eval(xs[i]);
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  if (evals) *evals = count;
  return xs[best];
}

double golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<Vec2> scan_lattice(const Grid& grid, int scan, double* spacing) {
  if (scan < 2) throw Error(ErrorCode::InvalidArgument, "scan needs at least 2 cells");
  const auto box = grid.shape().bounding_box();
  const double w = box[1] - box[0], hgt = box[3] - box[2];
  const double dx = std::max(w, hgt) / scan;
  if (spacing) *spacing = dx;
  const int nx = static_cast<int>(std::ceil(w / dx)), ny = static_cast<int>(std::ceil(hgt / dx));
  const double x0 = 0.5 * (box[0] + box[1]) - 0.5 * (nx - 1) * dx;
  const double y0 = 0.5 * (box[2] + box[3]) - 0.5 * (ny - 1) * dx;
  std::vector<Vec2> out;
  const double margin = 4.0 * grid.h();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 p{x0 + i * dx, y0 + j * dx};
      if (grid.shape().signed_distance(p) < -margin) out.push_back(p);
    }
  return out;
}

namespace {

std::vector<double> flatten(const Configuration& b) {
  std::vector<double> x;
  for (Vec2 p : b) {
    x.push_back(p.x);
    x.push_back(p.y);
  }
  return x;
}

Configuration unflatten(const std::vector<double>& x) {
  Configuration b;
  for (std::size_t i = 0; i + 1 < x.size(); i += 2) b.push_back({x[i], x[i + 1]});
  return b;
}

// W with +inf outside the admissible set.
double guarded_W(const WEvaluator& W, const Configuration& b) {
  for (std::size_t l = 0; l < b.size(); ++l) {
    if (!W.admissible(b[l])) return std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < l; ++j)
      if (norm(b[l] - b[j]) < W.grid().h()) return std::numeric_limits<double>::infinity();
  }
  return W(b);
}

ArgminResult refine(const WEvaluator& W, Configuration start, double step, int evals_so_far) {
  int evals = 0;
  const double xtol = 1e-7;
  auto f = [&](const std::vector<double>& x) { return guarded_W(W, unflatten(x)); };
  std::vector<double> x = nelder_mead(f, flatten(start), step, xtol, 4000, &evals);
  // A restart from the result guards against premature simplex collapse.
  int more = 0;
  x = nelder_mead(f, x, 0.25 * step, xtol, 4000, &more);
  ArgminResult r;
  r.config = unflatten(x);
  sort_config(r.config);
  r.W = W(r.config);
  r.evaluations = evals_so_far + evals + more + 1;
  return r;
}

}  // namespace

ArgminResult argmin_W(int k, const BoundaryData& data, const LaplaceSolver& laplace, int scan, int starts,
                      std::uint64_t seed) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "k must be nonnegative");
  if (boundary_degree(data) != k) throw Error(ErrorCode::InvalidArgument, "k differs from the boundary winding");
  WEvaluator W(laplace, data);
  if (k == 0) {
    ArgminResult r;
    r.W = W({});
    r.evaluations = 1;
    r.certified = true;
    return r;
  }
  if (k <= 2) {
    double spacing = 0.0;
    const std::vector<Vec2> pts = scan_lattice(laplace.grid(), scan, &spacing);
    if (static_cast<int>(pts.size()) < k) throw Error(ErrorCode::InvalidArgument, "scan lattice has too few points");
    W.cache(pts);
    const int n = static_cast<int>(pts.size());
    std::vector<double> best_w(n, std::numeric_limits<double>::infinity());
    std::vector<int> best_j(n, -1);
#pragma omp parallel for schedule(dynamic, 4) num_threads(worker_count())
    for (int i = 0; i < n; ++i) {
      if (k == 1) {
        best_w[i] = W.cached_W({i});
        best_j[i] = i;
        continue;
      }
      for (int j = i + 1; j < n; ++j) {
        const double w = W.cached_W({i, j});
        if (w < best_w[i]) {
          best_w[i] = w;
          best_j[i] = j;
        }
      }
    }
    const int bi = static_cast<int>(std::min_element(best_w.begin(), best_w.end()) - best_w.begin());
    Configuration start{pts[bi]};
    if (k == 2) start.push_back(pts[best_j[bi]]);
    const int scanned = k == 1 ? n : n * (n - 1) / 2;
    ArgminResult r = refine(W, start, 0.5 * spacing, scanned);
    if (r.W > best_w[bi]) {
      r.config = start;
      sort_config(r.config);
      r.W = best_w[bi];
    }
    r.scan_cell = spacing;
    r.certified = true;
    return r;
  }
  const Grid& g = laplace.grid();
  const auto box = g.shape().bounding_box();
  const Vec2 center{0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3])};
  const double extent = 0.5 * std::min(box[1] - box[0], box[3] - box[2]);
  std::mt19937_64 rng(seed);
  ArgminResult best;
  best.W = std::numeric_limits<double>::infinity();
  int total = 0;
  for (int s = 0; s < std::max(1, starts); ++s) {
    Configuration start;
    if (s == 0) {
      for (int l = 0; l < k; ++l) {
        const double a = 2.0 * kPi * l / k;
        start.push_back(center + 0.5 * extent * Vec2{std::cos(a), std::sin(a)});
      }
    } else {
      while (static_cast<int>(start.size()) < k) {
        const Vec2 p{box[0] + (box[1] - box[0]) * unit_uniform(rng), box[2] + (box[3] - box[2]) * unit_uniform(rng)};
        bool ok = W.admissible(p) && g.shape().signed_distance(p) < -0.1 * extent;
        for (Vec2 q : start) ok = ok && norm(p - q) > 0.1 * extent;
        if (ok) start.push_back(p);
      }
    }
    ArgminResult r = refine(W, start, 0.1 * extent, 0);
    total += r.evaluations;
    if (r.W < best.W) best = r;
  }
  best.evaluations = total;
  return best;
}

std::vector<WSample> W_landscape(int k, const BoundaryData& data, const LaplaceSolver& laplace, int scan) {
  if (k != 1 && k != 2) throw Error(ErrorCode::InvalidArgument, "landscape scans support k = 1 or k = 2");
  if (boundary_degree(data) != k) throw Error(ErrorCode::InvalidArgument, "k differs from the boundary winding");
  WEvaluator W(laplace, data);
  const std::vector<Vec2> pts = scan_lattice(laplace.grid(), scan);
  W.cache(pts);
  const int n = static_cast<int>(pts.size());
  std::vector<WSample> out(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(worker_count())
  for (int i = 0; i < n; ++i) {
    if (k == 1) {
      out[i] = {{pts[i]}, W.cached_W({i})};
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    int bj = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = W.cached_W({i, j});
      if (w < best) {
        best = w;
        bj = j;
      }
    }
    out[i] = {{pts[i], pts[bj]}, best};
  }
  return out;
}

namespace {

// Smooth cutoff: 1 for t <= 1/2, 0 for t >= 1.
double cutoff(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  auto psi = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
  const double u = 2.0 * (1.0 - t);
  return psi(u) / (psi(u) + psi(1.0 - u));
}

// Gradient of a node-indexed Q1 field at reference coordinates of a cell.
Vec2 q1_gradient(const Grid& g, int c, double xi, double eta, const std::vector<double>& u) {
  const auto nd = g.cell_nodes(c);
  const double dnxi[4] = {-(1 - eta), (1 - eta), eta, -eta};
  const double dneta[4] = {-(1 - xi), -xi, xi, (1 - xi)};
  double xxi = 0, xeta = 0, yxi = 0, yeta = 0, uxi = 0, ueta = 0;
  for (int q = 0; q < 4; ++q) {
    const Vec2 p = g.position(nd[q]);
    xxi += p.x * dnxi[q];
    xeta += p.x * dneta[q];
    yxi += p.y * dnxi[q];
    yeta += p.y * dneta[q];
    uxi += u[nd[q]] * dnxi[q];
    ueta += u[nd[q]] * dneta[q];
  }
  const double det = xxi * yeta - xeta * yxi;
  return {(yeta * uxi - yxi * ueta) / det, (-xeta * uxi + xxi * ueta) / det};
}

}  // namespace

double annulus_energy(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace, double rho) {
  const Grid& g = laplace.grid();
  WEvaluator(laplace, data).terms(b);  // validates the configuration
  const std::vector<double> h = harmonic_h(b, data, laplace);
  // Radius of the polar patches: half the distance to the boundary and to the other points.
  double rho0 = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < b.size(); ++l) {
    rho0 = std::min(rho0, -0.5 * g.shape().signed_distance(b[l]));
    for (std::size_t j = 0; j < l; ++j) rho0 = std::min(rho0, 0.5 * norm(b[l] - b[j]));
  }
  if (!(rho < 0.5 * rho0)) throw Error(ErrorCode::InvalidArgument, "rho too large for the configuration");

  auto grad_phase = [&](Vec2 x, Vec2 grad_h) {
    Vec2 v = grad_h;
    for (Vec2 p : b) {
      const Vec2 d = x - p;
      const double r2 = dot(d, d);
      v = v + Vec2{-d.y / r2, d.x / r2};
    }
    return v;
  };
  auto weight_outside = [&](Vec2 x) {
    double w = 1.0;
    for (Vec2 p : b) w -= cutoff(norm(x - p) / rho0);
    return w;
  };

  // Cell quadrature of the far part with a 4x4 Gauss rule per cell.
  static const double gx[4] = {0.0694318442029737, 0.3300094782075719, 0.6699905217924281, 0.9305681557970263};
  static const double gw[4] = {0.1739274225687269, 0.3260725774312731, 0.3260725774312731, 0.1739274225687269};
  double far = 0.0;
  for (int c = 0; c < g.num_cells(); ++c) {
    if (!g.cell_active(c)) continue;
    const auto nd = g.cell_nodes(c);
    std::array<Vec2, 4> p;
    for (int q = 0; q < 4; ++q) p[q] = g.position(nd[q]);
    for (int a = 0; a < 4; ++a)
      for (int e = 0; e < 4; ++e) {
        const double xi = gx[a], eta = gx[e];
        const Vec2 x = map_to_physical(g, c, xi, eta);
        const double w = weight_outside(x);
        if (w == 0.0) continue;
        const Vec2 dxi = (1 - eta) * (p[1] - p[0]) + eta * (p[2] - p[3]);
        const Vec2 deta = (1 - xi) * (p[3] - p[0]) + xi * (p[2] - p[1]);
        const double det = dxi.x * deta.y - deta.x * dxi.y;
        const Vec2 v = grad_phase(x, q1_gradient(g, c, xi, eta, h));
        far += gw[a] * gw[e] * det * w * 0.5 * dot(v, v);
      }
  }

  // Polar quadrature around each point: Gauss-Legendre in log r, trapezoid in angle.
  constexpr int kRadial = 24, kPanels = 4, kAngular = 512;
  static const double lx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static const double lw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  double near = 0.0;
  for (Vec2 p0 : b) {
    const double u0 = std::log(rho), u1 = std::log(rho0);
    const double du = (u1 - u0) / (kRadial * kPanels / 4);
    for (int panel = 0; panel < kRadial * kPanels / 4; ++panel)
      for (int q = 0; q < 4; ++q) {
        const double u = u0 + du * (panel + 0.5 * (lx[q] + 1.0));
        const double r = std::exp(u);
        const double chi = cutoff(r / rho0);
        if (chi == 0.0) continue;
        double ring = 0.0;
        for (int a = 0; a < kAngular; ++a) {
          const double t = 2.0 * kPi * (a + 0.5) / kAngular;
          const Vec2 x = p0 + r * Vec2{std::cos(t), std::sin(t)};
          int c;
          double xi, eta;
          if (!g.locate(x, c, xi, eta)) throw Error(ErrorCode::InvalidArgument, "polar patch leaves the grid");
          const Vec2 v = grad_phase(x, q1_gradient(g, c, xi, eta, h));
          ring += 0.5 * dot(v, v);
        }
        near += 0.5 * du * lw[q] * chi * r * r * ring * (2.0 * kPi / kAngular);
      }
  }
  return 0.25 * data.s * data.s * (far + near);
}

AnnulusFit annulus_identity(const Configuration& b, const BoundaryData& data, const LaplaceSolver& laplace,
                            const std::vector<double>& rho) {
  if (rho.size() < 2) throw Error(ErrorCode::InsufficientSamples, "annulus fit needs two radii");
  AnnulusFit fit;
  fit.rho = rho;
  const double scale = 0.25 * data.s * data.s;
  const double k = static_cast<double>(b.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double r : rho) {
    const double e = annulus_energy(b, data, laplace, r);
    fit.energy.push_back(e);
    const double y = e / scale - kPi * k * std::log(1.0 / r);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
  }
  const double n = static_cast<double>(rho.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.W_fit = (sy - slope * sx) / n;
  fit.W = renormalized_W(b, data, laplace);
  fit.rel_error = std::abs(fit.W_fit - fit.W) / std::max(std::abs(fit.W), 1e-12);
  return fit;
}

CellProblemResult cell_problem_L(const std::vector<double>& tau, const ModelParams& params, double resolution,
                                 double beta, double tol, int max_iters) {
  if (tau.size() < 2) throw Error(ErrorCode::InvalidArgument, "cell problem needs at least two tau values");
  std::vector<double> ladder = tau;
  std::sort(ladder.begin(), ladder.end(), std::greater<>());
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0 && ladder[i] <= 0.5)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 0.5]");
    if (i > 0 && ladder[i] == ladder[i - 1]) throw Error(ErrorCode::InvalidArgument, "tau values must be distinct");
  }
  auto grid = Grid::build(ShapeSpec{Disk{1.0}, {0.0, 0.0}}, resolution);
  const double s = params.s();
  const BoundaryData data = make_boundary_data(*grid, s, 1, beta);
  Field field = init_field(grid, data, ProductAnsatz{{Vec2{0.0, 0.0}}, ladder.front()});
  SolveSchedule schedule;
  schedule.eps = ladder;
  schedule.tol = tol;
  schedule.max_iters = max_iters;
  const double slope = (2.0 * params.L1() + params.L2() + params.L3()) * 0.25 * s * s * kPi;
  CellProblemResult out;
  std::vector<RungReport> rungs;
  minimize(field, params, schedule, [&](const RungReport& r, const Field&) { rungs.push_back(r); });
  for (std::size_t i = ladder.size(); i-- > 0;) {
    out.tau.push_back(ladder[i]);
    out.G.push_back(rungs[i].energy.total());
    out.L.push_back(rungs[i].energy.total() + slope * std::log(ladder[i]));
    out.rungs.push_back(rungs[i]);
  }
  for (std::size_t i = 0; i + 1 < out.L.size(); ++i) {
    out.monotone_slack = std::max(out.monotone_slack, out.L[i] - out.L[i + 1]);
  }
  fit_core_energy(out);
  return out;
}

void fit_core_energy(CellProblemResult& result) {
  const std::size_t n = result.tau.size();
  if (n < 3) throw Error(ErrorCode::InsufficientSamples, "core energy fit needs three samples");
  auto solve = [&](double q, double& gamma, double& c) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::pow(result.tau[i], q);
      sx += x;
      sy += result.L[i];
      sxx += x * x;
      sxy += x * result.L[i];
    }
    const double m = static_cast<double>(n);
    c = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    gamma = (sy - c * sx) / m;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = gamma + c * std::pow(result.tau[i], q) - result.L[i];
      ss += e * e;
    }
    return std::sqrt(ss / m);
  };
  double best_q = 0.25, best = std::numeric_limits<double>::infinity();
  for (double q = 0.25; q <= 4.0 + 1e-12; q += 0.05) {
    double gm, c;
    const double r = solve(q, gm, c);
    if (r < best) {
      best = r;
      best_q = q;
    }
  }
  const double q = golden_section(
      [&](double x) {
        double gm, c;
        return solve(x, gm, c);
      },
      std::max(0.25, best_q - 0.05), std::min(4.0, best_q + 0.05), 1e-6);
  result.q = q;
  result.fit_rms = solve(q, result.gamma, result.c);
}

}  // namespace ldg

#include "ldg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ldg/error.hpp"

namespace ldg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kEllipseTable = 4096;

double wrap_unit(double t) {
  t -= std::floor(t);
  return t >= 1.0 ? 0.0 : t;
}

double ellipse_speed(double a, double b, double psi) {
  return std::hypot(a * std::sin(psi), b * std::cos(psi));
}

}  // namespace

std::string ShapeSpec::name() const {
  if (std::holds_alternative<Disk>(kind)) return "disk";
  if (std::holds_alternative<Ellipse>(kind)) return "ellipse";
  return "rect";
}

Shape::Shape(ShapeSpec spec) : spec_(std::move(spec)) {
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) {
    if (!(d->radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "disk radius must be positive");
    perimeter_ = 2.0 * kPi * d->radius;
  } else if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) {
    if (!(e->a > 0.0 && e->b > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
    }
    // Cumulative arc length by composite Simpson on each table interval.
    ellipse_arc_.assign(kEllipseTable + 1, 0.0);
    const double dpsi = 2.0 * kPi / kEllipseTable;
    for (int i = 0; i < kEllipseTable; ++i) {
      const double p0 = i * dpsi;
      const double seg = dpsi / 6.0 *
                         (ellipse_speed(e->a, e->b, p0) +
                          4.0 * ellipse_speed(e->a, e->b, p0 + 0.5 * dpsi) +
                          ellipse_speed(e->a, e->b, p0 + dpsi));
      ellipse_arc_[i + 1] = ellipse_arc_[i] + seg;
    }
    perimeter_ = ellipse_arc_.back();
  } else {
    const auto& r = std::get<RoundedRect>(spec_.kind);
    if (!(r.width > 0.0 && r.height > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "rectangle extents must be positive");
    }
    if (!(r.corner_radius > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "sharp corners are not supported; corner radius must be > 0");
    }
    if (2.0 * r.corner_radius > std::min(r.width, r.height)) {
      throw Error(ErrorCode::InvalidArgument, "corner radius exceeds half the short side");
    }
    const double ai = 0.5 * r.width - r.corner_radius;
    const double bi = 0.5 * r.height - r.corner_radius;
    perimeter_ = 4.0 * ai + 4.0 * bi + 2.0 * kPi * r.corner_radius;
  }
}

double Shape::area() const {
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) return kPi * d->radius * d->radius;
  if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) return kPi * e->a * e->b;
  const auto& r = std::get<RoundedRect>(spec_.kind);
  return r.width * r.height - (4.0 - kPi) * r.corner_radius * r.corner_radius;
}

double Shape::min_feature() const {
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) return 2.0 * d->radius;
  if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) return 2.0 * std::min(e->a, e->b);
  const auto& r = std::get<RoundedRect>(spec_.kind);
  return std::min({r.width, r.height});
}

std::array<double, 4> Shape::bounding_box() const {
  double hx = 0, hy = 0;
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) {
    hx = hy = d->radius;
  } else if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) {
    hx = e->a;
    hy = e->b;
  } else {
    const auto& r = std::get<RoundedRect>(spec_.kind);
    hx = 0.5 * r.width;
    hy = 0.5 * r.height;
  }
  return {spec_.center.x - hx, spec_.center.x + hx, spec_.center.y - hy, spec_.center.y + hy};
}

double Shape::signed_distance(Vec2 x) const { return sd_local(x - spec_.center); }

BoundaryPoint Shape::project(Vec2 x) const {
  BoundaryPoint bp = project_local(x - spec_.center);
  bp.point = bp.point + spec_.center;
  return bp;
}

double Shape::sd_local(Vec2 x) const {
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) return norm(x) - d->radius;
  if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) {
    const BoundaryPoint bp = project_local(x);
    const double dist = norm(x - bp.point);
    const double implicit = (x.x / e->a) * (x.x / e->a) + (x.y / e->b) * (x.y / e->b) - 1.0;
    return implicit < 0.0 ? -dist : dist;
  }
  const auto& r = std::get<RoundedRect>(spec_.kind);
  const double qx = std::abs(x.x) - (0.5 * r.width - r.corner_radius);
  const double qy = std::abs(x.y) - (0.5 * r.height - r.corner_radius);
  const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
  return outside + std::min(std::max(qx, qy), 0.0) - r.corner_radius;
}

BoundaryPoint Shape::project_local(Vec2 x) const {
  BoundaryPoint bp;
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) {
    const double len = norm(x);
    const Vec2 n = len > 0.0 ? (1.0 / len) * x : Vec2{1.0, 0.0};
    bp.point = d->radius * n;
    bp.normal = n;
    bp.t = wrap_unit(std::atan2(n.y, n.x) / (2.0 * kPi));
    return bp;
  }
  if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) {
    const double a = e->a, b = e->b;
    // Coarse search then Newton on the stationarity condition of |x - c(psi)|^2.
    double best = 0.0, best_d = 1e300;
    constexpr int kCoarse = 256;
    for (int i = 0; i < kCoarse; ++i) {
      const double psi = 2.0 * kPi * i / kCoarse;
      const double dx = x.x - a * std::cos(psi);
      const double dy = x.y - b * std::sin(psi);
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d) {
        best_d = d2;
        best = psi;
      }
    }
    double psi = best;
    for (int it = 0; it < 50; ++it) {
      const double c = std::cos(psi), s = std::sin(psi);
      const double f = (a * a - b * b) * s * c - x.x * a * s + x.y * b * c;
      const double fp = (a * a - b * b) * (c * c - s * s) - x.x * a * c - x.y * b * s;
      if (fp == 0.0) break;
      const double step = f / fp;
      psi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    psi -= 2.0 * kPi * std::floor(psi / (2.0 * kPi));
    const double c = std::cos(psi), s = std::sin(psi);
    bp.point = {a * c, b * s};
    const Vec2 n{b * c, a * s};
    bp.normal = (1.0 / norm(n)) * n;
    // Arc length from the table plus a Simpson correction inside the interval.
    const double dpsi = 2.0 * kPi / kEllipseTable;
    const int i = std::min(kEllipseTable - 1, static_cast<int>(psi / dpsi));
    const double p0 = i * dpsi;
    const double part = (psi - p0) / 6.0 *
                        (ellipse_speed(a, b, p0) + 4.0 * ellipse_speed(a, b, 0.5 * (p0 + psi)) +
                         ellipse_speed(a, b, psi));
    bp.t = wrap_unit((ellipse_arc_[i] + part) / perimeter_);
    return bp;
  }
  const auto& r = std::get<RoundedRect>(spec_.kind);
  const double ai = 0.5 * r.width - r.corner_radius;
  const double bi = 0.5 * r.height - r.corner_radius;
  const double rad = r.corner_radius;
  const double ax = std::abs(x.x), ay = std::abs(x.y);
  const double sx = x.x < 0.0 ? -1.0 : 1.0;
  const double sy = x.y < 0.0 ? -1.0 : 1.0;
  if (ax > ai && ay > bi) {
    const Vec2 c{sx * ai, sy * bi};
    const Vec2 d = x - c;
    const Vec2 n = (1.0 / norm(d)) * d;
    bp.point = c + rad * n;
    bp.normal = n;
  } else if (ax > ai || (ay <= bi && (0.5 * r.width - ax) <= (0.5 * r.height - ay))) {
    bp.point = {sx * 0.5 * r.width, std::clamp(x.y, -bi, bi)};
    bp.normal = {sx, 0.0};
  } else {
    bp.point = {std::clamp(x.x, -ai, ai), sy * 0.5 * r.height};
    bp.normal = {0.0, sy};
  }
  // Arc length, counterclockwise from (W/2, 0).
  const double arc = 0.5 * kPi * rad;
  const double px = bp.point.x, py = bp.point.y;
  double s = 0.0;
  const double ang = std::atan2(bp.normal.y, bp.normal.x);  // in (-pi, pi]
  if (bp.normal.x > 0.5 && std::abs(bp.normal.y) < 1e-12) {
    s = py >= 0.0 ? py : 4.0 * ai + 4.0 * bi + 2.0 * kPi * rad + py;
  } else if (bp.normal.y > 0.5 && std::abs(bp.normal.x) < 1e-12) {
    s = bi + arc + (ai - px);
  } else if (bp.normal.x < -0.5 && std::abs(bp.normal.y) < 1e-12) {
    s = bi + 2.0 * arc + 2.0 * ai + (bi - py);
  } else if (bp.normal.y < -0.5 && std::abs(bp.normal.x) < 1e-12) {
    s = 3.0 * bi + 3.0 * arc + 2.0 * ai + (px + ai);
  } else if (bp.normal.x > 0.0 && bp.normal.y > 0.0) {
    s = bi + rad * ang;
  } else if (bp.normal.x < 0.0 && bp.normal.y > 0.0) {
    s = bi + arc + 2.0 * ai + rad * (ang - 0.5 * kPi);
  } else if (bp.normal.x < 0.0 && bp.normal.y < 0.0) {
    s = 3.0 * bi + 2.0 * arc + 2.0 * ai + rad * (ang + kPi);
  } else {
    s = 3.0 * bi + 3.0 * arc + 4.0 * ai + rad * (ang + 0.5 * kPi);
  }
  bp.t = wrap_unit(s / perimeter_);
  return bp;
}

Vec2 Shape::point_at(double t) const {
  t = wrap_unit(t);
  Vec2 local;
  if (const auto* d = std::get_if<Disk>(&spec_.kind)) {
    local = {d->radius * std::cos(2.0 * kPi * t), d->radius * std::sin(2.0 * kPi * t)};
  } else if (const auto* e = std::get_if<Ellipse>(&spec_.kind)) {
    const double target = t * perimeter_;
    const auto it = std::upper_bound(ellipse_arc_.begin(), ellipse_arc_.end(), target);
    const int i = std::clamp(static_cast<int>(it - ellipse_arc_.begin()) - 1, 0, kEllipseTable - 1);
    const double dpsi = 2.0 * kPi / kEllipseTable;
    // Newton inside the table interval.
    double psi = i * dpsi;
    for (int k = 0; k < 30; ++k) {
      const double p0 = i * dpsi;
      const double part = (psi - p0) / 6.0 *
                          (ellipse_speed(e->a, e->b, p0) +
                           4.0 * ellipse_speed(e->a, e->b, 0.5 * (p0 + psi)) +
                           ellipse_speed(e->a, e->b, psi));
      const double f = ellipse_arc_[i] + part - target;
      psi -= f / ellipse_speed(e->a, e->b, psi);
      if (std::abs(f) < 1e-15) break;
    }
    local = {e->a * std::cos(psi), e->b * std::sin(psi)};
  } else {
    const auto& r = std::get<RoundedRect>(spec_.kind);
    const double ai = 0.5 * r.width - r.corner_radius;
    const double bi = 0.5 * r.height - r.corner_radius;
    const double rad = r.corner_radius;
    const double arc = 0.5 * kPi * rad;
    double s = t * perimeter_;
    const double W = 0.5 * r.width, H = 0.5 * r.height;
    auto corner = [&](Vec2 c, double a0, double ds) {
      const double a = a0 + ds / rad;
      return c + rad * Vec2{std::cos(a), std::sin(a)};
    };
    if (s < bi) local = {W, s};
    else if ((s -= bi) < arc) local = corner({ai, bi}, 0.0, s);
    else if ((s -= arc) < 2 * ai) local = {ai - s, H};
    else if ((s -= 2 * ai) < arc) local = corner({-ai, bi}, 0.5 * kPi, s);
    else if ((s -= arc) < 2 * bi) local = {-W, bi - s};
    else if ((s -= 2 * bi) < arc) local = corner({-ai, -bi}, kPi, s);
    else if ((s -= arc) < 2 * ai) local = {-ai + s, -H};
    else if ((s -= 2 * ai) < arc) local = corner({ai, -bi}, 1.5 * kPi, s);
    else local = {W, -bi + (s - arc)};
  }
  return local + spec_.center;
}

// ---------------------------------------------------------------------------

std::array<int, 4> Grid::cell_nodes(int c) const {
  const int i = c % (nx_ - 1);
  const int j = c / (nx_ - 1);
  return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

int Grid::count(NodeKind k) const {
  return static_cast<int>(std::count(kind_.begin(), kind_.end(), k));
}

double Grid::discrete_area() const {
  double a = 0.0;
  for (double w : node_weight_) a += w;
  return a;
}

namespace {

CellGeometry make_geometry(const std::array<Vec2, 4>& x, bool& ok) {
  static const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
  static const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
  const double gp[4][2] = {{g0, g0}, {g1, g0}, {g1, g1}, {g0, g1}};
  CellGeometry geo{};
  ok = true;
  for (int q = 0; q < 4; ++q) {
    const double xi = gp[q][0], eta = gp[q][1];
    const double dnxi[4] = {-(1 - eta), (1 - eta), eta, -eta};
    const double dneta[4] = {-(1 - xi), -xi, xi, (1 - xi)};
    double xxi = 0, xeta = 0, yxi = 0, yeta = 0;
    for (int c = 0; c < 4; ++c) {
      xxi += x[c].x * dnxi[c];
      xeta += x[c].x * dneta[c];
      yxi += x[c].y * dnxi[c];
      yeta += x[c].y * dneta[c];
    }
    const double det = xxi * yeta - xeta * yxi;
    if (!(det > 0.0)) ok = false;
    for (int c = 0; c < 4; ++c) {
      geo[q].dndx[c] = (yeta * dnxi[c] - yxi * dneta[c]) / det;
      geo[q].dndy[c] = (-xeta * dnxi[c] + xxi * dneta[c]) / det;
    }
    geo[q].weight = 0.25 * det;
  }
  // Corners must also keep a positive Jacobian for the map to be invertible.
  for (int c = 0; c < 4; ++c) {
    const Vec2 e1 = x[(c + 1) % 4] - x[c];
    const Vec2 e0 = x[c] - x[(c + 3) % 4];
    if (!(e0.x * e1.y - e0.y * e1.x > 0.0)) ok = false;
  }
  return geo;
}

}  // namespace

std::shared_ptr<const Grid> Grid::build(const ShapeSpec& spec, double resolution) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  std::shared_ptr<Grid> g(new Grid(spec));
  const Shape& shape = g->shape_;
  if (shape.min_feature() * resolution < 16.0) {
    throw Error(ErrorCode::ResolutionTooCoarse,
                "need at least 16 nodes across the smallest feature of the " + spec.name());
  }
  g->h_ = 1.0 / resolution;
  const double h = g->h_;
  if (const auto* r = std::get_if<RoundedRect>(&spec.kind); r && r->corner_radius < 2.0 * h) {
    throw Error(ErrorCode::ResolutionTooCoarse, "corner radius must span at least two cells");
  }

  const auto box = shape.bounding_box();
  const int ic = static_cast<int>(std::ceil((box[1] - spec.center.x) / h)) + 2;
  const int jc = static_cast<int>(std::ceil((box[3] - spec.center.y) / h)) + 2;
  g->nx_ = 2 * ic + 1;
  g->ny_ = 2 * jc + 1;
  g->x0_ = spec.center.x - ic * h;
  g->y0_ = spec.center.y - jc * h;
  const int nx = g->nx_, ny = g->ny_;
  const int ncx = nx - 1, ncy = ny - 1;

  std::vector<char> on(static_cast<std::size_t>(ncx) * ncy, 0);
  std::vector<double> sdc(on.size());
  for (int j = 0; j < ncy; ++j)
    for (int i = 0; i < ncx; ++i) {
      const Vec2 c{g->x0_ + (i + 0.5) * h, g->y0_ + (j + 0.5) * h};
      sdc[j * ncx + i] = shape.signed_distance(c);
      on[j * ncx + i] = sdc[j * ncx + i] < 0.0;
    }
  auto cell_on = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < ncx && j < ncy && on[j * ncx + i];
  };

  // Remove diagonal pinches so that the boundary is a simple loop.
  for (bool changed = true; changed;) {
    changed = false;
    for (int j = 1; j < ny - 1; ++j)
      for (int i = 1; i < nx - 1; ++i) {
        const bool sw = cell_on(i - 1, j - 1), se = cell_on(i, j - 1);
        const bool ne = cell_on(i, j), nw = cell_on(i - 1, j);
        int ai = -1, aj = -1, bi = -1, bj = -1;
        if (sw && ne && !se && !nw) {
          ai = i; aj = j - 1; bi = i - 1; bj = j;
        } else if (se && nw && !sw && !ne) {
          ai = i - 1; aj = j - 1; bi = i; bj = j;
        } else {
          continue;
        }
        const bool pick_a = sdc[aj * ncx + ai] <= sdc[bj * ncx + bi];
        on[pick_a ? aj * ncx + ai : bj * ncx + bi] = 1;
        changed = true;
      }
  }

  g->kind_.assign(static_cast<std::size_t>(nx) * ny, NodeKind::Exterior);
  g->pos_.resize(g->kind_.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n = j * nx + i;
      g->pos_[n] = g->lattice(i, j);
      const int cnt = int(cell_on(i - 1, j - 1)) + int(cell_on(i, j - 1)) + int(cell_on(i, j)) +
                      int(cell_on(i - 1, j));
      g->kind_[n] = cnt == 4 ? NodeKind::Interior : cnt > 0 ? NodeKind::Boundary : NodeKind::Exterior;
    }

  // Boundary edges, oriented with the active region on the left.
  std::vector<int> next(g->kind_.size(), -1);
  auto add_edge = [&](int a, int b) {
    if (next[a] != -1) throw Error(ErrorCode::GridTopology, "boundary is not a simple loop");
    next[a] = b;
  };
  for (int j = 0; j < ncy; ++j)
    for (int i = 0; i < ncx; ++i) {
      if (!on[j * ncx + i]) continue;
      const int n00 = g->node(i, j), n10 = g->node(i + 1, j);
      const int n11 = g->node(i + 1, j + 1), n01 = g->node(i, j + 1);
      if (!cell_on(i, j - 1)) add_edge(n00, n10);
      if (!cell_on(i + 1, j)) add_edge(n10, n11);
      if (!cell_on(i, j + 1)) add_edge(n11, n01);
      if (!cell_on(i - 1, j)) add_edge(n01, n00);
    }
  const int nboundary = g->count(NodeKind::Boundary);
  int start = -1;
  for (std::size_t n = 0; n < next.size(); ++n)
    if (next[n] != -1) {
      start = static_cast<int>(n);
      break;
    }
  if (start < 0) throw Error(ErrorCode::GridTopology, "empty domain");
  std::vector<int> loop;
  for (int n = start;;) {
    loop.push_back(n);
    n = next[n];
    if (n == start) break;
    if (n < 0 || static_cast<int>(loop.size()) > nboundary) {
      throw Error(ErrorCode::GridTopology, "boundary loop does not close");
    }
  }
  if (static_cast<int>(loop.size()) != nboundary) {
    throw Error(ErrorCode::GridTopology, "domain boundary has more than one component");
  }

  // Snap onto the curve and rotate the loop so it starts at the smallest t.
  std::vector<BoundaryPoint> proj(loop.size());
  for (std::size_t k = 0; k < loop.size(); ++k) proj[k] = shape.project(g->pos_[loop[k]]);
  const auto first = std::min_element(proj.begin(), proj.end(),
                                       [](const auto& a, const auto& b) { return a.t < b.t; }) -
                     proj.begin();
  std::rotate(loop.begin(), loop.begin() + first, loop.end());
  std::rotate(proj.begin(), proj.begin() + first, proj.end());
  const std::size_t nb = loop.size();
  g->loop_ = loop;
  g->loop_index_.assign(g->kind_.size(), -1);
  g->loop_normal_.resize(nb);
  g->loop_t_.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    g->loop_index_[loop[k]] = static_cast<int>(k);
    g->pos_[loop[k]] = proj[k].point;
    g->loop_normal_[k] = proj[k].normal;
    g->loop_t_[k] = proj[k].t;
    if (k > 0 && !(proj[k].t > proj[k - 1].t)) {
      throw Error(ErrorCode::GridTopology, "snapped boundary nodes are not ordered along the curve");
    }
  }
  g->loop_ds_.resize(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Vec2 a = g->pos_[loop[(k + nb - 1) % nb]], b = g->pos_[loop[k]], c = g->pos_[loop[(k + 1) % nb]];
    g->loop_ds_[k] = 0.5 * (norm(b - a) + norm(c - b));
  }

  // Cell geometry.
  g->geom_table_.clear();
  {
    bool ok = true;
    g->geom_table_.push_back(make_geometry({Vec2{0, 0}, Vec2{h, 0}, Vec2{h, h}, Vec2{0, h}}, ok));
  }
  g->cell_geom_.assign(static_cast<std::size_t>(ncx) * ncy, -1);
  g->node_weight_.assign(g->kind_.size(), 0.0);
  for (int j = 0; j < ncy; ++j)
    for (int i = 0; i < ncx; ++i) {
      const int c = j * ncx + i;
      if (!on[c]) continue;
      const auto nodes = g->cell_nodes(c);
      bool moved = false;
      std::array<Vec2, 4> x;
      for (int q = 0; q < 4; ++q) {
        x[q] = g->pos_[nodes[q]];
        moved = moved || g->kind_[nodes[q]] == NodeKind::Boundary;
      }
      const Vec2 l = g->lattice(i, j);
      bool really_moved = false;
      for (int q = 0; q < 4; ++q) {
        const Vec2 ref = l + Vec2{(q == 1 || q == 2) ? h : 0.0, (q >= 2) ? h : 0.0};
        if (x[q].x != ref.x || x[q].y != ref.y) really_moved = true;
      }
      if (!moved || !really_moved) {
        g->cell_geom_[c] = 0;
      } else {
        bool ok = true;
        g->geom_table_.push_back(make_geometry(x, ok));
        if (!ok) throw Error(ErrorCode::GridTopology, "snapping produced a degenerate boundary cell");
        g->cell_geom_[c] = static_cast<int>(g->geom_table_.size()) - 1;
      }
      double area = 0.0;
      for (const auto& gp : g->geom_table_[g->cell_geom_[c]]) area += gp.weight;
      for (int q = 0; q < 4; ++q) g->node_weight_[nodes[q]] += 0.25 * area;
    }
  return g;
}

Vec2 map_to_physical(const Grid& grid, int cell, double xi, double eta) {
  const auto n = grid.cell_nodes(cell);
  const double w[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  Vec2 out{};
  for (int q = 0; q < 4; ++q) out = out + w[q] * grid.position(n[q]);
  return out;
}

bool Grid::locate(Vec2 x, int& cell_out, double& xi_out, double& eta_out) const {
  const int ci = static_cast<int>(std::floor((x.x - x0_) / h_));
  const int cj = static_cast<int>(std::floor((x.y - y0_) / h_));
  const int ncx = nx_ - 1, ncy = ny_ - 1;
  if (ci >= 0 && cj >= 0 && ci < ncx && cj < ncy) {
    const int c = cell(ci, cj);
    if (cell_active(c) && cell_uniform(c)) {
      cell_out = c;
      xi_out = (x.x - x0_) / h_ - ci;
      eta_out = (x.y - y0_) / h_ - cj;
      return true;
    }
  }
  constexpr double kTol = 1e-10;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      const int i = ci + di, j = cj + dj;
      if (i < 0 || j < 0 || i >= ncx || j >= ncy) continue;
      const int c = cell(i, j);
      if (!cell_active(c)) continue;
      const auto nd = cell_nodes(c);
      std::array<Vec2, 4> p;
      for (int q = 0; q < 4; ++q) p[q] = pos_[nd[q]];
      double xi = 0.5, eta = 0.5;
      bool converged = false;
      for (int it = 0; it < 40; ++it) {
        const Vec2 f = map_to_physical(*this, c, xi, eta) - x;
        const Vec2 dxi = (1 - eta) * (p[1] - p[0]) + eta * (p[2] - p[3]);
        const Vec2 deta = (1 - xi) * (p[3] - p[0]) + xi * (p[2] - p[1]);
        const double det = dxi.x * deta.y - deta.x * dxi.y;
        if (det == 0.0) break;
        const double sx = (deta.y * f.x - deta.x * f.y) / det;
        const double sy = (-dxi.y * f.x + dxi.x * f.y) / det;
        xi -= sx;
        eta -= sy;
        if (std::abs(sx) + std::abs(sy) < 1e-12) {
          converged = true;
          break;
        }
      }
      if (converged && xi >= -kTol && xi <= 1 + kTol && eta >= -kTol && eta <= 1 + kTol) {
        cell_out = c;
        xi_out = std::clamp(xi, 0.0, 1.0);
        eta_out = std::clamp(eta, 0.0, 1.0);
        return true;
      }
    }
  return false;
}

}  // namespace ldg

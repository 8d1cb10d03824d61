#include "ldg/defects.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ldg/error.hpp"

namespace ldg {

int DefectSet::total_charge() const {
  int sum = 0;
  for (const Defect& d : defects) sum += d.winding;
  return sum;
}

double DefectSet::max_core_radius() const {
  double m = 0.0;
  for (const Defect& d : defects) m = std::max(m, d.core_radius);
  return m;
}

double DefectSet::min_core_radius() const {
  if (defects.empty()) return 0.0;
  double m = defects.front().core_radius;
  for (const Defect& d : defects) m = std::min(m, d.core_radius);
  return m;
}

namespace {

double modulus(const Field& f, int n) { return norm(f.p(n)); }

// 8-connected components of the active nodes where pred holds. Labels are -1 outside.
template <class Pred>
int label_components(const Grid& g, Pred pred, std::vector<int>& label) {
  label.assign(g.num_nodes(), -1);
  int count = 0;
  std::vector<int> stack;
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (label[n] >= 0 || !g.active(n) || !pred(n)) continue;
    label[n] = count;
    stack.push_back(n);
    while (!stack.empty()) {
      const int m = stack.back();
      stack.pop_back();
      const int i = g.node_i(m), j = g.node_j(m);
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= g.nx() || b >= g.ny()) continue;
          const int q = g.node(a, b);
          if (label[q] >= 0 || !g.active(q) || !pred(q)) continue;
          label[q] = count;
          stack.push_back(q);
        }
    }
    ++count;
  }
  return count;
}

Vec2 refine_position(const Field& f, int n) {
  const Grid& g = f.grid();
  const int i = g.node_i(n), j = g.node_j(n);
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di)
      if (!g.interior(g.node(i + di, j + dj))) return g.position(n);
  auto v = [&](int di, int dj) {
    const Vec2 p = f.p(g.node(i + di, j + dj));
    return dot(p, p);
  };
  const double fx = 0.5 * (v(1, 0) - v(-1, 0));
  const double fy = 0.5 * (v(0, 1) - v(0, -1));
  const double fxx = v(1, 0) - 2 * v(0, 0) + v(-1, 0);
  const double fyy = v(0, 1) - 2 * v(0, 0) + v(0, -1);
  const double fxy = 0.25 * (v(1, 1) - v(-1, 1) - v(1, -1) + v(-1, -1));
  const double det = fxx * fyy - fxy * fxy;
  if (!(fxx > 0.0) || !(det > 0.0)) return g.position(n);
  const double dx = -(fyy * fx - fxy * fy) / det;
  const double dy = -(fxx * fy - fxy * fx) / det;
  if (std::abs(dx) > 1.0 || std::abs(dy) > 1.0) return g.position(n);
  return g.position(n) + g.h() * Vec2{dx, dy};
}

}  // namespace

std::vector<int> rectangle_loop(const Grid& g, int i0, int j0, int i1, int j1) {
  std::vector<int> loop;
  for (int i = i0; i < i1; ++i) loop.push_back(g.node(i, j0));
  for (int j = j0; j < j1; ++j) loop.push_back(g.node(i1, j));
  for (int i = i1; i > i0; --i) loop.push_back(g.node(i, j1));
  for (int j = j1; j > j0; --j) loop.push_back(g.node(i0, j));
  return loop;
}

int winding_on_loop(const Field& field, const std::vector<int>& loop, double s) {
  std::vector<Vec2> values;
  values.reserve(loop.size());
  for (int n : loop) values.push_back(field.p(n));
  return winding_number(values, 0.25 * std::abs(s));
}

DefectSet detect_defects(const Field& field, double s, double mu, std::optional<int> expected_charge) {
  if (!(mu > 0.0 && mu < 1.0)) throw Error(ErrorCode::InvalidArgument, "mu must lie in (0, 1)");
  const Grid& g = field.grid();
  const double well = 0.5 * std::abs(s);
  DefectSet out;
  out.mu = mu;

  std::vector<int> label;
  const int ncomp = label_components(g, [&](int n) { return modulus(field, n) < (1.0 - mu) * well; }, label);
  std::vector<int> core_label;
  label_components(g, [&](int n) { return modulus(field, n) < 0.9 * well; }, core_label);

  struct Box {
    int i0 = 1 << 30, j0 = 1 << 30, i1 = -1, j1 = -1;
    int argmin = -1;
    bool touches_boundary = false;
  };
  std::vector<Box> boxes(ncomp);
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (label[n] < 0) continue;
    Box& b = boxes[label[n]];
    const int i = g.node_i(n), j = g.node_j(n);
    b.i0 = std::min(b.i0, i);
    b.i1 = std::max(b.i1, i);
    b.j0 = std::min(b.j0, j);
    b.j1 = std::max(b.j1, j);
    if (g.kind(n) == NodeKind::Boundary) b.touches_boundary = true;
    if (b.argmin < 0 || modulus(field, n) < modulus(field, b.argmin)) b.argmin = n;
  }

  for (int c = 0; c < ncomp; ++c) {
    const Box& b = boxes[c];
    const Vec2 where = g.position(b.argmin);
    if (b.touches_boundary) {
      out.warnings.push_back("low-|p| region touching the boundary near (" + std::to_string(where.x) + ", " +
                             std::to_string(where.y) + ")");
      continue;
    }
    // Smallest enlarged box whose perimeter is a valid loop around this component only.
    std::optional<int> winding;
    for (int m = 1; m <= 16 && !winding; ++m) {
      const int i0 = b.i0 - m, j0 = b.j0 - m, i1 = b.i1 + m, j1 = b.j1 + m;
      if (i0 < 0 || j0 < 0 || i1 >= g.nx() || j1 >= g.ny()) break;
      bool ok = true;
      for (int j = j0; j <= j1 && ok; ++j)
        for (int i = i0; i <= i1 && ok; ++i) {
          const int n = g.node(i, j);
          const bool edge = i == i0 || i == i1 || j == j0 || j == j1;
          if (label[n] >= 0 && label[n] != c) ok = false;
          if (edge && (!g.active(n) || modulus(field, n) < 0.5 * well)) ok = false;
        }
      if (!ok) continue;
      try {
        winding = winding_on_loop(field, rectangle_loop(g, i0, j0, i1, j1), s);
      } catch (const Error&) {
      }
    }
    if (!winding) {
      out.warnings.push_back("could not enclose the low-|p| region near (" + std::to_string(where.x) + ", " +
                             std::to_string(where.y) + ")");
      continue;
    }
    Defect d;
    d.node = b.argmin;
    d.position = refine_position(field, b.argmin);
    d.winding = *winding;
    out.defects.push_back(d);
  }

  // Core radii: area of the 0.9 sublevel component, shared between the defects it contains.
  std::vector<double> area;
  std::vector<int> sharing;
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (core_label[n] < 0) continue;
    if (core_label[n] >= static_cast<int>(area.size())) {
      area.resize(core_label[n] + 1, 0.0);
      sharing.resize(core_label[n] + 1, 0);
    }
    area[core_label[n]] += g.node_weight(n);
  }
  for (const Defect& d : out.defects) ++sharing[core_label[d.node]];
  for (Defect& d : out.defects) {
    const int l = core_label[d.node];
    d.core_radius = std::sqrt(area[l] / sharing[l] / std::numbers::pi);
  }

  std::sort(out.defects.begin(), out.defects.end(), [](const Defect& a, const Defect& b) {
    return a.position.x != b.position.x ? a.position.x < b.position.x : a.position.y < b.position.y;
  });
  if (expected_charge && out.total_charge() != *expected_charge) {
    throw Error(ErrorCode::ChargeMismatch, "detected windings sum to " + std::to_string(out.total_charge()) +
                                               ", expected " + std::to_string(*expected_charge));
  }
  return out;
}

namespace {
bool in_omega_rho(const DefectSet& defects, Vec2 x, double rho) {
  for (const Defect& d : defects.defects)
    if (norm(x - d.position) < rho) return false;
  return true;
}
}  // namespace

WellMetrics well_metrics(const Field& field, const DefectSet& defects, double s, double rho,
                         const std::vector<double>& mu_ladder) {
  const Grid& g = field.grid();
  const double well = 0.5 * std::abs(s);
  const bool has_r = field.ncomp() >= 3;
  WellMetrics m;
  m.rho = rho;
  m.mu = mu_ladder;
  m.bad_area.assign(mu_ladder.size(), 0.0);
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (!g.active(n)) continue;
    const double dp = std::abs(modulus(field, n) - well);
    const double dr = has_r ? std::abs(field.r(n) - s / 3.0) : 0.0;
    const double dist = std::hypot(dp, dr);
    for (std::size_t k = 0; k < mu_ladder.size(); ++k)
      if (dist > mu_ladder[k]) m.bad_area[k] += g.node_weight(n);
    if (!in_omega_rho(defects, g.position(n), rho)) continue;
    m.sup_p = std::max(m.sup_p, dp);
    m.sup_r = std::max(m.sup_r, dr);
  }
  return m;
}

double default_rho(const DefectSet& defects) { return 4.0 * defects.max_core_radius(); }

std::vector<DirectorSample> director_field(const Field& field, const DefectSet& defects, double rho) {
  const Grid& g = field.grid();
  std::vector<DirectorSample> out;
  for (int n = 0; n < g.num_nodes(); ++n) {
    if (!g.active(n)) continue;
    const Vec2 x = g.position(n);
    const Vec2 p = field.p(n);
    if ((p.x == 0.0 && p.y == 0.0) || !in_omega_rho(defects, x, rho)) continue;
    out.push_back({x, director_angle(p), norm(p), field.ncomp() >= 3 ? field.r(n) : 0.0});
  }
  return out;
}

}  // namespace ldg

#include "ldg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ldg/error.hpp"

namespace ldg {

namespace {

constexpr double kPi = std::numbers::pi;

// Q1 interpolation of all components at x.
std::vector<double> interpolate(const Field& f, Vec2 x) {
  int c;
  double xi, eta;
  if (!f.grid().locate(x, c, xi, eta)) throw Error(ErrorCode::InvalidArgument, "sample point outside the grid");
  const auto nd = f.grid().cell_nodes(c);
  const double w[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  std::vector<double> v(f.ncomp(), 0.0);
  for (int q = 0; q < 4; ++q)
    for (int k = 0; k < f.ncomp(); ++k) v[k] += w[q] * f(nd[q], k);
  return v;
}

// Derivative at the middle of three samples at arc positions -a, 0, b.
double three_point(double fm, double f0, double fp, double a, double b) {
  return (-b / (a * (a + b))) * fm + ((b - a) / (a * b)) * f0 + (a / (b * (a + b))) * fp;
}

}  // namespace

PohozaevReport pohozaev_check(const Field& field, const ModelParams& params) {
  const Grid& g = field.grid();
  const auto* disk = std::get_if<Disk>(&g.shape().spec().kind);
  if (!disk) throw Error(ErrorCode::NotADisk, "the Pohozaev identity is evaluated on a disk");
  if (field.ncomp() != 3) throw Error(ErrorCode::InvalidArgument, "expected a (p, r) field");
  const double R = disk->radius;
  const Vec2 center = g.shape().spec().center;
  const double A = params.L1() + 0.5 * (params.L2() + params.L3());
  const double B = 0.75 * params.L1() + 0.125 * (params.L2() + params.L3());
  const double c23 = params.L2() + params.L3();
  const int nb = g.boundary_size();
  const double perimeter = 2.0 * kPi * R;
  const double h = g.h();

  PohozaevReport rep;
  rep.radius = R;
  double int_ptau = 0.0, int_pnu = 0.0, int_rnu = 0.0, int_rtau = 0.0, int_mixed = 0.0;
  for (int k = 0; k < nb; ++k) {
    const int n = g.boundary_loop()[k];
    const int nm = g.boundary_loop()[(k + nb - 1) % nb], np = g.boundary_loop()[(k + 1) % nb];
    double a = (g.boundary_t(k) - g.boundary_t((k + nb - 1) % nb)) * perimeter;
    double b = (g.boundary_t((k + 1) % nb) - g.boundary_t(k)) * perimeter;
    if (a <= 0.0) a += perimeter;
    if (b <= 0.0) b += perimeter;
    const double ds = g.boundary_ds(k);
    double tau2 = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double d = three_point(field(nm, c), field(n, c), field(np, c), a, b);
      tau2 += d * d;
    }
    const double rtau = three_point(field(nm, 2), field(n, 2), field(np, 2), a, b);

    const Vec2 x = g.position(n);
    const Vec2 nu = g.boundary_normal(k);
    const auto v1 = interpolate(field, x - h * nu);
    const auto v2 = interpolate(field, x - 2.0 * h * nu);
    double d[3];
    for (int c = 0; c < 3; ++c) d[c] = (3.0 * field(n, c) - 4.0 * v1[c] + v2[c]) / (2.0 * h);
    const double theta = std::atan2(x.y - center.y, x.x - center.x);
    int_ptau += ds * tau2;
    int_pnu += ds * (d[0] * d[0] + d[1] * d[1]);
    int_rnu += ds * d[2] * d[2];
    int_rtau += ds * rtau * rtau;
    int_mixed += ds * d[2] * (std::cos(2.0 * theta) * d[0] + std::sin(2.0 * theta) * d[1]);
  }
  rep.tangential_p = R * A * int_ptau;
  rep.normal_p = R * A * int_pnu;
  rep.normal_r = R * B * (int_rnu - int_rtau);
  rep.mixed = 0.5 * c23 * R * int_mixed;
  rep.mixed_bound = R * 0.5 * std::abs(c23) * (0.25 * int_rnu + int_pnu);
  rep.interior = 2.0 * total_G(field, params).bulk;
  rep.residual = rep.normal_p - rep.tangential_p + rep.normal_r + rep.mixed + rep.interior;
  rep.relative_residual = std::abs(rep.residual) / std::max(rep.tangential_p, 1e-300);
  rep.data_bound = rep.tangential_p;
  rep.inequality_holds = rep.data_bound >= rep.interior;
  rep.mixed_bound_holds = std::abs(rep.mixed) <= rep.mixed_bound * (1.0 + 1e-12) + 1e-14;
  return rep;
}

std::vector<BulkBoundRow> bulk_bound_monitor(const std::vector<RungReport>& rungs) {
  std::vector<BulkBoundRow> out;
  for (const RungReport& r : rungs) {
    BulkBoundRow row{r.eps, r.energy.bulk, false};
    if (!out.empty() && out.back().scaled_bulk > 0.0) row.flagged = row.scaled_bulk > 1.5 * out.back().scaled_bulk;
    out.push_back(row);
  }
  return out;
}

double target_slope(const SlopeTarget& target) {
  if (const auto* l = std::get_if<LdGSlope>(&target)) {
    return (2.0 * l->L1 + l->L2 + l->L3) * l->s * l->s * kPi * l->k / 4.0;
  }
  return kPi * std::get<PlanarSlope>(target).k;
}

namespace {

void linear_fit(const std::vector<EnergySample>& s, double& slope, double& intercept) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const EnergySample& e : s) {
    const double x = std::log(1.0 / e.eps);
    sx += x;
    sy += e.energy;
    sxx += x * x;
    sxy += x * e.energy;
  }
  const double n = static_cast<double>(s.size());
  slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  intercept = (sy - slope * sx) / n;
}

}  // namespace

AsymptoticsFit fit_energy_asymptotics(const std::vector<EnergySample>& samples, const SlopeTarget& target) {
  if (samples.size() < 4) throw Error(ErrorCode::InsufficientSamples, "need at least 4 samples");
  double lo = samples.front().eps, hi = lo;
  for (const EnergySample& e : samples) {
    if (!(e.eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    lo = std::min(lo, e.eps);
    hi = std::max(hi, e.eps);
  }
  if (hi < 4.0 * lo * (1.0 - 1e-12)) throw Error(ErrorCode::InsufficientSamples, "eps must span a factor of 4");
  AsymptoticsFit fit;
  fit.samples = samples;
  linear_fit(samples, fit.slope, fit.intercept);
  fit.target = target_slope(target);
  fit.rel_error = std::abs(fit.slope - fit.target) / std::abs(fit.target);
  if (samples.size() >= 5) {
    std::vector<EnergySample> rest = samples;
    rest.erase(std::max_element(rest.begin(), rest.end(),
                                [](const EnergySample& a, const EnergySample& b) { return a.eps < b.eps; }));
    double intercept;
    linear_fit(rest, fit.slope_drop_largest, intercept);
  }
  return fit;
}

ShiftCheck corollary_shift_check(const Field& field, const ModelParams& params) {
  const Grid& g = field.grid();
  std::vector<Vec2> trace(g.boundary_size());
  for (int k = 0; k < g.boundary_size(); ++k) trace[k] = field.p(g.boundary_loop()[k]);
  const int k = winding_number(trace);
  ShiftCheck out;
  out.G = total_G(field, params).total();
  out.F = total_F(field, params);
  out.shift = out.G - out.F;
  out.expected = corollary_shift(params, k);
  out.rel_error = out.expected == 0.0 ? std::abs(out.shift) : std::abs(out.shift - out.expected) / std::abs(out.expected);
  return out;
}

}  // namespace ldg

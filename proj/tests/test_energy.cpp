#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ldg/energy.hpp"
#include "ldg/error.hpp"
#include "ldg/kernels.hpp"

using namespace ldg;

namespace {

const double kPi = std::numbers::pi;

ModelParams params(double L1, double L2, double L3, double eps = 0.2) {
  return ModelParams(L1, L2, L3, BulkSpec::classic(0.0, 3.0, 1.0), eps);
}

GradientSample random_sample(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GradientSample g;
  g.p[0][0] = n(rng);
  g.p[0][1] = n(rng);
  g.p[1][0] = n(rng);
  g.p[1][1] = n(rng);
  g.r[0] = n(rng);
  g.r[1] = n(rng);
  return g;
}

// Smooth field with winding k plus a seeded random interior perturbation.
Field random_field(std::shared_ptr<const Grid> g, const BoundaryData& bd, std::uint64_t seed, double amp) {
  Field f = make_pr_field(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  for (int n = 0; n < g->num_nodes(); ++n) {
    if (!g->active(n)) continue;
    const Vec2 x = g->position(n);
    const double th = std::atan2(x.y, x.x);
    const double rad = std::min(1.0, norm(x));
    f(n, 0) = 0.5 * bd.s * rad * std::cos(bd.k * th) + u(rng);
    f(n, 1) = 0.5 * bd.s * rad * std::sin(bd.k * th) + u(rng);
    f(n, 2) = bd.s / 3.0 + u(rng);
  }
  f.apply_boundary(bd);
  return f;
}

template <class Model>
void check_gradient(const Grid& g, Model model, std::vector<double> x, std::uint64_t seed) {
  const int N = Model::N;
  Assembler<Model> a(g, model);
  std::vector<double> grad(x.size()), grad_ref(x.size());
  const double e = a.evaluate(x.data(), grad.data()).total();
  const double e_ref = a.evaluate_serial(x.data(), grad_ref.data()).total();
  CHECK(std::abs(e - e_ref) <= 1e-12 * std::abs(e));
  double gmax = 0.0;
  for (double v : grad) gmax = std::max(gmax, std::abs(v));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(grad[i] - grad_ref[i]) <= 1e-12 * gmax);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int dir = 0; dir < 10; ++dir) {
    std::vector<double> d(x.size(), 0.0);
    for (int n = 0; n < g.num_nodes(); ++n)
      if (g.interior(n))
        for (int k = 0; k < N; ++k) d[n * N + k] = nd(rng);
    const double h = 1e-5;
    std::vector<double> xp = x, xm = x;
    double dd = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xp[i] += h * d[i];
      xm[i] -= h * d[i];
      dd += grad[i] * d[i];
    }
    const double fd = (a.evaluate(xp.data(), nullptr).total() - a.evaluate(xm.data(), nullptr).total()) / (2 * h);
    CHECK(std::abs(fd - dd) <= 1e-6 * std::abs(dd));
  }
}

}  // namespace

TEST_CASE("elastic density examples") {
  GradientSample g;
  g.p[0][0] = 1.0;
  CHECK(g_e_mixed(g, params(1, 0, 0)) == 1.0);
  CHECK(g_e_mixed(g, params(1, 1, 1)) == 2.0);
  CHECK(g_e_sos(g, params(1, 1, 1)) == doctest::Approx(2.0).epsilon(1e-15));
  GradientSample r;
  r.r[0] = 1.0;
  CHECK(g_e_mixed(r, params(1, 0, 0)) == 0.75);
  CHECK(g_e_sos(GradientSample{}, params(1, 0.4, -0.9)) == 0.0);
}

TEST_CASE("mixed and sum-of-squares forms agree") {
  std::mt19937_64 rng(42);
  const ModelParams pos = params(1.0, 0.3, 0.5);
  const ModelParams neg = params(1.0, -0.2, -0.5);
  const ModelParams zero = params(0.7, 0.4, -0.4);
  for (int it = 0; it < 100000; ++it) {
    const GradientSample g = random_sample(rng);
    for (const ModelParams* p : {&pos, &neg, &zero}) {
      const double a = g_e_mixed(g, *p), b = g_e_sos(g, *p);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1e-300));
    }
  }
}

TEST_CASE("elastic form is positive definite") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int it = 0; it < 200; ++it) {
    const double L1 = 0.1 + std::abs(u(rng));
    const double L2 = u(rng), L3 = u(rng);
    if (L1 + L2 + L3 <= 0.05) continue;
    const ModelParams p = params(L1, L2, L3);
    // Assemble the 6x6 matrix of the quadratic form by polarization.
    Eigen::Matrix<double, 6, 6> A;
    auto sample = [](const double* v) {
      GradientSample g;
      g.p[0][0] = v[0];
      g.p[0][1] = v[1];
      g.p[1][0] = v[2];
      g.p[1][1] = v[3];
      g.r[0] = v[4];
      g.r[1] = v[5];
      return g;
    };
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double ei[6] = {}, ej[6] = {}, eij[6] = {};
        ei[i] = 1;
        ej[j] = 1;
        eij[i] += 1;
        eij[j] += 1;
        A(i, j) = 0.5 * (g_e_sos(sample(eij), p) - g_e_sos(sample(ei), p) - g_e_sos(sample(ej), p));
      }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(A);
    CHECK(es.eigenvalues()(0) >= p.coercivity() - 1e-12);
    for (int k = 0; k < 50; ++k) {
      const GradientSample g = random_sample(rng);
      double n2 = g.r[0] * g.r[0] + g.r[1] * g.r[1];
      for (auto& row : g.p) n2 += row[0] * row[0] + row[1] * row[1];
      CHECK(g_e_sos(g, p) >= p.coercivity() * n2 - 1e-12);
    }
  }
}

TEST_CASE("classic bulk potential") {
  const BulkSpec b = BulkSpec::classic(0.0, 3.0, 1.0);
  const ClassicBulk& c = b.classic_coefficients();
  CHECK(c.s == 1.5);
  CHECK(c.d == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(std::abs(g_b0(0.5625, 0.5, c)) < 1e-14);
  CHECK(std::abs(g_b0(0.0, -1.0, c)) < 1e-14);
  try {
    g_b0(-0.1, 0.0, c);
    FAIL("expected NegativePsq");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativePsq);
  }
  CHECK_THROWS_AS(BulkSpec::classic(1.0, 3.0, 1.0), Error);  // a >= b^2/(27c)
  CHECK_THROWS_AS(BulkSpec::classic(0.0, -3.0, 1.0), Error);
  CHECK_THROWS_AS(BulkSpec::classic(0.0, 3.0, 0.0), Error);
  CHECK_THROWS_AS(ModelParams(0.0, 0.0, 0.0, b, 0.1), Error);
  CHECK_THROWS_AS(ModelParams(1.0, -1.0, -0.5, b, 0.1), Error);
  CHECK_THROWS_AS(ModelParams(1.0, 0.0, 0.0, b, 0.0), Error);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ua(-1.5, 0.3), ub(0.5, 4.0), uc(0.3, 3.0);
  for (int it = 0; it < 300; ++it) {
    const double bb = ub(rng), cc = uc(rng);
    const double aa = std::min(ua(rng), 0.99 * bb * bb / (27 * cc));
    const BulkSpec spec = BulkSpec::classic(aa, bb, cc);
    const ClassicBulk& k = spec.classic_coefficients();
    const double s = k.s;
    CHECK(s == doctest::Approx((bb + std::sqrt(bb * bb - 24 * aa * cc)) / (4 * cc)));
    CHECK(std::abs(g_b0(s * s / 4, s / 3, k)) < 1e-10 * (1 + std::abs(k.d)));
    CHECK(std::abs(g_b0(0.0, -2 * s / 3, k)) < 1e-10 * (1 + std::abs(k.d)));
    // Nonnegative on a sample of S0.
    std::uniform_real_distribution<double> up(0.0, 2 * s * s), ur(-2 * s, 2 * s);
    for (int j = 0; j < 50; ++j) CHECK(g_b0(up(rng), ur(rng), k) >= -1e-10 * (1 + std::abs(k.d)));
    // Partials against central differences.
    const double P = up(rng), r = ur(rng), h = 1e-6;
    CHECK(spec.d_psq(P, r) == doctest::Approx((g_b0(P + h, r, k) - g_b0(P - h, r, k)) / (2 * h)).epsilon(1e-6));
    CHECK(spec.d_r(P, r) == doctest::Approx((g_b0(P, r + h, k) - g_b0(P, r - h, k)) / (2 * h)).epsilon(1e-6));
    // Positive definite Hessian in (|p|^2, r) at the well.
    const double P0 = s * s / 4, r0 = s / 3, e = 1e-4;
    auto f = [&](double x, double y) { return g_b0(x, y, k); };
    const double hpp = (f(P0 + e, r0) - 2 * f(P0, r0) + f(P0 - e, r0)) / (e * e);
    const double hrr = (f(P0, r0 + e) - 2 * f(P0, r0) + f(P0, r0 - e)) / (e * e);
    const double hpr = (f(P0 + e, r0 + e) - f(P0 + e, r0 - e) - f(P0 - e, r0 + e) + f(P0 - e, r0 - e)) / (4 * e * e);
    CHECK(hpp > 0.0);
    CHECK(hpp * hrr - hpr * hpr > 0.0);
  }
}

TEST_CASE("total energies on constant fields") {
  const auto g = Grid::build({Disk{1.0}, {}}, 32);
  const ModelParams p = params(1.0, 0.5, 0.2, 0.1);
  const BoundaryData bd = make_boundary_data(*g, 1.5, 0, 0.4);
  Field f = make_pr_field(g);
  for (int n = 0; n < g->num_nodes(); ++n) {
    f(n, 0) = bd.p0[0].x;
    f(n, 1) = bd.p0[0].y;
    f(n, 2) = 0.5;
  }
  f.apply_boundary(bd);
  const EnergyBreakdown e = total_G(f, p);
  CHECK(std::abs(e.elastic) < 1e-14);
  CHECK(std::abs(e.bulk) < 1e-11);
  CHECK(std::abs(total_F(f, p)) < 1e-11);
  const Field grad = gradient_G(f, p);
  for (double v : grad.values()) CHECK(std::abs(v) < 1e-11);

  // eps scaling of the bulk term.
  Field q = f;
  for (int n = 0; n < g->num_nodes(); ++n) q(n, 2) = 0.1;
  const double b1 = total_G(q, p).bulk;
  const double b2 = total_G(q, p.with_eps(0.2)).bulk;
  CHECK(b2 == doctest::Approx(0.25 * b1).epsilon(1e-14));

  const double area = g->discrete_area();
  Field v = make_vector_field(g);
  for (int n = 0; n < g->num_nodes(); ++n) {
    v(n, 0) = std::cos(0.3);
    v(n, 1) = std::sin(0.3);
  }
  CHECK(std::abs(total_GL(v, 0.1)) < 1e-12);
  CHECK(std::abs(total_CSH(v, 0.1)) < 1e-12);
  for (double& x : v.values()) x = 0.0;
  CHECK(total_GL(v, 0.1) == doctest::Approx(area / (4 * 0.01)).epsilon(1e-13));
  CHECK(total_CSH(v, 0.1) == 0.0);
  for (int n = 0; n < g->num_nodes(); ++n) v(n, 0) = 0.5;
  CHECK(total_CSH(v, 0.1) == doctest::Approx(100 * 0.25 * 9.0 / 16.0 * area).epsilon(1e-13));
}

TEST_CASE("radial field elastic energy on an annulus") {
  // The difference of two disk grids sharing a lattice is an annulus; the
  // common core cells cancel exactly.
  const double s = 1.5, rho = 0.5, res = 128;
  const auto big = Grid::build({Disk{1.0}, {}}, res);
  const auto small = Grid::build({Disk{rho}, {}}, res);
  auto radial = [&](std::shared_ptr<const Grid> g, int ncomp, double amp) {
    Field f(g, ncomp);
    for (int n = 0; n < g->num_nodes(); ++n) {
      const Vec2 x = g->position(n);
      const double len = norm(x);
      if (len == 0.0) continue;
      f(n, 0) = amp * x.x / len;
      f(n, 1) = amp * x.y / len;
      if (ncomp == 3) f(n, 2) = s / 3;
    }
    return f;
  };
  const ModelParams p = params(1.0, 0.0, 0.0);
  const double ldg = total_G(radial(big, 3, s / 2), p).elastic - total_G(radial(small, 3, s / 2), p).elastic;
  CHECK(ldg == doctest::Approx(s * s / 4 * 2 * kPi * std::log(1 / rho)).epsilon(1e-3));

  const double eps = 0.1;
  const double gl_big = total_GL(radial(big, 2, 1.0), eps);
  const double gl_small = total_GL(radial(small, 2, 1.0), eps);
  CHECK(gl_big - gl_small == doctest::Approx(kPi * std::log(1 / rho)).epsilon(1e-3));
}

TEST_CASE("discrete gradient matches finite differences") {
  const auto g = Grid::build({Disk{1.0}, {}}, 16);
  for (auto [L2, L3] : {std::pair{0.0, 0.0}, {0.5, 0.5}, {-0.3, -0.2}, {0.8, -0.3}}) {
    const ModelParams p = params(1.0, L2, L3, 0.3);
    const BoundaryData bd = make_boundary_data(*g, 1.5, 2);
    const Field f = random_field(g, bd, 17, 0.2);
    check_gradient(*g, LdGDensity(p), f.values(), 5);
  }
  const auto e = Grid::build({Ellipse{1.0, 0.6}, {0.1, 0.2}}, 30);
  const Field fe = random_field(e, make_boundary_data(*e, 1.0, 1), 3, 0.3);
  check_gradient(*e, LdGDensity(params(1.0, 0.2, 0.9, 0.2)), fe.values(), 8);

  const BoundaryData unit = make_boundary_data(*g, 2.0, 1);
  Field v = make_vector_field(g);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (double& x : v.values()) x = u(rng);
  v.apply_boundary(unit);
  check_gradient(*g, GLDensity(0.2), v.values(), 1);
  check_gradient(*g, CSHDensity(0.2), v.values(), 2);
}

TEST_CASE("gradient is zero off the interior and kernels agree for any worker count") {
  const auto g = Grid::build({RoundedRect{2.0, 1.2, 0.3}, {}}, 24);
  const BoundaryData bd = make_boundary_data(*g, 1.5, 1);
  const Field f = random_field(g, bd, 23, 0.3);
  const ModelParams p = params(1.0, 0.4, 0.1, 0.15);
  set_worker_count(1);
  const Field g1 = gradient_G(f, p);
  const EnergyBreakdown e1 = total_G(f, p);
  set_worker_count(3);
  const Field g3 = gradient_G(f, p);
  const EnergyBreakdown e3 = total_G(f, p);
  set_worker_count(0);
  CHECK(e1.elastic == e3.elastic);
  CHECK(e1.bulk == e3.bulk);
  CHECK(g1.values() == g3.values());
  for (int n = 0; n < g->num_nodes(); ++n)
    if (!g->interior(n))
      for (int c = 0; c < 3; ++c) CHECK(g1(n, c) == 0.0);
}

TEST_CASE("p equations decouple from r when L2 + L3 = 0") {
  const auto g = Grid::build({Disk{1.0}, {}}, 16);
  CustomBulk none{[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
                  [](double, double) { return 0.0; }, 1.5};
  const ModelParams p(1.0, 0.7, -0.7, BulkSpec::custom(none), 0.2);
  const BoundaryData bd = make_boundary_data(*g, 1.5, 1);
  const Field a = random_field(g, bd, 1, 0.2);
  Field b = a;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int n = 0; n < g->num_nodes(); ++n)
    if (g->interior(n)) b(n, 2) += u(rng);
  const Field ga = gradient_G(a, p), gb = gradient_G(b, p);
  for (int n = 0; n < g->num_nodes(); ++n) {
    CHECK(std::abs(ga(n, 0) - gb(n, 0)) < 1e-13);
    CHECK(std::abs(ga(n, 1) - gb(n, 1)) < 1e-13);
  }
}

TEST_CASE("G - F depends only on the boundary data") {
  const auto g = Grid::build({Disk{1.0}, {}}, 32);
  for (int k : {1, 2}) {
    for (auto [L2, L3] : {std::pair{0.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {-0.6, 0.2}, {0.3, -0.8}}) {
      const ModelParams p(1.0, L2, L3, BulkSpec::classic(-0.5, 2.0, 1.0), 0.2);
      const BoundaryData bd = make_boundary_data(*g, p.s(), k);
      const Field f1 = random_field(g, bd, 100 + k, 0.1);
      const Field f2 = random_field(g, bd, 200 + k, 0.3);
      const double d1 = total_G(f1, p).total() - total_F(f1, p);
      const double d2 = total_G(f2, p).total() - total_F(f2, p);
      CHECK(std::abs(d1 - d2) < 1e-10);
      CHECK(std::abs(d1 - corollary_shift(p, k)) <= 0.03 * std::abs(corollary_shift(p, k)) + 1e-10);
      if (L2 == 0.0 && L3 == 0.0) CHECK(std::abs(d1) < 1e-10);
    }
  }
  const ModelParams q(1.0, 0.0, 1.0, BulkSpec::custom({[](double, double) { return 0.0; },
                                                     [](double, double) { return 0.0; },
                                                     [](double, double) { return 0.0; }, 2.0}),
                      0.1);
  CHECK(corollary_shift(q, 1) == doctest::Approx(2 * kPi).epsilon(1e-15));
}

TEST_CASE("energy is invariant under a quarter turn of the disk") {
  // Rotating x by T and p by T^2 (a half turn of p for T = 90 degrees).
  const auto g = Grid::build({Disk{1.0}, {}}, 32);
  const BoundaryData bd = make_boundary_data(*g, 1.5, 1);
  const Field f = random_field(g, bd, 77, 0.2);
  Field rf = make_pr_field(g);
  const int nx = g->nx(), c = nx / 2;
  for (int n = 0; n < g->num_nodes(); ++n) {
    if (!g->active(n)) continue;
    const int i = g->node_i(n) - c, j = g->node_j(n) - c;
    // (T f)(x) = T^2 f(T^t x), T^t (i, j) = (j, -i).
    const int src = g->node(c + j, c - i);
    rf(n, 0) = -f(src, 0);
    rf(n, 1) = -f(src, 1);
    rf(n, 2) = f(src, 2);
  }
  const ModelParams p = params(1.0, 0.6, 0.3, 0.2);
  CHECK(total_G(rf, p).total() == doctest::Approx(total_G(f, p).total()).epsilon(1e-12));
}

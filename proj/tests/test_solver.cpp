#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ldg/defects.hpp"
#include "ldg/error.hpp"
#include "ldg/harmonic.hpp"
#include "ldg/kernels.hpp"
#include "ldg/solver.hpp"

using namespace ldg;

namespace {

const double kPi = std::numbers::pi;

std::shared_ptr<const Grid> disk(double res) { return Grid::build(ShapeSpec{Disk{1.0}, {0.0, 0.0}}, res); }

ModelParams params(double L2 = 0.0, double L3 = 0.0, double eps = 0.2) {
  return ModelParams(1.0, L2, L3, BulkSpec::classic(-1.0, 1.0, 1.0), eps);
}

SolveSchedule schedule(std::vector<double> eps, double tol = 1e-8) {
  SolveSchedule s;
  s.eps = std::move(eps);
  s.tol = tol;
  return s;
}

}  // namespace

TEST_CASE("harmonic extension") {
  auto g = disk(32.0);
  LaplaceSolver L(g);
  SUBCASE("disk k = 1 with the point at the center gives a constant phase") {
    const BoundaryData bd = make_boundary_data(*g, 2.0, 1, 0.3);
    const auto h = harmonic_phase(L, bd, {{0.0, 0.0}});
    double lo = 1e300, hi = -1e300;
    for (int n = 0; n < g->num_nodes(); ++n) {
      if (!g->active(n)) continue;
      lo = std::min(lo, h[n]);
      hi = std::max(hi, h[n]);
    }
    CHECK(hi - lo < 1e-10);
    CHECK(lo == doctest::Approx(0.3).epsilon(1e-10));
  }
  SUBCASE("residual, boundary trace, and Schur energy") {
    const BoundaryData bd = make_boundary_data(*g, 2.0, 2);
    const std::vector<Vec2> b{{0.3, 0.1}, {-0.2, -0.4}};
    const auto h = harmonic_phase(L, bd, b);
    CHECK(L.residual(h) < 1e-10);
    for (int k = 0; k < g->boundary_size(); ++k) {
      const int n = g->boundary_loop()[k];
      const Vec2 x = g->position(n);
      double phase = h[n];
      for (Vec2 p : b) phase += std::atan2(x.y - p.y, x.x - p.x);
      const double target = std::atan2(bd.p0[k].y, bd.p0[k].x);
      CHECK(std::abs(std::remainder(phase - target, 2.0 * kPi)) < 1e-6);
    }
    std::vector<double> gb(g->boundary_size());
    for (int k = 0; k < g->boundary_size(); ++k) gb[k] = h[g->boundary_loop()[k]];
    CHECK(L.extension_energy(gb) == doctest::Approx(L.dirichlet_energy(h)).epsilon(1e-10));
  }
  SUBCASE("a wrong number of points fails to unwrap") {
    const BoundaryData bd = make_boundary_data(*g, 2.0, 2);
    try {
      harmonic_phase(L, bd, {{0.1, 0.0}});
      FAIL("expected UnwrapFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnwrapFailure);
    }
  }
  SUBCASE("Dirichlet energy of a linear function") {
    std::vector<double> u(g->num_nodes(), 0.0);
    for (int n = 0; n < g->num_nodes(); ++n)
      if (g->active(n)) u[n] = 2.0 * g->position(n).x - g->position(n).y;
    CHECK(L.dirichlet_energy(u) == doctest::Approx(0.5 * 5.0 * g->discrete_area()).epsilon(1e-10));
    CHECK(L.residual(u) < 1e-10);
  }
}

TEST_CASE("k = 0 from a random start reaches the constant well") {
  auto g = disk(24.0);
  const BoundaryData bd = make_boundary_data(*g, params().s(), 0);
  Field f = init_field(g, bd, RandomInit{7});
  const SolveReport rep = minimize(f, params(0.5, 0.5), schedule({0.2}));
  REQUIRE(rep.converged());
  CHECK(rep.rungs[0].energy.total() < 1e-8);
  CHECK(rep.rungs[0].monotone);
  CHECK(rep.rungs[0].energy.total() <= rep.rungs[0].initial_energy);
  CHECK(f.matches_boundary(bd));
  CHECK(el_residual(f, params(0.5, 0.5)) < 1e-3);
}

TEST_CASE("constant well field is a critical point") {
  auto g = disk(24.0);
  const BoundaryData bd = make_boundary_data(*g, params().s(), 0);
  Field f = init_field(g, bd, ConstantWell{});
  CHECK(el_residual(f, params(0.5, 0.5)) < 1e-12);
  CHECK(total_G(f, params(0.5, 0.5)).total() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("disk k = 1: descent, boundary pinning, determinism, centered defect") {
  auto g = disk(32.0);
  const ModelParams p = params(0.5, 0.5, 0.15);
  const BoundaryData bd = make_boundary_data(*g, p.s(), 1);
  Field ansatz = init_field(g, bd, ProductAnsatz{{{0.0, 0.0}}, 0.2});
  const double E0 = total_G(ansatz, p.with_eps(0.15)).total();

  SolveSchedule sch = schedule({0.2, 0.15});
  sch.perturb = 0.01;
  sch.seed = 5;
  Field f1 = ansatz;
  const SolveReport r1 = minimize(f1, p, sch);
  REQUIRE(r1.converged());
  for (const auto& r : r1.rungs) CHECK(r.monotone);
  CHECK(r1.rungs.back().energy.total() <= E0);
  CHECK(f1.matches_boundary(bd));

  Field f2 = ansatz;
  minimize(f2, p, sch);
  CHECK(f1.values() == f2.values());

  const DefectSet d = detect_defects(f1, p.s(), 0.5, 1);
  REQUIRE(d.defects.size() == 1);
  CHECK(d.defects[0].winding == 1);
  CHECK(norm(d.defects[0].position) < 2.0 * g->h());
}

TEST_CASE("solver is independent of the worker count") {
  auto g = disk(24.0);
  const ModelParams p = params(0.5, 0.0, 0.2);
  const BoundaryData bd = make_boundary_data(*g, p.s(), 2);
  const Field start = init_field(g, bd, ProductAnsatz{{{-0.4, 0.0}, {0.4, 0.0}}, 0.2});
  const int saved = worker_count();
  set_worker_count(1);
  Field a = start;
  minimize(a, p, schedule({0.2}, 1e-7));
  set_worker_count(3);
  Field b = start;
  minimize(b, p, schedule({0.2}, 1e-7));
  set_worker_count(saved);
  CHECK(a.values() == b.values());
}

TEST_CASE("warm starts do not lose to the product ansatz") {
  auto g = disk(32.0);
  const ModelParams p = params(0.5, 0.5);
  const BoundaryData bd = make_boundary_data(*g, p.s(), 1);
  Field warm = init_field(g, bd, ProductAnsatz{{{0.0, 0.0}}, 0.2});
  const SolveReport rep = minimize(warm, p, schedule({0.2, 0.1}));
  const Field fresh = init_field(g, bd, ProductAnsatz{{{0.0, 0.0}}, 0.1});
  CHECK(rep.rungs.back().energy.total() <= total_G(fresh, p.with_eps(0.1)).total());
  CHECK(rep.rungs[1].energy.total() <= rep.rungs[1].initial_energy);
}

TEST_CASE("rotated boundary data gives the same minimal energy") {
  auto g = disk(32.0);
  const ModelParams p = params(0.5, 0.5, 0.2);
  double E[2];
  int i = 0;
  for (double beta : {0.0, 0.9}) {
    const BoundaryData bd = make_boundary_data(*g, p.s(), 1, beta);
    Field f = init_field(g, bd, ProductAnsatz{{{0.0, 0.0}}, 0.2});
    E[i++] = minimize(f, p, schedule({0.2})).rungs[0].energy.total();
  }
  CHECK(E[1] == doctest::Approx(E[0]).epsilon(0.02));
}

TEST_CASE("Euler-Lagrange residual drops after solving") {
  auto g = disk(32.0);
  const ModelParams p = params(0.0, 0.0, 0.2);
  const BoundaryData bd = make_boundary_data(*g, p.s(), 1);
  Field f = init_field(g, bd, ProductAnsatz{{{0.0, 0.0}}, 0.2});
  const double before = el_residual(f, p);
  minimize(f, p, schedule({0.2}, 1e-9));
  CHECK(el_residual(f, p) < 0.1 * before);
}

TEST_CASE("product ansatz validation") {
  auto g = disk(32.0);
  const BoundaryData bd = make_boundary_data(*g, 2.0, 2);
  auto expect = [&](std::vector<Vec2> pts, ErrorCode code) {
    try {
      init_field(g, bd, ProductAnsatz{pts, 0.1});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == code);
    }
  };
  expect({{0.0, 0.0}, {g->h(), 0.0}}, ErrorCode::DefectsTooClose);
  expect({{0.0, 0.0}, {1.0 - g->h(), 0.0}}, ErrorCode::DefectsTooClose);
  expect({{0.0, 0.0}}, ErrorCode::InvalidArgument);
}

TEST_CASE("schedule validation") {
  SolveSchedule s;
  s.eps = {0.1, 0.2};
  CHECK_THROWS_AS(s.validate(), Error);
  s.eps = {};
  CHECK_THROWS_AS(s.validate(), Error);
  const auto l = SolveSchedule::ladder(0.2, 0.025, 4);
  REQUIRE(l.size() == 4);
  CHECK(l.front() == doctest::Approx(0.2));
  CHECK(l.back() == doctest::Approx(0.025));
  CHECK(l[1] / l[0] == doctest::Approx(l[2] / l[1]));
}

TEST_CASE("planar energies converge with one vortex") {
  auto g = disk(32.0);
  const BoundaryData bd = make_boundary_data(*g, 2.0, 1);
  for (PlanarEnergy kind : {PlanarEnergy::GinzburgLandau, PlanarEnergy::ChernSimonsHiggs}) {
    Field f = init_field(g, bd, ProductAnsatz{{{0.1, 0.0}}, 0.15}, 2);
    const SolveReport rep = minimize_planar(f, kind, schedule({0.15}));
    REQUIRE(rep.converged());
    CHECK(rep.rungs[0].monotone);
    CHECK(f.matches_boundary(bd));
    const DefectSet d = detect_defects(f, 2.0, 0.5, 1);
    REQUIRE(d.defects.size() == 1);
    CHECK(norm(d.defects[0].position) < 2.0 * g->h());
  }
}

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ldg/error.hpp"
#include "ldg/qtensor.hpp"

using namespace ldg;

namespace {

Eigen::Matrix3d to_eigen(const Mat3& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = m[i][j];
  return e;
}

PRPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return {{u(rng), u(rng)}, u(rng)};
}

}  // namespace

TEST_CASE("from_pr examples") {
  const Mat3 zero = from_pr({{0, 0}, 0}).matrix();
  for (const auto& row : zero)
    for (double v : row) CHECK(v == 0.0);

  const Mat3 m = from_pr({{0.5, -0.25}, 0.3}).matrix();
  CHECK(m[0][0] == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(m[0][1] == -0.25);
  CHECK(m[1][0] == -0.25);
  CHECK(m[1][1] == doctest::Approx(-0.35).epsilon(1e-15));
  CHECK(m[2][2] == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(m[0][2] == 0.0);
  CHECK(m[1][2] == 0.0);

  const Mat3 d = from_pr({{1, 0}, 0}).matrix();
  CHECK(d[0][0] == 1.0);
  CHECK(d[1][1] == -1.0);
  CHECK(d[2][2] == 0.0);
}

TEST_CASE("to_pr examples and errors") {
  const PRPoint a = to_pr(QTensor::from_matrix({{{1, 0, 0}, {0, -1, 0}, {0, 0, 0}}}));
  CHECK(a == PRPoint{{1, 0}, 0});
  CHECK(to_pr(QTensor()) == PRPoint{{0, 0}, 0});
  const PRPoint b = to_pr(QTensor::from_matrix({{{0.65, -0.25, 0}, {-0.25, -0.35, 0}, {0, 0, -0.3}}}));
  CHECK(b.p.x == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b.p.y == -0.25);
  CHECK(b.r == doctest::Approx(0.3).epsilon(1e-15));

  CHECK_THROWS_AS(to_pr(QTensor(0.1, 0, 0.1, 1e-6, 0)), Error);
  try {
    to_pr(QTensor(0.1, 0, 0.1, 0, 1e-3));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotInS0);
  }
  CHECK_THROWS_AS(QTensor::from_matrix({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}), Error);
}

TEST_CASE("round trip on random points") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 10000; ++it) {
    const PRPoint x = random_point(rng);
    const PRPoint y = to_pr(from_pr(x));
    CHECK(std::abs(y.p.x - x.p.x) <= 1e-15 * std::max(1.0, std::abs(x.p.x) + std::abs(x.r)));
    CHECK(y.p.y == x.p.y);
    CHECK(std::abs(y.r - x.r) <= 1e-15 * std::max(1.0, std::abs(x.p.x) + std::abs(x.r)));
  }
}

TEST_CASE("eigensystem examples") {
  const Phase a = eigensystem_pr({{3, 4}, 2});
  CHECK(a.eigenvalues[0] == 6.0);
  CHECK(a.eigenvalues[1] == -4.0);
  CHECK(a.eigenvalues[2] == -2.0);
  CHECK(a.kind == PhaseKind::Biaxial);

  CHECK(eigensystem_pr({{0, 0}, 0}).kind == PhaseKind::Isotropic);

  // On the well with s = 1.5: compare against s (m x m - I/3), m = e1, by a direct eigensolve.
  const PRPoint well{{0.75, 0}, 0.5};
  const Phase w = eigensystem_pr(well);
  CHECK(w.kind == PhaseKind::Uniaxial);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(uniaxial(1.5, 0.0).matrix()));
  std::array<double, 3> expect{es.eigenvalues()(2), es.eigenvalues()(1), es.eigenvalues()(0)};
  CHECK(w.eigenvalues[0] == doctest::Approx(expect[0]).epsilon(1e-14));
  CHECK(w.eigenvalues[1] == doctest::Approx(expect[1]).epsilon(1e-14));
  CHECK(w.eigenvalues[2] == doctest::Approx(expect[2]).epsilon(1e-14));
  CHECK(w.eigenvalues[0] == doctest::Approx(1.0));
  const Mat3 diff = from_pr(well).matrix();
  const Mat3 target = uniaxial(1.5, 0.0).matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(diff[i][j] == doctest::Approx(target[i][j]).epsilon(1e-14));
}

TEST_CASE("eigenvalue formulas match a generic eigensolver") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 2000; ++it) {
    const PRPoint x = random_point(rng);
    const Phase ph = eigensystem_pr(x);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(to_eigen(from_pr(x).matrix()));
    std::array<double, 3> mine = ph.eigenvalues;
    std::sort(mine.begin(), mine.end());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mine[i] - es.eigenvalues()(i)) < 1e-10);
    // Leading in-plane eigenvector has angle phase(p)/2.
    if (norm(x.p) > 1e-3) {
      const double a = ph.director_angle;
      const Eigen::Vector3d m(std::cos(a), std::sin(a), 0.0);
      const Eigen::Vector3d qm = to_eigen(from_pr(x).matrix()) * m;
      CHECK((qm - ph.eigenvalues[0] * m).norm() < 1e-10);
    }
  }
}

TEST_CASE("classification boundaries") {
  CHECK(eigensystem_pr({{0, 0}, 0.7}).kind == PhaseKind::Uniaxial);
  // A repeated eigenvalue with p != 0 needs |p| = 3|r|/2.
  CHECK(eigensystem_pr({{0.3, 0.4}, 1.0 / 3.0}).kind == PhaseKind::Uniaxial);
  CHECK(eigensystem_pr({{0.3, -0.4}, -1.0 / 3.0}).kind == PhaseKind::Uniaxial);
  CHECK(eigensystem_pr({{0.3, 0.4}, 0.9}).kind == PhaseKind::Biaxial);
  CHECK(eigensystem_pr({{0.3, 0.4}, 1.0}).kind == PhaseKind::Biaxial);
  // Relative tolerance parameter.
  CHECK(eigensystem_pr({{0.75, 0}, 0.5 + 1e-6}, 1e-5).kind == PhaseKind::Uniaxial);
  CHECK(eigensystem_pr({{0.75, 0}, 0.5 + 1e-6}, 1e-9).kind == PhaseKind::Biaxial);
}

TEST_CASE("invariants") {
  auto check = [](PRPoint x, double det, double n2) {
    const Invariants inv = invariants(x);
    CHECK(inv.det == doctest::Approx(det).epsilon(1e-12));
    CHECK(inv.norm2 == doctest::Approx(n2).epsilon(1e-12));
  };
  check({{1, 0}, 0}, 0.0, 2.0);
  check({{0, 0}, 1}, -0.25, 1.5);
  check({{0.5, -0.25}, 0.3}, 0.087, 0.76);

  std::mt19937_64 rng(3);
  for (int it = 0; it < 2000; ++it) {
    const PRPoint x = random_point(rng);
    const QTensor q = from_pr(x);
    const Invariants inv = invariants(x);
    const double scale = 1.0 + q.norm2();
    CHECK(std::abs(inv.det - to_eigen(q.matrix()).determinant()) < 1e-12 * scale * scale);
    CHECK(std::abs(inv.norm2 - q.norm2()) < 1e-12 * scale);
  }
}

TEST_CASE("frame indifference of invariants") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int it = 0; it < 1000; ++it) {
    const PRPoint x = random_point(rng);
    const double t = ang(rng);
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    R(0, 0) = std::cos(t);
    R(0, 1) = -std::sin(t);
    R(1, 0) = std::sin(t);
    R(1, 1) = std::cos(t);
    const Eigen::Matrix3d rq = R * to_eigen(from_pr(x).matrix()) * R.transpose();
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = rq(i, j);
    const PRPoint y = to_pr(QTensor::from_matrix(m), 1e-12);
    // Conjugation doubles the phase of p and leaves r alone.
    const double c2 = std::cos(2 * t), s2 = std::sin(2 * t);
    CHECK(std::abs(y.p.x - (c2 * x.p.x - s2 * x.p.y)) < 1e-12);
    CHECK(std::abs(y.p.y - (s2 * x.p.x + c2 * x.p.y)) < 1e-12);
    CHECK(std::abs(y.r - x.r) < 1e-12);
    CHECK(invariants(y).det == doctest::Approx(invariants(x).det).epsilon(1e-12));
    CHECK(invariants(y).norm2 == doctest::Approx(invariants(x).norm2).epsilon(1e-12));
  }
}

TEST_CASE("director angle") {
  CHECK(director_angle({1, 0}) == 0.0);
  CHECK(director_angle({-1, 0}) == doctest::Approx(std::numbers::pi / 2));
  CHECK(director_angle({0, 1}) == doctest::Approx(std::numbers::pi / 4));
  CHECK(director_angle({0, -1}) == doctest::Approx(3 * std::numbers::pi / 4));
  try {
    director_angle({0, 0});
    FAIL("expected ZeroP");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroP);
  }
}

TEST_CASE("limiting director and order parameters for both signs of s") {
  // s > 0: Q = s (m x m - I/3) with m at angle phase(p)/2.
  const double s = 1.5;
  const PRPoint pos{{0.5 * s * std::cos(1.0), 0.5 * s * std::sin(1.0)}, s / 3};
  const Vec2 m = limiting_director(pos.p, s);
  CHECK(std::abs(std::abs(m.x * std::cos(0.5) + m.y * std::sin(0.5)) - 1.0) < 1e-12);
  const Mat3 qa = from_pr(pos).matrix();
  const Mat3 qb = uniaxial(s, std::atan2(m.y, m.x)).matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(qa[i][j] == doctest::Approx(qb[i][j]).epsilon(1e-12));

  // s < 0: the well is |p| = |s|/2, r = s/3 and the director is m-perp.
  const double sn = -1.5;
  const PRPoint neg{{0.5 * std::abs(sn) * std::cos(1.0), 0.5 * std::abs(sn) * std::sin(1.0)}, sn / 3};
  const Vec2 mn = limiting_director(neg.p, sn);
  const Mat3 qc = from_pr(neg).matrix();
  const Mat3 qd = uniaxial(sn, std::atan2(mn.y, mn.x)).matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(qc[i][j] == doctest::Approx(qd[i][j]).epsilon(1e-12));

  const auto op = order_parameters(pos);
  CHECK(op[0] == doctest::Approx(s));
  CHECK(op[1] == doctest::Approx(0.0));
}

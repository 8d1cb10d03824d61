#pragma once

// Algebra of the order-parameter space S (symmetric traceless 3x3 matrices)
// and of the thin-film subspace S0 parametrized by (p, r).

#include <array>

namespace ldg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

double dot(Vec2 a, Vec2 b);
double norm(Vec2 a);

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Symmetric traceless 3x3 tensor stored by its five independent entries
///   [[z1, z2, z4], [z2, z3, z5], [z4, z5, -z1-z3]].
class QTensor {
 public:
  QTensor() = default;
  QTensor(double z1, double z2, double z3, double z4, double z5)
      : z_{z1, z2, z3, z4, z5} {}

  /// Builds from a full matrix; symmetrizes and checks the trace.
  static QTensor from_matrix(const Mat3& m);

  double operator()(int i, int j) const;
  Mat3 matrix() const;

  double trace() const { return 0.0; }
  double determinant() const;
  double norm2() const;  // Frobenius |Q|^2

  const std::array<double, 5>& entries() const { return z_; }

 private:
  std::array<double, 5> z_{};
};

/// A point of S0 in the linear coordinates (p1, p2, r).
struct PRPoint {
  Vec2 p;
  double r = 0.0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

enum class PhaseKind { Isotropic, Uniaxial, Biaxial };

const char* to_string(PhaseKind kind);

struct Phase {
  PhaseKind kind = PhaseKind::Isotropic;
  std::array<double, 3> eigenvalues{};  // (r/2+|p|, r/2-|p|, -r)
  double director_angle = 0.0;          // in-plane eigenvector of eigenvalues[0]
};

struct Invariants {
  double det = 0.0;
  double norm2 = 0.0;
};

QTensor from_pr(const PRPoint& point);

/// Inverse of from_pr. Throws NotInS0 when |Q13| + |Q23| > tol.
PRPoint to_pr(const QTensor& q, double tol = 1e-12);

/// Eigenvalues and classification. Two eigenvalues are treated as equal when
/// their gap is at most tol * max(1, max |lambda|).
Phase eigensystem_pr(const PRPoint& point, double tol = 1e-9);

Invariants invariants(const PRPoint& point);

/// Line-field angle of the leading in-plane eigenvector, reduced to [0, pi).
/// Throws ZeroP for p = 0.
double director_angle(Vec2 p);

/// Director m of the limiting uniaxial state. For s > 0 the tensor is
/// s (m x m - I/3) with m at angle phase(p)/2; for s < 0 the roles of m and
/// m-perp swap.
Vec2 limiting_director(Vec2 p, double s);

/// The scalar order parameters (s1, s2) of the decomposition
/// Q = s1 m x m + s2 m' x m' - (s1 + s2) I / 3.
std::array<double, 2> order_parameters(const PRPoint& point);

/// s (m x m - I/3) for an in-plane unit vector m = (cos a, sin a, 0).
QTensor uniaxial(double s, double angle);

}  // namespace ldg

#include "ldg/qtensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ldg/error.hpp"

namespace ldg {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotInS0: return "NotInS0";
    case ErrorCode::ZeroP: return "ZeroP";
    case ErrorCode::NegativePsq: return "NegativePsq";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::GridTopology: return "GridTopology";
    case ErrorCode::PhaseJumpTooLarge: return "PhaseJumpTooLarge";
    case ErrorCode::DefectsTooClose: return "DefectsTooClose";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::ChargeMismatch: return "ChargeMismatch";
    case ErrorCode::UnwrapFailure: return "UnwrapFailure";
    case ErrorCode::DefectTooCloseToBoundary: return "DefectTooCloseToBoundary";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NotADisk: return "NotADisk";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double norm(Vec2 a) { return std::hypot(a.x, a.y); }

QTensor QTensor::from_matrix(const Mat3& m) {
  const double scale =
      std::max({1.0, std::abs(m[0][0]), std::abs(m[1][1]), std::abs(m[2][2])});
  if (std::abs(m[0][0] + m[1][1] + m[2][2]) > 1e-14 * scale * 16) {
    throw Error(ErrorCode::InvalidArgument, "matrix is not traceless");
  }
  return QTensor(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1], 0.5 * (m[0][2] + m[2][0]),
                 0.5 * (m[1][2] + m[2][1]));
}

double QTensor::operator()(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i == 0 && j == 0) return z_[0];
  if (i == 0 && j == 1) return z_[1];
  if (i == 1 && j == 1) return z_[2];
  if (i == 0 && j == 2) return z_[3];
  if (i == 1 && j == 2) return z_[4];
  return -z_[0] - z_[2];
}

Mat3 QTensor::matrix() const {
  Mat3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = (*this)(i, j);
  return m;
}

double QTensor::determinant() const {
  const Mat3 m = matrix();
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double QTensor::norm2() const {
  double s = 0.0;
  const Mat3 m = matrix();
  for (const auto& row : m)
    for (double v : row) s += v * v;
  return s;
}

const char* to_string(PhaseKind kind) {
  switch (kind) {
    case PhaseKind::Isotropic: return "isotropic";
    case PhaseKind::Uniaxial: return "uniaxial";
    case PhaseKind::Biaxial: return "biaxial";
  }
  return "unknown";
}

QTensor from_pr(const PRPoint& pt) {
  // z1 = p1 + r/2, z2 = p2, z3 = r/2 - p1; the (3,3) entry is -z1 - z3 = -r.
  return QTensor(pt.p.x + 0.5 * pt.r, pt.p.y, 0.5 * pt.r - pt.p.x, 0.0, 0.0);
}

PRPoint to_pr(const QTensor& q, double tol) {
  const auto& z = q.entries();
  if (std::abs(z[3]) + std::abs(z[4]) > tol) {
    throw Error(ErrorCode::NotInS0, "off-plane entries Q13/Q23 are nonzero");
  }
  return PRPoint{{0.5 * (z[0] - z[2]), z[1]}, z[0] + z[2]};
}

Phase eigensystem_pr(const PRPoint& pt, double tol) {
  const double a = norm(pt.p);
  Phase out;
  out.eigenvalues = {0.5 * pt.r + a, 0.5 * pt.r - a, -pt.r};
  out.director_angle = a > 0.0 ? director_angle(pt.p) : 0.0;

  const auto& l = out.eigenvalues;
  const double scale = std::max({1.0, std::abs(l[0]), std::abs(l[1]), std::abs(l[2])});
  const double gap = tol * scale;
  const bool e01 = std::abs(l[0] - l[1]) <= gap;
  const bool e02 = std::abs(l[0] - l[2]) <= gap;
  const bool e12 = std::abs(l[1] - l[2]) <= gap;
  const int equal_pairs = int(e01) + int(e02) + int(e12);
  if (equal_pairs >= 2) {
    out.kind = PhaseKind::Isotropic;
  } else if (equal_pairs == 1) {
    out.kind = PhaseKind::Uniaxial;
  } else {
    out.kind = PhaseKind::Biaxial;
  }
  return out;
}

Invariants invariants(const PRPoint& pt) {
  const double psq = dot(pt.p, pt.p);
  return {(psq - 0.25 * pt.r * pt.r) * pt.r, 2.0 * psq + 1.5 * pt.r * pt.r};
}

double director_angle(Vec2 p) {
  if (p.x == 0.0 && p.y == 0.0) {
    throw Error(ErrorCode::ZeroP, "director undefined where p = 0");
  }
  double a = 0.5 * std::atan2(p.y, p.x);
  if (a < 0.0) a += std::numbers::pi;
  if (a >= std::numbers::pi) a -= std::numbers::pi;
  return a;
}

Vec2 limiting_director(Vec2 p, double s) {
  double a = director_angle(p);
  if (s < 0.0) a += 0.5 * std::numbers::pi;
  return {std::cos(a), std::sin(a)};
}

std::array<double, 2> order_parameters(const PRPoint& pt) {
  const double a = norm(pt.p);
  return {a + 1.5 * pt.r, 1.5 * pt.r - a};
}

QTensor uniaxial(double s, double angle) {
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  return QTensor(s * (c * c - 1.0 / 3.0), s * c * sn, s * (sn * sn - 1.0 / 3.0), 0.0, 0.0);
}

}  // namespace ldg

#include "ftatt/quaternion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ftatt {

UnitQuaternion::UnitQuaternion(const Quaternion& q) : q_(q) {
  const double n = q.norm();
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    throw std::domain_error("UnitQuaternion: norm " + std::to_string(n) + " is not 1");
  }
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n < 1e-12) {
    return identity();
  }
  return normalize(Quaternion(std::cos(0.5 * angle), std::sin(0.5 * angle) / n * axis));
}

UnitQuaternion UnitQuaternion::negated() const { return {(-1.0) * q_, Unchecked{}}; }

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  return {a.scalar * b.scalar - a.vec.dot(b.vec),
          a.scalar * b.vec + b.scalar * a.vec + a.vec.cross(b.vec)};
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return normalize(quat_mul(a.q_, b.q_));
}

Quaternion conjugate(const Quaternion& q) { return {q.scalar, -q.vec}; }

UnitQuaternion conjugate(const UnitQuaternion& q) {
  return {conjugate(q.q_), UnitQuaternion::Unchecked{}};
}

UnitQuaternion normalize(const Quaternion& q) {
  const double n = q.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw std::runtime_error("normalize: quaternion norm " + std::to_string(n) +
                             " is degenerate (integrator blowup?)");
  }
  return {(1.0 / n) * q, UnitQuaternion::Unchecked{}};
}

Mat3 skew(const Vec3& x) {
  Mat3 m;
  m << 0.0, -x.z(), x.y(),
       x.z(), 0.0, -x.x(),
       -x.y(), x.x(), 0.0;
  return m;
}

Mat3 rotation_matrix(const UnitQuaternion& q) {
  const double q0 = q.scalar();
  const Vec3& v = q.vec();
  return (q0 * q0 - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() -
         2.0 * q0 * skew(v);
}

Mat3 e_matrix(const Vec3& q, double q0) { return skew(q) + q0 * Mat3::Identity(); }

double sgn_pow(double x, double alpha) {
  if (x == 0.0) {
    return 0.0;
  }
  const double m = std::pow(std::abs(x), alpha);
  return x > 0.0 ? m : -m;
}

Vec3 sgn_pow(const Vec3& x, double alpha) {
  return {sgn_pow(x.x(), alpha), sgn_pow(x.y(), alpha), sgn_pow(x.z(), alpha)};
}

double sat_pow(double x, double alpha) {
  if (x == 0.0) {
    return 0.0;
  }
  const double m = std::min(std::pow(std::abs(x), alpha), 1.0);
  return x > 0.0 ? m : -m;
}

Vec3 sat_pow(const Vec3& x, double alpha) {
  return {sat_pow(x.x(), alpha), sat_pow(x.y(), alpha), sat_pow(x.z(), alpha)};
}

namespace {

// 1 - q0 for a unit quaternion, exact to rounding in both hemispheres.
double one_minus_scalar(double q0, double vec_norm_sq) {
  return q0 > 0.0 ? vec_norm_sq / (1.0 + q0) : 1.0 - q0;
}

}  // namespace

Vec3 kappa0(const UnitQuaternion& q, double alpha) {
  const double n = q.vec().norm();
  if (n < kKappaSingularTolerance) {
    return Vec3::Zero();
  }
  return q.vec() / std::pow(n, alpha);
}

Vec3 kappa1(const UnitQuaternion& q, double alpha) {
  const double n2 = q.vec().squaredNorm();
  if (std::sqrt(n2) < kKappaSingularTolerance) {
    return Vec3::Zero();
  }
  const double two_gap = 2.0 * one_minus_scalar(q.scalar(), n2);
  return q.vec() / std::pow(two_gap, 0.5 * alpha);
}

Vec3 kappa_bar(const UnitQuaternion& q, double alpha) {
  const double n2 = q.vec().squaredNorm();
  if (std::sqrt(n2) < kKappaSingularTolerance) {
    return Vec3::Zero();
  }
  const double gap = one_minus_scalar(q.scalar(), n2);
  const double x = gap * gap / n2;
  return kappa0(q, alpha) * std::expm1(-0.5 * alpha * std::log1p(x));
}

double phi(double x, double alpha) {
  if (!(std::abs(x) <= 1.0 + 1e-9)) {
    throw std::domain_error("phi: argument " + std::to_string(x) +
                            " outside [-1, 1] (invalid quaternion component)");
  }
  const double gap = std::max(0.0, 1.0 - std::clamp(x, -1.0, 1.0));
  return std::pow(2.0 * gap, 0.5 * alpha);
}

double phi(const UnitQuaternion& q, double alpha) {
  return std::pow(2.0 * one_minus_scalar(q.scalar(), q.vec().squaredNorm()), 0.5 * alpha);
}

double rho(double x, double alpha) {
  if (x >= 0.0) {
    phi(x, alpha);  // domain check only
    return 0.0;
  }
  return phi(-x, alpha) - phi(x, alpha);
}

}  // namespace ftatt

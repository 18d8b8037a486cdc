#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace ftatt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Scalar-first quaternion [q0, q1, q2, q3]. No norm constraint.
struct Quaternion {
  double scalar{1.0};
  Vec3 vec{Vec3::Zero()};

  Quaternion() = default;
  Quaternion(double s, const Vec3& v) : scalar(s), vec(v) {}
  Quaternion(double q0, double q1, double q2, double q3) : scalar(q0), vec(q1, q2, q3) {}

  static Quaternion identity() { return {}; }
  /// Pure quaternion [0, v].
  static Quaternion pure(const Vec3& v) { return {0.0, v}; }

  double norm() const { return std::sqrt(scalar * scalar + vec.squaredNorm()); }
  Eigen::Vector4d coeffs() const { return {scalar, vec.x(), vec.y(), vec.z()}; }

  Quaternion& operator+=(const Quaternion& o) {
    scalar += o.scalar;
    vec += o.vec;
    return *this;
  }
  friend Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
  friend Quaternion operator-(const Quaternion& a, const Quaternion& b) {
    return {a.scalar - b.scalar, a.vec - b.vec};
  }
  friend Quaternion operator*(double s, const Quaternion& q) { return {s * q.scalar, s * q.vec}; }
  friend Quaternion operator*(const Quaternion& q, double s) { return s * q; }
};

/// Quaternion of unit norm. The invariant | |Q| - 1 | <= kUnitTolerance is
/// checked on construction.
class UnitQuaternion {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  UnitQuaternion() = default;
  explicit UnitQuaternion(const Quaternion& q);
  UnitQuaternion(double q0, double q1, double q2, double q3)
      : UnitQuaternion(Quaternion(q0, q1, q2, q3)) {}

  static UnitQuaternion identity() { return {}; }
  /// Rotation by `angle` (rad) about the unit axis `axis`.
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);

  double scalar() const { return q_.scalar; }
  const Vec3& vec() const { return q_.vec; }
  const Quaternion& quat() const { return q_; }
  operator const Quaternion&() const { return q_; }  // NOLINT(google-explicit-constructor)

  /// -Q; represents the same attitude.
  UnitQuaternion negated() const;
  /// sign * Q for sign in {-1, +1}.
  UnitQuaternion signed_by(int sign) const { return sign < 0 ? negated() : *this; }

 private:
  struct Unchecked {};
  UnitQuaternion(const Quaternion& q, Unchecked) : q_(q) {}
  friend UnitQuaternion normalize(const Quaternion& q);
  friend UnitQuaternion conjugate(const UnitQuaternion& q);
  friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);

  Quaternion q_{};
};

Quaternion quat_mul(const Quaternion& a, const Quaternion& b);
inline Quaternion operator*(const Quaternion& a, const Quaternion& b) { return quat_mul(a, b); }
/// Product of unit quaternions; renormalized so rounding never accumulates.
UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);

Quaternion conjugate(const Quaternion& q);
UnitQuaternion conjugate(const UnitQuaternion& q);

/// Q / |Q|. Throws std::runtime_error when |Q| <= 1e-12 (integrator blowup).
UnitQuaternion normalize(const Quaternion& q);

/// x^ such that x^ y = x cross y.
Mat3 skew(const Vec3& x);

/// Rotation matrix from the inertial frame to the frame described by Q:
/// R(Q) = (q0^2 - q'q) I + 2 q q' - 2 q0 q^.
Mat3 rotation_matrix(const UnitQuaternion& q);

/// E(q) = q^ + q0 I.
Mat3 e_matrix(const Vec3& q, double q0);

/// sgn(x)|x|^alpha.
double sgn_pow(double x, double alpha);
Vec3 sgn_pow(const Vec3& x, double alpha);

/// sgn(x) min(|x|^alpha, 1).
double sat_pow(double x, double alpha);
Vec3 sat_pow(const Vec3& x, double alpha);

/// Below this vector-part norm the kappa functions take their value at the
/// singular point (the zero vector).
inline constexpr double kKappaSingularTolerance = 1e-12;

/// q / |q|^alpha, zero at |q| = 0. Norm equals |q|^(1 - alpha).
Vec3 kappa0(const UnitQuaternion& q, double alpha);

/// q / (sqrt(2(1 - q0)))^alpha, zero at q0 = 1. Norm never exceeds 1.
///
/// 2(1 - q0) is evaluated as 2|q|^2 / (1 + q0) in the q0 > 0 hemisphere so
/// the power law survives down to |q| ~ 1e-12 instead of losing all digits
/// once 1 - q0 drops below machine epsilon.
Vec3 kappa1(const UnitQuaternion& q, double alpha);

/// kappa1 - kappa0, evaluated without cancellation as
/// kappa0 * ((1 + x)^(-alpha/2) - 1) with x = (1 - q0)^2 / |q|^2.
Vec3 kappa_bar(const UnitQuaternion& q, double alpha);

/// phi(x, alpha) = (sqrt(2(1 - x)))^alpha for |x| <= 1.
/// Throws std::domain_error when |x| > 1 + 1e-9.
double phi(double x, double alpha);

/// phi(q0, alpha) for a unit quaternion, with 1 - q0 taken from the vector
/// part when q0 > 0 (no cancellation near the identity).
double phi(const UnitQuaternion& q, double alpha);

/// rho(x, alpha) = phi(|x|, alpha) - phi(x, alpha). Zero for x >= 0.
double rho(double x, double alpha);

}  // namespace ftatt

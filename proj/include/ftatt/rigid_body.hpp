#pragma once

#include "ftatt/quaternion.hpp"

namespace ftatt {

/// Symmetric positive-definite inertia matrix (kg m^2). Validated on
/// construction; caches the inverse and the extreme eigenvalues.
class InertiaMatrix {
 public:
  explicit InertiaMatrix(const Mat3& j);
  static InertiaMatrix diagonal(double jx, double jy, double jz);

  const Mat3& matrix() const { return j_; }
  const Mat3& inverse() const { return j_inv_; }
  double min_eigenvalue() const { return lambda_min_; }
  /// Induced 2-norm, i.e. the largest eigenvalue.
  double norm() const { return lambda_max_; }

 private:
  Mat3 j_;
  Mat3 j_inv_;
  double lambda_min_;
  double lambda_max_;
};

struct BodyState {
  UnitQuaternion attitude;  // F_B relative to F_I
  Vec3 omega{Vec3::Zero()};  // rad/s, body frame
};

/// Desired frame: Q_d(0) plus omega_d(t) = amplitude * sin(frequency * t).
/// A zero amplitude gives the regulation problem.
class DesiredTrajectory {
 public:
  DesiredTrajectory() = default;
  DesiredTrajectory(const UnitQuaternion& initial, const Vec3& amplitude, double frequency);
  static DesiredTrajectory regulation(const UnitQuaternion& target = UnitQuaternion::identity());

  const UnitQuaternion& initial_attitude() const { return initial_; }
  const Vec3& amplitude() const { return amplitude_; }
  double frequency() const { return frequency_; }

  Vec3 omega(double t) const;
  Vec3 omega_dot(double t) const;
  /// Q_d(t). omega_d keeps a fixed body direction, so the attitude is the
  /// initial one rotated about that direction by the integrated rate.
  UnitQuaternion attitude(double t) const;
  /// sup |omega_d(t)|
  double omega_bound() const { return amplitude_.norm(); }
  /// sup |d omega_d / dt|
  double omega_dot_bound() const { return amplitude_.norm() * std::abs(frequency_); }

 private:
  UnitQuaternion initial_{};
  Vec3 amplitude_{Vec3::Zero()};
  double frequency_{0.0};
};

struct ErrorState {
  UnitQuaternion q_e;
  Vec3 omega_e{Vec3::Zero()};
  Vec3 omega_d_body{Vec3::Zero()};  // R(Q_e) omega_d
};

struct ErrorRates {
  Quaternion q_e_dot;
  Vec3 omega_e_dot;
};

/// Q_dot = 1/2 Q (x) [0, omega].
Quaternion kinematics_rate(const Quaternion& q, const Vec3& omega);

/// omega_dot = J^-1 (-omega x J omega + u).
Vec3 dynamics_rate(const InertiaMatrix& j, const Vec3& omega, const Vec3& u);

/// Q_e = Q_d* (x) Q.
UnitQuaternion error_quaternion(const UnitQuaternion& q_d, const UnitQuaternion& q);

struct ErrorVelocity {
  Vec3 omega_e;
  Vec3 omega_d_body;
};
ErrorVelocity error_velocity(const Vec3& omega, const UnitQuaternion& q_e, const Vec3& omega_d);

ErrorState make_error_state(const BodyState& body, const UnitQuaternion& q_d, const Vec3& omega_d);

/// Xi(omega_e, wd) = (J(omega_e + wd))^ - wd^ J - J wd^. Skew-symmetric.
Mat3 xi_matrix(const InertiaMatrix& j, const Vec3& omega_e, const Vec3& omega_d_body);

/// Torque that keeps a zero tracking error on the desired trajectory:
/// wd^ J wd + J R(Q_e) omega_d_dot with wd = R(Q_e) omega_d.
Vec3 feedforward_torque(const InertiaMatrix& j, const UnitQuaternion& q_e, const Vec3& omega_d,
                        const Vec3& omega_d_dot);

/// Relative attitude motion:
///   Q_e_dot = 1/2 Q_e (x) omega_e
///   J omega_e_dot = Xi omega_e - wd^ J wd - J R(Q_e) omega_d_dot + u
ErrorRates error_dynamics_rate(const InertiaMatrix& j, const ErrorState& e,
                               const Vec3& omega_d_dot, const Vec3& u);

}  // namespace ftatt

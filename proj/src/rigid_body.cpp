#include "ftatt/rigid_body.hpp"

#include <cmath>
#include <stdexcept>

namespace ftatt {

InertiaMatrix::InertiaMatrix(const Mat3& j) : j_(j) {
  if (!j.allFinite()) {
    throw std::invalid_argument("inertia matrix has non-finite entries");
  }
  if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("inertia matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(j, Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0)) {
    throw std::invalid_argument("inertia matrix is not positive definite");
  }
  j_inv_ = j.inverse();
}

InertiaMatrix InertiaMatrix::diagonal(double jx, double jy, double jz) {
  return InertiaMatrix(Vec3(jx, jy, jz).asDiagonal().toDenseMatrix());
}

DesiredTrajectory::DesiredTrajectory(const UnitQuaternion& initial, const Vec3& amplitude,
                                     double frequency)
    : initial_(initial), amplitude_(amplitude), frequency_(frequency) {
  if (!amplitude.allFinite() || !std::isfinite(frequency)) {
    throw std::invalid_argument("desired trajectory parameters must be finite");
  }
}

DesiredTrajectory DesiredTrajectory::regulation(const UnitQuaternion& target) {
  return {target, Vec3::Zero(), 0.0};
}

Vec3 DesiredTrajectory::omega(double t) const { return amplitude_ * std::sin(frequency_ * t); }

Vec3 DesiredTrajectory::omega_dot(double t) const {
  return amplitude_ * (frequency_ * std::cos(frequency_ * t));
}

UnitQuaternion DesiredTrajectory::attitude(double t) const {
  const double a = amplitude_.norm();
  if (a == 0.0) {
    return initial_;
  }
  // integral of sin(f s) over [0, t], written to stay accurate for small f t
  const double s = std::sin(0.5 * frequency_ * t);
  const double angle =
      frequency_ == 0.0 ? 0.0 : a * 2.0 * s * s / frequency_;
  return initial_ * UnitQuaternion::from_axis_angle(amplitude_ / a, angle);
}

Quaternion kinematics_rate(const Quaternion& q, const Vec3& omega) {
  return 0.5 * quat_mul(q, Quaternion::pure(omega));
}

Vec3 dynamics_rate(const InertiaMatrix& j, const Vec3& omega, const Vec3& u) {
  return j.inverse() * (-omega.cross(j.matrix() * omega) + u);
}

UnitQuaternion error_quaternion(const UnitQuaternion& q_d, const UnitQuaternion& q) {
  return conjugate(q_d) * q;
}

ErrorVelocity error_velocity(const Vec3& omega, const UnitQuaternion& q_e, const Vec3& omega_d) {
  const Vec3 wd = rotation_matrix(q_e) * omega_d;
  return {omega - wd, wd};
}

ErrorState make_error_state(const BodyState& body, const UnitQuaternion& q_d, const Vec3& omega_d) {
  const UnitQuaternion q_e = error_quaternion(q_d, body.attitude);
  const auto [omega_e, wd] = error_velocity(body.omega, q_e, omega_d);
  return {q_e, omega_e, wd};
}

Mat3 xi_matrix(const InertiaMatrix& j, const Vec3& omega_e, const Vec3& omega_d_body) {
  const Mat3& jm = j.matrix();
  const Mat3 wd = skew(omega_d_body);
  return skew(jm * (omega_e + omega_d_body)) - wd * jm - jm * wd;
}

Vec3 feedforward_torque(const InertiaMatrix& j, const UnitQuaternion& q_e, const Vec3& omega_d,
                        const Vec3& omega_d_dot) {
  const Mat3 r = rotation_matrix(q_e);
  const Vec3 wd = r * omega_d;
  return wd.cross(j.matrix() * wd) + j.matrix() * (r * omega_d_dot);
}

ErrorRates error_dynamics_rate(const InertiaMatrix& j, const ErrorState& e,
                               const Vec3& omega_d_dot, const Vec3& u) {
  const Mat3& jm = j.matrix();
  const Vec3& wd = e.omega_d_body;
  const Vec3 rhs = xi_matrix(j, e.omega_e, wd) * e.omega_e - wd.cross(jm * wd) -
                   jm * (rotation_matrix(e.q_e) * omega_d_dot) + u;
  return {kinematics_rate(e.q_e, e.omega_e), j.inverse() * rhs};
}

}  // namespace ftatt

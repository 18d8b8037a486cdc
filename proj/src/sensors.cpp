#include "ftatt/sensors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ftatt {

void NoiseConfig::validate() const {
  if (!(attitude_cone_half_angle_deg >= 0.0) || !(gyro_sigma_deg_s >= 0.0) ||
      !(bias_walk_sigma_deg_s2 >= 0.0)) {
    throw std::invalid_argument("noise parameters must be nonnegative");
  }
}

std::mt19937_64 step_engine(std::uint64_t seed, std::uint64_t step) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
  return std::mt19937_64(seq);
}

namespace {

Vec3 gaussian3(double sigma, std::mt19937_64& rng) {
  if (sigma == 0.0) {
    return Vec3::Zero();
  }
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return {x, y, z};
}

}  // namespace

AttitudeNoise draw_attitude_noise(const NoiseConfig& cfg, std::mt19937_64& rng) {
  const double cone = cfg.attitude_cone_half_angle_deg * kDegToRad;
  if (cone == 0.0) {
    return {};
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double tilt = cone * u(rng);
  const double azimuth = 2.0 * std::numbers::pi * u(rng);
  return {tilt, azimuth};
}

StepNoise NoiseSource::draw(std::uint64_t step) const {
  std::mt19937_64 rng = step_engine(cfg_.seed, step);
  StepNoise s;
  s.attitude = draw_attitude_noise(cfg_, rng);
  s.gyro = gaussian3(cfg_.gyro_sigma_deg_s * kDegToRad, rng);
  s.bias_rate = gaussian3(cfg_.bias_walk_sigma_deg_s2 * kDegToRad, rng);
  return s;
}

UnitQuaternion apply_attitude_noise(const UnitQuaternion& q, const AttitudeNoise& noise) {
  const double n = q.vec().norm();
  if (noise.tilt == 0.0 || n < 1e-12) {
    return q;
  }
  const Vec3 axis = q.vec() / n;
  // Reference direction: the coordinate axis least aligned with the eigenaxis.
  Eigen::Index k = 0;
  axis.cwiseAbs().minCoeff(&k);
  const Vec3 e1 = axis.cross(Vec3::Unit(k)).normalized();
  const Vec3 e2 = axis.cross(e1);
  const Vec3 dir = std::cos(noise.azimuth) * e1 + std::sin(noise.azimuth) * e2;
  const Vec3 tilted = std::cos(noise.tilt) * axis + std::sin(noise.tilt) * dir;
  return normalize(Quaternion(q.scalar(), n * tilted));
}

UnitQuaternion measure_attitude(const UnitQuaternion& q_true, const NoiseConfig& cfg,
                                std::mt19937_64& rng) {
  return apply_attitude_noise(q_true, draw_attitude_noise(cfg, rng));
}

Vec3 measure_gyro(const Vec3& omega_true, const Vec3& bias, const NoiseConfig& cfg,
                  std::mt19937_64& rng) {
  return omega_true + bias + gaussian3(cfg.gyro_sigma_deg_s * kDegToRad, rng);
}

Vec3 bias_step(const Vec3& bias, const NoiseConfig& cfg, double dt, std::mt19937_64& rng) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("bias_step: dt must be positive");
  }
  return bias + gaussian3(cfg.bias_walk_sigma_deg_s2 * kDegToRad, rng) * dt;
}

Vec3 disturbance(double t, const DisturbanceConfig& cfg) {
  if (!cfg.enabled) {
    return Vec3::Zero();
  }
  const double c = std::cos(cfg.frequency_rad_s * t);
  const double s = std::sin(cfg.frequency_rad_s * t);
  return cfg.amplitude_n_m * Vec3(c, c, -s);
}

Vec3 saturate_torque(const Vec3& u, double u_max) {
  if (!(u_max > 0.0)) {
    throw std::invalid_argument("saturate_torque: u_max must be positive");
  }
  return u.cwiseMax(-u_max).cwiseMin(u_max);
}

}  // namespace ftatt

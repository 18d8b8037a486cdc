#pragma once

#include <cstdint>
#include <random>

#include "ftatt/quaternion.hpp"

namespace ftatt {

struct NoiseConfig {
  double attitude_cone_half_angle_deg{0.0};
  double gyro_sigma_deg_s{0.0};
  double bias_walk_sigma_deg_s2{0.0};
  std::uint64_t seed{0};

  void validate() const;
};

struct DisturbanceConfig {
  double amplitude_n_m{0.0};
  double frequency_rad_s{0.0};
  bool enabled{false};
};

/// Eigenaxis perturbation: tilt (rad) away from the true axis, in the
/// direction given by azimuth (rad) around it.
struct AttitudeNoise {
  double tilt{0.0};
  double azimuth{0.0};
};

/// One control step's worth of random draws, held over the integration step.
struct StepNoise {
  AttitudeNoise attitude;
  Vec3 gyro{Vec3::Zero()};       // rad/s
  Vec3 bias_rate{Vec3::Zero()};  // rad/s^2
};

/// Private random stream of one scenario run. Every step gets its own engine
/// seeded from (seed, step), so a draw depends only on those two numbers.
class NoiseSource {
 public:
  explicit NoiseSource(const NoiseConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

  StepNoise draw(std::uint64_t step) const;
  const NoiseConfig& config() const { return cfg_; }

 private:
  NoiseConfig cfg_;
};

std::mt19937_64 step_engine(std::uint64_t seed, std::uint64_t step);

AttitudeNoise draw_attitude_noise(const NoiseConfig& cfg, std::mt19937_64& rng);

/// Rotates the eigenaxis of q by the given perturbation. The rotation angle,
/// hence q0, is unchanged. Identity-like q (|q| < 1e-12) is returned as is.
UnitQuaternion apply_attitude_noise(const UnitQuaternion& q, const AttitudeNoise& noise);

/// Measured attitude with the eigenaxis drawn uniformly in tilt angle within
/// the configured cone.
UnitQuaternion measure_attitude(const UnitQuaternion& q_true, const NoiseConfig& cfg,
                                std::mt19937_64& rng);

/// omega_m = omega + b + v, v ~ N(0, gyro_sigma^2) per axis.
Vec3 measure_gyro(const Vec3& omega_true, const Vec3& bias, const NoiseConfig& cfg,
                  std::mt19937_64& rng);

/// b + w dt, w ~ N(0, bias_walk_sigma^2) per axis.
Vec3 bias_step(const Vec3& bias, const NoiseConfig& cfg, double dt, std::mt19937_64& rng);

/// amplitude * [cos(f t), cos(f t), -sin(f t)], or zero when disabled.
Vec3 disturbance(double t, const DisturbanceConfig& cfg);

/// Componentwise clamp to [-u_max, u_max].
Vec3 saturate_torque(const Vec3& u, double u_max);

inline constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

}  // namespace ftatt

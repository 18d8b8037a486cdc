#include <doctest.h>

#include <cmath>

#include "ftatt/sensors.hpp"

using namespace ftatt;

namespace {

UnitQuaternion random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return normalize(Quaternion(n(rng), n(rng), n(rng), n(rng)));
}

}  // namespace

TEST_CASE("attitude noise stays inside the cone and keeps the rotation angle") {
  NoiseConfig cfg;
  cfg.attitude_cone_half_angle_deg = 0.01;
  std::mt19937_64 rng(11);
  const double cone = 0.01 * kDegToRad;
  double widest = 0.0;
  for (int n = 0; n < 100000; ++n) {
    const UnitQuaternion q = random_unit(rng);
    const UnitQuaternion m = measure_attitude(q, cfg, rng);
    CHECK(m.scalar() == doctest::Approx(q.scalar()).epsilon(1e-14));
    const double c = q.vec().normalized().dot(m.vec().normalized());
    const double angle = std::acos(std::min(1.0, c));
    widest = std::max(widest, angle);
    CHECK(angle <= cone * (1.0 + 1e-6) + 1e-12);
  }
  // Tilts are spread through the cone rather than collapsed to the axis.
  CHECK(widest > 0.9 * cone);
}

TEST_CASE("attitude noise leaves identity-like quaternions alone") {
  const AttitudeNoise noise{0.1, 1.0};
  const UnitQuaternion id = UnitQuaternion::identity();
  CHECK(apply_attitude_noise(id, noise).quat().coeffs() == id.quat().coeffs());
  CHECK(apply_attitude_noise(id.negated(), noise).quat().coeffs() == id.negated().quat().coeffs());
  const UnitQuaternion q(0.0, 0.6, -0.8, 0.0);
  CHECK(apply_attitude_noise(q, AttitudeNoise{}).quat().coeffs() == q.quat().coeffs());
}

TEST_CASE("gyro noise statistics") {
  NoiseConfig cfg;
  cfg.gyro_sigma_deg_s = 0.01;
  std::mt19937_64 rng(12);
  const Vec3 w(0.3, -0.4, 0.0), b(0.01, -0.05, 0.02);
  const int n = 1000000;
  Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Vec3 v = measure_gyro(w, b, cfg, rng) - w - b;
    sum += v;
    sq += v.cwiseProduct(v);
  }
  const double sigma = 0.01 * kDegToRad;
  const Vec3 mean = sum / n;
  const Vec3 sd = (sq / n - mean.cwiseProduct(mean)).cwiseSqrt();
  // Five standard errors of the mean and of the standard deviation.
  CHECK(mean.cwiseAbs().maxCoeff() < 5.0 * sigma / std::sqrt(double(n)));
  CHECK((sd.array() / sigma - 1.0).abs().maxCoeff() < 5.0 / std::sqrt(2.0 * n));
}

TEST_CASE("bias random walk") {
  NoiseConfig cfg;
  cfg.bias_walk_sigma_deg_s2 = 0.01;
  std::mt19937_64 rng(13);
  const double dt = 0.01;
  const int runs = 2000, steps = 100;
  double sq = 0.0;
  for (int r = 0; r < runs; ++r) {
    Vec3 b = Vec3::Zero();
    for (int k = 0; k < steps; ++k) b = bias_step(b, cfg, dt, rng);
    sq += b.squaredNorm();
  }
  // Per axis variance sigma^2 dt^2 per step.
  const double sigma = 0.01 * kDegToRad;
  const double expected = 3.0 * steps * sigma * sigma * dt * dt;
  CHECK(sq / runs == doctest::Approx(expected).epsilon(0.1));
  CHECK_THROWS_AS(bias_step(Vec3::Zero(), cfg, 0.0, rng), std::invalid_argument);
  NoiseConfig quiet;
  CHECK(bias_step(Vec3(1, 2, 3), quiet, dt, rng) == Vec3(1, 2, 3));
}

TEST_CASE("disturbance torque") {
  DisturbanceConfig d{0.02, 0.1, true};
  CHECK((disturbance(0.0, d) - Vec3(0.02, 0.02, 0.0)).norm() < 1e-18);
  const double t = 5.0 * 3.14159265358979323846;
  CHECK((disturbance(t, d) - Vec3(0.0, 0.0, -0.02)).norm() < 1e-15);
  for (double s = 0.0; s < 100.0; s += 0.37) {
    CHECK(disturbance(s, d).cwiseAbs().maxCoeff() <= 0.02);
  }
  d.enabled = false;
  CHECK(disturbance(3.0, d) == Vec3::Zero());
}

TEST_CASE("actuator saturation") {
  CHECK(saturate_torque(Vec3(7, -6, 1), 5.0) == Vec3(5, -5, 1));
  CHECK(saturate_torque(Vec3(0.1, 0.2, -0.3), 5.0) == Vec3(0.1, 0.2, -0.3));
  CHECK_THROWS_AS(saturate_torque(Vec3::Zero(), 0.0), std::invalid_argument);
}

TEST_CASE("step draws depend only on seed and step") {
  NoiseConfig cfg{0.01, 0.01, 0.01, 42};
  const NoiseSource a(cfg), b(cfg);
  for (std::uint64_t k : {0ull, 1ull, 17ull, 123456789ull}) {
    const StepNoise x = a.draw(k), y = b.draw(k);
    CHECK(x.attitude.tilt == y.attitude.tilt);
    CHECK(x.attitude.azimuth == y.attitude.azimuth);
    CHECK(x.gyro == y.gyro);
    CHECK(x.bias_rate == y.bias_rate);
  }
  // Order of requests does not matter.
  const StepNoise late = a.draw(500);
  a.draw(3);
  CHECK(a.draw(500).gyro == late.gyro);
  CHECK(a.draw(1).gyro != a.draw(2).gyro);
  cfg.seed = 43;
  CHECK(NoiseSource(cfg).draw(1).gyro != a.draw(1).gyro);
}

TEST_CASE("noise configuration validation") {
  NoiseConfig cfg;
  cfg.gyro_sigma_deg_s = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.gyro_sigma_deg_s = std::nan("");
  CHECK_THROWS_AS(NoiseSource{cfg}, std::invalid_argument);
  NoiseConfig quiet;
  const StepNoise s = NoiseSource(quiet).draw(5);
  CHECK(s.attitude.tilt == 0.0);
  CHECK(s.gyro == Vec3::Zero());
}

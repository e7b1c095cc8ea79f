#include "dtmfdrive/vehicle.hpp"

#include <cmath>
#include <numbers>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::vehicle {

void VehicleParams::validate() const {
  if (!(wheel_speed_mps > 0.0) || !std::isfinite(wheel_speed_mps)) {
    throw ConfigError("wheel speed must be positive");
  }
  if (!(track_width_m > 0.0) || !std::isfinite(track_width_m)) {
    throw ConfigError("track width must be positive");
  }
  if (!(dt_s > 0.0 && dt_s <= 0.01)) throw ConfigError("integration step must be in (0, 0.01] s");
}

double normalize_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double t = std::remainder(theta, 2.0 * pi);  // [-pi, pi]
  if (t <= -pi) t += 2.0 * pi;
  return t;
}

double side_velocity(drivetrain::MotorDirection dir, const VehicleParams& params) {
  switch (dir) {
    case drivetrain::MotorDirection::forward:
      return params.wheel_speed_mps;
    case drivetrain::MotorDirection::backward:
      return -params.wheel_speed_mps;
    case drivetrain::MotorDirection::stop:
      break;
  }
  return 0.0;
}

namespace {

VehiclePose euler(const VehiclePose& p, double v_left, double v_right, double track, double dt) {
  const double v = 0.5 * (v_left + v_right);
  const double w = (v_right - v_left) / track;
  return {p.x + v * std::cos(p.theta) * dt, p.y + v * std::sin(p.theta) * dt,
          normalize_angle(p.theta + w * dt)};
}

}  // namespace

VehiclePose step_pose(const VehiclePose& pose, drivetrain::WheelDrive drive,
                      const VehicleParams& params) {
  const double vl = side_velocity(drive.left, params);
  const double vr = side_velocity(drive.right, params);
  if (vl == 0.0 && vr == 0.0) return pose;
  return euler(pose, vl, vr, params.track_width_m, params.dt_s);
}

VehiclePose advance(const VehiclePose& pose, drivetrain::WheelDrive drive, double duration_s,
                    const VehicleParams& params) {
  const double vl = side_velocity(drive.left, params);
  const double vr = side_velocity(drive.right, params);
  if ((vl == 0.0 && vr == 0.0) || !(duration_s > 0.0)) return pose;
  VehiclePose p = pose;
  const auto full = static_cast<long long>(std::floor(duration_s / params.dt_s + 1e-9));
  for (long long i = 0; i < full; ++i) p = euler(p, vl, vr, params.track_width_m, params.dt_s);
  const double rest = duration_s - static_cast<double>(full) * params.dt_s;
  if (rest > 1e-12) p = euler(p, vl, vr, params.track_width_m, rest);
  return p;
}

}  // namespace dtmfdrive::vehicle

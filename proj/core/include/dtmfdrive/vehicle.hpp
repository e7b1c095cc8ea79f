#pragma once

#include "dtmfdrive/drivetrain.hpp"

namespace dtmfdrive::vehicle {

struct VehiclePose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // CCW from +x, in (-pi, pi]

  friend bool operator==(const VehiclePose&, const VehiclePose&) = default;
};

struct VehicleParams {
  double wheel_speed_mps = 0.2;
  double track_width_m = 0.2;
  double dt_s = 0.001;

  void validate() const;
};

double normalize_angle(double theta);

double side_velocity(drivetrain::MotorDirection dir, const VehicleParams& params);

// One explicit Euler step of length params.dt_s.
VehiclePose step_pose(const VehiclePose& pose, drivetrain::WheelDrive drive,
                      const VehicleParams& params);

// Integrates over duration_s with dt_s steps, the last one shortened to
// land exactly on duration_s.
VehiclePose advance(const VehiclePose& pose, drivetrain::WheelDrive drive, double duration_s,
                    const VehicleParams& params);

}  // namespace dtmfdrive::vehicle

#include "dtmfdrive/drivetrain.hpp"

#include <cstdio>

namespace dtmfdrive::drivetrain {
namespace {

MotorDirection side(bool a, bool b, bool enabled, const char* name,
                    std::vector<std::string>* warnings) {
  if (a && b && warnings) {
    warnings->push_back(std::string(name) + " motor inputs both high; braking");
  }
  if (!enabled) return MotorDirection::stop;
  if (a && !b) return MotorDirection::forward;
  if (!a && b) return MotorDirection::backward;
  return MotorDirection::stop;
}

}  // namespace

std::string PortNibble::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", bits_);
  return buf;
}

std::string_view short_name(MotorDirection dir) {
  switch (dir) {
    case MotorDirection::forward:
      return "fwd";
    case MotorDirection::backward:
      return "bwd";
    case MotorDirection::stop:
      break;
  }
  return "stop";
}

std::string motion_label(WheelDrive d) {
  using enum MotorDirection;
  if (d.left == forward && d.right == forward) return "Forward";
  if (d.left == backward && d.right == backward) return "Backward";
  if (d.left == stop && d.right == forward) return "Left turn";
  if (d.left == forward && d.right == stop) return "Right turn";
  if (d.left == stop && d.right == stop) return "Stop";
  return std::string("Left ") + std::string(short_name(d.left)) + ", right " +
         std::string(short_name(d.right));
}

std::optional<PortNibble> lookup(steering::DecodedCode code) {
  switch (code.bits()) {
    case 0x2:
      return kForward;
    case 0x8:
      return kBackward;
    case 0x4:
      return kLeftTurn;
    case 0x6:
      return kRightTurn;
    case 0x5:
      return kStop;
    default:
      return std::nullopt;
  }
}

PortNibble control_decision(steering::DecodedCode code, PortNibble current, UnmappedPolicy policy) {
  if (auto mapped = lookup(code)) return *mapped;
  return policy == UnmappedPolicy::hold ? current : kStop;
}

WheelDrive driver_outputs(PortNibble nibble, DriverEnables enables,
                          std::vector<std::string>* warnings) {
  return {side(nibble.in(2), nibble.in(1), enables.en1, "left", warnings),
          side(nibble.in(4), nibble.in(3), enables.en2, "right", warnings)};
}

}  // namespace dtmfdrive::drivetrain

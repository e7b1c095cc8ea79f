#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dtmfdrive/steering.hpp"

namespace dtmfdrive::drivetrain {

// Output port word; bits 0..3 drive L293D inputs IN1..IN4.
class PortNibble {
 public:
  constexpr PortNibble() = default;
  constexpr explicit PortNibble(std::uint8_t bits) : bits_(bits & 0x0F) {}

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool in(int pin) const { return ((bits_ >> (pin - 1)) & 1U) != 0; }
  std::string hex() const;  // "0x0A"

  friend constexpr bool operator==(PortNibble, PortNibble) = default;

 private:
  std::uint8_t bits_ = 0;
};

inline constexpr PortNibble kForward{0x0A};
inline constexpr PortNibble kBackward{0x05};
inline constexpr PortNibble kLeftTurn{0x08};
inline constexpr PortNibble kRightTurn{0x02};
inline constexpr PortNibble kStop{0x00};

enum class MotorDirection { forward, backward, stop };

std::string_view short_name(MotorDirection dir);  // fwd / bwd / stop

struct WheelDrive {
  MotorDirection left = MotorDirection::stop;
  MotorDirection right = MotorDirection::stop;

  friend constexpr bool operator==(WheelDrive, WheelDrive) = default;
};

// Forward, Backward, Left turn, Right turn, Stop; other combinations get a
// descriptive label.
std::string motion_label(WheelDrive drive);

struct DriverEnables {
  bool en1 = true;  // drivers 1-2, left side
  bool en2 = true;  // drivers 3-4, right side
};

// What the firmware does with a code it has no case for.
enum class UnmappedPolicy { hold, stop };

// The firmware's switch on the decoder word: 2 -> 0x0A, 8 -> 0x05,
// 4 -> 0x08, 6 -> 0x02, 5 -> 0x00.
std::optional<PortNibble> lookup(steering::DecodedCode code);

PortNibble control_decision(steering::DecodedCode code, PortNibble current,
                            UnmappedPolicy policy = UnmappedPolicy::hold);

// Left motor reads (IN2, IN1), right motor (IN4, IN3): (1,0) forward,
// (0,1) backward, (0,0) stop. (1,1) brakes to stop and appends a warning
// when `warnings` is given. A disabled side is stopped.
WheelDrive driver_outputs(PortNibble nibble, DriverEnables enables = {},
                          std::vector<std::string>* warnings = nullptr);

}  // namespace dtmfdrive::drivetrain

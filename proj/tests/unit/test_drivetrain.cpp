#include <doctest.h>

#include "dtmfdrive/drivetrain.hpp"
#include "support/oracles.hpp"

using namespace dtmfdrive;
using drivetrain::MotorDirection;
using drivetrain::PortNibble;
using steering::DecodedCode;

namespace {

// L293D half-bridge pair: forward when the "a" input alone is high,
// backward when "b" alone is high, otherwise stopped.
MotorDirection l293d(int a, int b, bool enabled) {
  if (!enabled) return MotorDirection::stop;
  if (a == 1 && b == 0) return MotorDirection::forward;
  if (a == 0 && b == 1) return MotorDirection::backward;
  return MotorDirection::stop;
}

int bit(int v, int i) { return (v >> i) & 1; }

}  // namespace

TEST_SUITE("drivetrain") {
  TEST_CASE("driver outputs agree with the bridge truth table") {
    for (int v = 0; v < 16; ++v) {
      for (int en = 0; en < 4; ++en) {
        const drivetrain::DriverEnables enables{(en & 1) != 0, (en & 2) != 0};
        std::vector<std::string> warnings;
        const auto d = drivetrain::driver_outputs(PortNibble(static_cast<std::uint8_t>(v)), enables, &warnings);
        CHECK(d.left == l293d(bit(v, 1), bit(v, 0), enables.en1));
        CHECK(d.right == l293d(bit(v, 3), bit(v, 2), enables.en2));
        const std::size_t braking = (bit(v, 0) && bit(v, 1) ? 1u : 0u) + (bit(v, 2) && bit(v, 3) ? 1u : 0u);
        CHECK(warnings.size() == braking);
      }
    }
    CHECK_NOTHROW(drivetrain::driver_outputs(PortNibble(0x0F)));
  }

  TEST_CASE("the five firmware cases reproduce the hex and decision table") {
    struct Row {
      char key;
      std::uint8_t port;
      const char* decision;
    };
    const Row rows[] = {{'2', 0x0A, "Forward"},
                        {'4', 0x08, "Left turn"},
                        {'6', 0x02, "Right turn"},
                        {'8', 0x05, "Backward"},
                        {'5', 0x00, "Stop"}};
    for (const auto& row : rows) {
      const auto code = steering::code_of(signal::DtmfKey::parse(row.key));
      for (int cur = 0; cur < 16; ++cur) {
        const auto port = drivetrain::control_decision(code, PortNibble(static_cast<std::uint8_t>(cur)));
        CHECK(port.bits() == row.port);
      }
      const auto port = drivetrain::control_decision(code, drivetrain::kStop);
      CHECK(drivetrain::motion_label(drivetrain::driver_outputs(port)) == row.decision);
    }
    CHECK(drivetrain::kForward.hex() == "0x0A");
    CHECK(drivetrain::motion_label({MotorDirection::backward, MotorDirection::forward}) == "Left bwd, right fwd");
  }

  TEST_CASE("unmapped codes hold or stop by policy") {
    for (int c = 0; c < 16; ++c) {
      const DecodedCode code(static_cast<std::uint8_t>(c));
      const bool mapped = c == 2 || c == 4 || c == 5 || c == 6 || c == 8;
      CHECK(drivetrain::lookup(code).has_value() == mapped);
      if (mapped) continue;
      CHECK(drivetrain::control_decision(code, drivetrain::kForward) == drivetrain::kForward);
      CHECK(drivetrain::control_decision(code, drivetrain::kForward, drivetrain::UnmappedPolicy::stop) ==
            drivetrain::kStop);
    }
  }

  TEST_CASE("deleting unmapped codes leaves the final drive unchanged") {
    oracle::Gen gen(13);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<DecodedCode> seq;
      for (int i = 0; i < gen.integer(1, 20); ++i) seq.emplace_back(static_cast<std::uint8_t>(gen.integer(0, 15)));
      PortNibble all = drivetrain::kStop;
      PortNibble mapped_only = drivetrain::kStop;
      for (auto c : seq) {
        all = drivetrain::control_decision(c, all);
        if (drivetrain::lookup(c)) mapped_only = drivetrain::control_decision(c, mapped_only);
      }
      CHECK(drivetrain::driver_outputs(all) == drivetrain::driver_outputs(mapped_only));
    }
  }

  TEST_CASE("disabled drivers stop") {
    const auto d = drivetrain::driver_outputs(drivetrain::kForward, {false, false});
    CHECK(d.left == MotorDirection::stop);
    CHECK(d.right == MotorDirection::stop);
    const auto half = drivetrain::driver_outputs(drivetrain::kForward, {true, false});
    CHECK(half.left == MotorDirection::forward);
    CHECK(half.right == MotorDirection::stop);
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtmfdrive/decoder.hpp"
#include "dtmfdrive/signal.hpp"

namespace dtmfdrive::steering {

// 4-bit output word Q4..Q1 of the decoder latch.
class DecodedCode {
 public:
  constexpr DecodedCode() = default;
  constexpr explicit DecodedCode(std::uint8_t bits) : bits_(bits & 0x0F) {}

  constexpr std::uint8_t bits() const { return bits_; }
  std::string binary() const;  // "0010"
  std::string hex() const;     // "0x02"

  friend constexpr bool operator==(DecodedCode, DecodedCode) = default;

 private:
  std::uint8_t bits_ = 0;
};

// Keys 1-9 map to their value, 0 to 1010, * to 1011, # to 1100, A-C to
// 1101-1111 and D to 0000.
DecodedCode code_of(signal::DtmfKey key);
signal::DtmfKey key_of(DecodedCode code);

struct SteeringConfig {
  double t_gtp_ms = 27.0;  // tone-present guard
  double t_gta_ms = 27.0;  // tone-absent guard

  void validate() const;
};

// v_c is the normalised guard capacitor voltage. It ramps up at 1/t_gtp
// while a stable candidate is present and down at 1/t_gta otherwise; a
// change of candidate restarts it from zero.
struct SteeringState {
  double v_c = 0.0;
  std::optional<DecodedCode> latched;  // output register, holds after release
  bool std_active = false;
  std::optional<signal::DtmfKey> pending;
};

struct SteeringEvent {
  enum class Kind { latched, released };
  Kind kind;
  DecodedCode code;
  double t_ms;
};

std::pair<SteeringState, std::optional<SteeringEvent>> step(const SteeringState& state,
                                                            const decoder::ToneFrame& frame,
                                                            double dt_ms,
                                                            const SteeringConfig& cfg);

// Folds step() over frames, taking dt from consecutive frame times (the
// first frame uses the following spacing, or fallback_dt_ms for a single
// frame). Throws ConfigError when frames are not strictly time-ordered.
std::vector<SteeringEvent> run(std::span<const decoder::ToneFrame> frames, const SteeringConfig& cfg,
                               double fallback_dt_ms = 6.375);

}  // namespace dtmfdrive::steering

#include "dtmfdrive/steering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::steering {
namespace {

// Indexed by DtmfKey::index(), i.e. keypad order 1 2 3 A 4 5 6 B 7 8 9 C * 0 # D.
constexpr std::array<std::uint8_t, 16> kCodes{0x1, 0x2, 0x3, 0xD, 0x4, 0x5, 0x6, 0xE,
                                              0x7, 0x8, 0x9, 0xF, 0xB, 0xA, 0xC, 0x0};

// Guards against v_c stopping a rounding error short of a threshold.
constexpr double kEps = 1e-9;

}  // namespace

std::string DecodedCode::binary() const {
  std::string out(4, '0');
  for (int i = 0; i < 4; ++i) {
    if ((bits_ >> (3 - i)) & 1U) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

std::string DecodedCode::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", bits_);
  return buf;
}

DecodedCode code_of(signal::DtmfKey key) {
  return DecodedCode(kCodes[static_cast<std::size_t>(key.index())]);
}

signal::DtmfKey key_of(DecodedCode code) {
  const auto it = std::find(kCodes.begin(), kCodes.end(), code.bits());
  const auto idx = static_cast<int>(it - kCodes.begin());
  return signal::DtmfKey::at(idx / 4, idx % 4);
}

void SteeringConfig::validate() const {
  if (!(t_gtp_ms > 0.0) || !(t_gta_ms > 0.0) || !std::isfinite(t_gtp_ms) || !std::isfinite(t_gta_ms)) {
    throw ConfigError("guard times must be positive");
  }
}

std::pair<SteeringState, std::optional<SteeringEvent>> step(const SteeringState& state,
                                                            const decoder::ToneFrame& frame,
                                                            double dt_ms,
                                                            const SteeringConfig& cfg) {
  if (!(dt_ms > 0.0) || dt_ms > std::min(cfg.t_gtp_ms, cfg.t_gta_ms) / 4.0 + kEps) {
    throw ConfigError("steering step must satisfy 0 < dt <= min(t_gtp, t_gta) / 4");
  }

  SteeringState next = state;
  std::optional<SteeringEvent> event;
  const bool present = frame.est_active && frame.candidate.has_value();

  if (present && next.pending != frame.candidate) {
    // New tone pair: the guard restarts, and a code that was being
    // asserted is no longer valid.
    next.pending = frame.candidate;
    next.v_c = 0.0;
    if (next.std_active) {
      next.std_active = false;
      event = SteeringEvent{SteeringEvent::Kind::released, *next.latched, frame.t_ms};
    }
  }

  if (present) {
    next.v_c = std::min(1.0, next.v_c + dt_ms / cfg.t_gtp_ms);
    if (!next.std_active && next.v_c >= 1.0 - kEps && !event) {
      next.v_c = 1.0;
      next.latched = code_of(*next.pending);
      next.std_active = true;
      event = SteeringEvent{SteeringEvent::Kind::latched, *next.latched, frame.t_ms};
    }
  } else {
    next.v_c = std::max(0.0, next.v_c - dt_ms / cfg.t_gta_ms);
    if (next.v_c <= kEps) {
      next.v_c = 0.0;
      next.pending.reset();
      if (next.std_active) {
        next.std_active = false;
        event = SteeringEvent{SteeringEvent::Kind::released, *next.latched, frame.t_ms};
      }
    }
  }
  return {next, event};
}

std::vector<SteeringEvent> run(std::span<const decoder::ToneFrame> frames, const SteeringConfig& cfg,
                               double fallback_dt_ms) {
  cfg.validate();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!(frames[i].t_ms > frames[i - 1].t_ms)) throw ConfigError("frames are not time-ordered");
  }
  std::vector<SteeringEvent> events;
  SteeringState state;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    double dt = fallback_dt_ms;
    if (i > 0) {
      dt = frames[i].t_ms - frames[i - 1].t_ms;
    } else if (frames.size() > 1) {
      dt = frames[1].t_ms - frames[0].t_ms;
    }
    auto [next, event] = step(state, frames[i], dt, cfg);
    state = next;
    if (event) events.push_back(*event);
  }
  return events;
}

}  // namespace dtmfdrive::steering

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtmfdrive/channel.hpp"
#include "dtmfdrive/decoder.hpp"
#include "dtmfdrive/drivetrain.hpp"
#include "dtmfdrive/signal.hpp"
#include "dtmfdrive/steering.hpp"
#include "dtmfdrive/vehicle.hpp"

namespace dtmfdrive::session {

enum class CallState { idle, ringing, answered };

std::string_view call_state_name(CallState state);

// Everything about a run except the key presses.
struct SimulationConfig {
  int rate_hz = signal::kDefaultRateHz;
  signal::ToneLevels tone;
  channel::ChannelConfig channel;
  decoder::Profile profile = decoder::Profile::standard;
  steering::SteeringConfig steering;
  drivetrain::DriverEnables enables;
  drivetrain::UnmappedPolicy unmapped = drivetrain::UnmappedPolicy::hold;
  vehicle::VehicleParams vehicle;
  int ring_ticks = 1;
  std::uint64_t seed = 1;

  decoder::DetectorConfig detector() const;
  double tick_ms() const;
  void validate() const;
};

struct Scenario {
  SimulationConfig config;
  signal::KeyScript script;
  double duration_ms = 1000.0;

  void validate() const;
};

struct TraceRecord {
  double t_ms = 0.0;
  CallState call = CallState::idle;
  std::optional<signal::DtmfKey> key_down;
  bool est_active = false;
  std::optional<steering::DecodedCode> latched;
  drivetrain::PortNibble port;
  drivetrain::WheelDrive wheels;
  vehicle::VehiclePose pose;  // at the start of the tick
};

// Live snapshot; the trace row plus decoder telemetry.
struct StateFrame {
  TraceRecord record;
  decoder::BandEnergies energies;
};

// Single-owner tick loop: one tick is one decoder hop. Per tick the key
// state is rendered through oscillator, channel, detector, steering latch,
// firmware decision and H-bridge; the pose recorded for the tick is the
// pose before the tick's motion is integrated.
class Simulator {
 public:
  explicit Simulator(SimulationConfig cfg);

  StateFrame tick(std::optional<signal::DtmfKey> key_down);

  const SimulationConfig& config() const { return cfg_; }
  std::int64_t ticks() const { return tick_; }
  const vehicle::VehiclePose& pose() const { return pose_; }
  CallState call_state() const;
  const std::vector<steering::SteeringEvent>& events() const { return events_; }

 private:
  SimulationConfig cfg_;
  decoder::DetectorConfig det_cfg_;
  decoder::StreamDetector detector_;
  channel::ChannelStream channel_;
  std::optional<signal::ToneOscillator> osc_;
  steering::SteeringState steer_;
  drivetrain::PortNibble port_;
  vehicle::VehiclePose pose_;
  decoder::ToneFrame last_frame_;
  std::vector<steering::SteeringEvent> events_;
  std::vector<double> chunk_;
  std::int64_t tick_ = 0;
};

struct ScenarioResult {
  std::vector<TraceRecord> trace;
  vehicle::VehiclePose final_pose;
  std::vector<steering::SteeringEvent> events;
};

// Key presses are quantised to the nearest tick boundary. Throws
// ConfigError before any tick runs when the scenario is invalid.
ScenarioResult run_scenario(const Scenario& scenario);

// Key held during tick `tick` according to the script, quantised as in
// run_scenario.
std::optional<signal::DtmfKey> key_at_tick(const signal::KeyScript& script, std::int64_t tick,
                                           double tick_ms);

inline constexpr std::string_view kTraceHeader =
    "t_ms,call,key,est,latched_hex,port_hex,left,right,x,y,theta";

std::string trace_row(const TraceRecord& record);
std::string trace_csv(const std::vector<TraceRecord>& trace);

// Scenario documents; see docs/scenario.md.
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& doc);
void apply_config_overrides(SimulationConfig& cfg, const nlohmann::json& doc);
nlohmann::json config_to_json(const SimulationConfig& cfg);
Scenario load_scenario(const std::string& path);

// Wire form of a StateFrame ({"type":"state", ...}).
nlohmann::json state_message(const StateFrame& frame);

// Key-state changes recorded by the live service, one per tick at most.
struct KeyChange {
  std::int64_t tick;
  std::optional<signal::DtmfKey> key;  // empty = released
};

// Rebuilds the scenario that replays a live session of `ticks` ticks.
Scenario replay_scenario(const SimulationConfig& cfg, const std::vector<KeyChange>& changes,
                         std::int64_t ticks);

}  // namespace dtmfdrive::session

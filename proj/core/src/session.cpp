#include "dtmfdrive/session.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::session {

using nlohmann::json;

std::string_view call_state_name(CallState state) {
  switch (state) {
    case CallState::idle:
      return "idle";
    case CallState::ringing:
      return "ringing";
    case CallState::answered:
      break;
  }
  return "answered";
}

decoder::DetectorConfig SimulationConfig::detector() const {
  return decoder::DetectorConfig::for_profile(profile, rate_hz);
}

double SimulationConfig::tick_ms() const { return detector().hop_ms(); }

void SimulationConfig::validate() const {
  if (rate_hz < signal::kMinRateHz) throw ConfigError("sample rate below 4000 Hz");
  tone.validate();
  channel.validate();
  detector().validate();
  steering.validate();
  vehicle.validate();
  if (ring_ticks < 0) throw ConfigError("ring_ticks must be non-negative");
  const double dt = tick_ms();
  if (dt > std::min(steering.t_gtp_ms, steering.t_gta_ms) / 4.0 + 1e-9) {
    throw ConfigError("guard times must be at least four ticks (" + std::to_string(4 * dt) + " ms)");
  }
}

void Scenario::validate() const {
  config.validate();
  script.validate();
  if (!(duration_ms > 0.0) || !std::isfinite(duration_ms)) throw ConfigError("duration must be positive");
  if (script.end_ms() > duration_ms) throw ConfigError("duration does not cover the key script");
}

Simulator::Simulator(SimulationConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      det_cfg_(cfg_.detector()),
      detector_(det_cfg_),
      channel_(
          [&] {
            auto ch = cfg_.channel;
            ch.freq_scale = 1.0;  // realised at the oscillator
            return ch;
          }(),
          cfg_.rate_hz,
          0.5 * (std::pow(cfg_.tone.low_amplitude(), 2) + std::pow(cfg_.tone.high_amplitude(), 2)),
          cfg_.seed),
      chunk_(static_cast<std::size_t>(det_cfg_.hop_samples)) {}

CallState Simulator::call_state() const {
  return tick_ < cfg_.ring_ticks ? CallState::ringing : CallState::answered;
}

StateFrame Simulator::tick(std::optional<signal::DtmfKey> key_down) {
  const CallState call = call_state();
  const auto sounding = call == CallState::answered ? key_down : std::nullopt;

  if (!sounding) {
    osc_.reset();
  } else if (!osc_ || osc_->key() != *sounding) {
    osc_.emplace(*sounding, cfg_.rate_hz, cfg_.tone, cfg_.channel.freq_scale);
  }
  if (osc_) {
    osc_->generate(chunk_);
  } else {
    std::fill(chunk_.begin(), chunk_.end(), 0.0);
  }
  channel_.process(chunk_);

  bool est = false;
  for (const auto& frame : detector_.push(chunk_)) {
    auto [next, event] = steering::step(steer_, frame, det_cfg_.hop_ms(), cfg_.steering);
    steer_ = next;
    if (event) events_.push_back(*event);
    last_frame_ = frame;
    est = frame.est_active;
  }

  if (steer_.latched) port_ = drivetrain::control_decision(*steer_.latched, port_, cfg_.unmapped);
  const auto wheels = drivetrain::driver_outputs(port_, cfg_.enables);

  StateFrame out;
  out.record.t_ms = static_cast<double>(tick_) * det_cfg_.hop_ms();
  out.record.call = call;
  out.record.key_down = key_down;
  out.record.est_active = est;
  out.record.latched = steer_.latched;
  out.record.port = port_;
  out.record.wheels = wheels;
  out.record.pose = pose_;
  out.energies = last_frame_.energies;

  pose_ = vehicle::advance(pose_, wheels, det_cfg_.hop_ms() / 1000.0, cfg_.vehicle);
  ++tick_;
  return out;
}

namespace {

struct TickSpan {
  std::int64_t begin;
  std::int64_t end;
  signal::DtmfKey key;
};

std::vector<TickSpan> tick_spans(const signal::KeyScript& script, double tick_ms) {
  std::vector<TickSpan> spans;
  for (const auto& ev : script.events) {
    spans.push_back({std::llround(ev.press_at_ms / tick_ms),
                     std::llround((ev.press_at_ms + ev.hold_ms) / tick_ms), ev.key});
  }
  return spans;
}

}  // namespace

std::optional<signal::DtmfKey> key_at_tick(const signal::KeyScript& script, std::int64_t tick,
                                           double tick_ms) {
  for (const auto& span : tick_spans(script, tick_ms)) {
    if (tick >= span.begin && tick < span.end) return span.key;
  }
  return std::nullopt;
}

ScenarioResult run_scenario(const Scenario& scenario) {
  scenario.validate();
  Simulator sim(scenario.config);
  const double tick_ms = scenario.config.tick_ms();
  const auto ticks = static_cast<std::int64_t>(std::ceil(scenario.duration_ms / tick_ms - 1e-9));
  const auto spans = tick_spans(scenario.script, tick_ms);

  ScenarioResult result;
  result.trace.reserve(static_cast<std::size_t>(ticks));
  std::size_t next = 0;
  for (std::int64_t t = 0; t < ticks; ++t) {
    while (next < spans.size() && spans[next].end <= t) ++next;
    std::optional<signal::DtmfKey> key;
    if (next < spans.size() && spans[next].begin <= t) key = spans[next].key;
    result.trace.push_back(sim.tick(key).record);
  }
  result.final_pose = sim.pose();
  result.events = sim.events();
  return result;
}

std::string trace_row(const TraceRecord& r) {
  char latched[8] = "";
  if (r.latched) std::snprintf(latched, sizeof latched, "0x%02x", r.latched->bits());
  char port[8];
  std::snprintf(port, sizeof port, "0x%02x", r.port.bits());
  const std::string key = r.key_down ? std::string(1, r.key_down->symbol()) : std::string();
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.3f,%s,%s,%d,%s,%s,%s,%s,%.6f,%.6f,%.6f", r.t_ms,
                std::string(call_state_name(r.call)).c_str(), key.c_str(), r.est_active ? 1 : 0,
                latched, port, std::string(drivetrain::short_name(r.wheels.left)).c_str(),
                std::string(drivetrain::short_name(r.wheels.right)).c_str(), r.pose.x, r.pose.y,
                r.pose.theta);
  return buf;
}

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& r : trace) {
    out += trace_row(r);
    out += '\n';
  }
  return out;
}

namespace {

template <typename T>
void read_field(const json& obj, const char* name, T& out) {
  if (auto it = obj.find(name); it != obj.end()) out = it->get<T>();
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ConfigError(std::string("unknown field '") + item.key() + "' in " + where);
  }
}

signal::DtmfKey key_from_json(const json& v) {
  const auto s = v.get<std::string>();
  if (s.size() != 1) throw ConfigError("key must be a single keypad symbol");
  return signal::DtmfKey::parse(s[0]);
}

void apply_overrides(SimulationConfig& cfg, const json& doc, bool allow_scenario_fields) {
  if (allow_scenario_fields) {
    check_keys(doc, {"rate_hz", "tone", "channel", "detector", "steering", "drivetrain", "vehicle",
                     "ring_ticks", "seed", "duration_ms", "script"},
               "scenario");
  } else {
    check_keys(doc, {"type", "rate_hz", "tone", "channel", "detector", "steering", "drivetrain",
                     "vehicle", "ring_ticks", "seed"},
               "config");
  }
  read_field(doc, "rate_hz", cfg.rate_hz);
  read_field(doc, "ring_ticks", cfg.ring_ticks);
  read_field(doc, "seed", cfg.seed);
  if (auto it = doc.find("tone"); it != doc.end()) {
    check_keys(*it, {"amplitude", "twist_db"}, "tone");
    read_field(*it, "amplitude", cfg.tone.amplitude);
    read_field(*it, "twist_db", cfg.tone.twist_db);
  }
  if (auto it = doc.find("channel"); it != doc.end()) {
    check_keys(*it, {"gain_db", "snr_db", "freq_scale", "interferer"}, "channel");
    read_field(*it, "gain_db", cfg.channel.gain_db);
    read_field(*it, "freq_scale", cfg.channel.freq_scale);
    if (auto s = it->find("snr_db"); s != it->end()) {
      cfg.channel.snr_db = s->is_null() ? std::nullopt : std::optional<double>(s->get<double>());
    }
    if (auto i = it->find("interferer"); i != it->end()) {
      if (i->is_null()) {
        cfg.channel.interferer.reset();
      } else {
        check_keys(*i, {"freq_hz", "level_db"}, "interferer");
        channel::Interferer intf;
        read_field(*i, "freq_hz", intf.freq_hz);
        read_field(*i, "level_db", intf.level_db);
        cfg.channel.interferer = intf;
      }
    }
  }
  if (auto it = doc.find("detector"); it != doc.end()) {
    check_keys(*it, {"profile"}, "detector");
    if (auto p = it->find("profile"); p != it->end()) {
      const auto name = p->get<std::string>();
      const auto profile = decoder::parse_profile(name);
      if (!profile) throw ConfigError("unknown detector profile '" + name + "'");
      cfg.profile = *profile;
    }
  }
  if (auto it = doc.find("steering"); it != doc.end()) {
    check_keys(*it, {"t_gtp_ms", "t_gta_ms"}, "steering");
    read_field(*it, "t_gtp_ms", cfg.steering.t_gtp_ms);
    read_field(*it, "t_gta_ms", cfg.steering.t_gta_ms);
  }
  if (auto it = doc.find("drivetrain"); it != doc.end()) {
    check_keys(*it, {"en1", "en2", "unmapped"}, "drivetrain");
    read_field(*it, "en1", cfg.enables.en1);
    read_field(*it, "en2", cfg.enables.en2);
    if (auto u = it->find("unmapped"); u != it->end()) {
      const auto s = u->get<std::string>();
      if (s == "hold") {
        cfg.unmapped = drivetrain::UnmappedPolicy::hold;
      } else if (s == "stop") {
        cfg.unmapped = drivetrain::UnmappedPolicy::stop;
      } else {
        throw ConfigError("drivetrain.unmapped must be 'hold' or 'stop'");
      }
    }
  }
  if (auto it = doc.find("vehicle"); it != doc.end()) {
    check_keys(*it, {"wheel_speed_mps", "track_width_m", "dt_s"}, "vehicle");
    read_field(*it, "wheel_speed_mps", cfg.vehicle.wheel_speed_mps);
    read_field(*it, "track_width_m", cfg.vehicle.track_width_m);
    read_field(*it, "dt_s", cfg.vehicle.dt_s);
  }
}

template <typename F>
auto json_guard(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad scenario field: ") + e.what());
  }
}

}  // namespace

void apply_config_overrides(SimulationConfig& cfg, const json& doc) {
  json_guard([&] {
    apply_overrides(cfg, doc, false);
    return 0;
  });
}

json config_to_json(const SimulationConfig& cfg) {
  json ch = {{"gain_db", cfg.channel.gain_db},
             {"snr_db", cfg.channel.snr_db ? json(*cfg.channel.snr_db) : json(nullptr)},
             {"freq_scale", cfg.channel.freq_scale},
             {"interferer", nullptr}};
  if (cfg.channel.interferer) {
    ch["interferer"] = {{"freq_hz", cfg.channel.interferer->freq_hz},
                        {"level_db", cfg.channel.interferer->level_db}};
  }
  return {
      {"rate_hz", cfg.rate_hz},
      {"tone", {{"amplitude", cfg.tone.amplitude}, {"twist_db", cfg.tone.twist_db}}},
      {"channel", ch},
      {"detector", {{"profile", std::string(decoder::profile_name(cfg.profile))}}},
      {"steering", {{"t_gtp_ms", cfg.steering.t_gtp_ms}, {"t_gta_ms", cfg.steering.t_gta_ms}}},
      {"drivetrain",
       {{"en1", cfg.enables.en1},
        {"en2", cfg.enables.en2},
        {"unmapped", cfg.unmapped == drivetrain::UnmappedPolicy::hold ? "hold" : "stop"}}},
      {"vehicle",
       {{"wheel_speed_mps", cfg.vehicle.wheel_speed_mps},
        {"track_width_m", cfg.vehicle.track_width_m},
        {"dt_s", cfg.vehicle.dt_s}}},
      {"ring_ticks", cfg.ring_ticks},
      {"seed", cfg.seed},
  };
}

json to_json(const Scenario& scenario) {
  json doc = config_to_json(scenario.config);
  doc["duration_ms"] = scenario.duration_ms;
  json script = json::array();
  for (const auto& ev : scenario.script.events) {
    script.push_back({{"key", std::string(1, ev.key.symbol())},
                      {"press_at_ms", ev.press_at_ms},
                      {"hold_ms", ev.hold_ms}});
  }
  doc["script"] = script;
  return doc;
}

Scenario scenario_from_json(const json& doc) {
  return json_guard([&] {
    Scenario s;
    apply_overrides(s.config, doc, true);
    read_field(doc, "duration_ms", s.duration_ms);
    if (auto it = doc.find("script"); it != doc.end()) {
      if (!it->is_array()) throw ConfigError("script must be an array");
      for (const auto& ev : *it) {
        check_keys(ev, {"key", "press_at_ms", "hold_ms"}, "script event");
        s.script.events.push_back(
            {key_from_json(ev.at("key")), ev.at("press_at_ms").get<double>(), ev.at("hold_ms").get<double>()});
      }
    }
    s.validate();
    return s;
  });
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("scenario " + path + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

json state_message(const StateFrame& frame) {
  const auto& r = frame.record;
  return {
      {"type", "state"},
      {"t_ms", r.t_ms},
      {"call", std::string(call_state_name(r.call))},
      {"key", r.key_down ? json(std::string(1, r.key_down->symbol())) : json(nullptr)},
      {"est", r.est_active},
      {"latched", r.latched ? json(r.latched->hex()) : json(nullptr)},
      {"port", r.port.hex()},
      {"wheels",
       {{"left", std::string(drivetrain::short_name(r.wheels.left))},
        {"right", std::string(drivetrain::short_name(r.wheels.right))}}},
      {"pose", {{"x", r.pose.x}, {"y", r.pose.y}, {"theta", r.pose.theta}}},
      {"energies",
       {{"low", std::vector<double>(frame.energies.low.begin(), frame.energies.low.end())},
        {"high", std::vector<double>(frame.energies.high.begin(), frame.energies.high.end())}}},
  };
}

Scenario replay_scenario(const SimulationConfig& cfg, const std::vector<KeyChange>& changes,
                         std::int64_t ticks) {
  const double tick_ms = cfg.tick_ms();
  Scenario s;
  s.config = cfg;
  s.duration_ms = static_cast<double>(ticks) * tick_ms;
  std::optional<KeyChange> down;
  auto close = [&](std::int64_t at) {
    if (down && at > down->tick) {
      s.script.events.push_back({*down->key, static_cast<double>(down->tick) * tick_ms,
                                 static_cast<double>(at - down->tick) * tick_ms});
    }
    down.reset();
  };
  for (const auto& c : changes) {
    close(c.tick);
    if (c.key) down = c;
  }
  close(ticks);
  return s;
}

}  // namespace dtmfdrive::session

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dtmfdrive/channel.hpp"
#include "dtmfdrive/decoder.hpp"
#include "dtmfdrive/design_calc.hpp"
#include "dtmfdrive/error.hpp"
#include "dtmfdrive/server.hpp"
#include "dtmfdrive/session.hpp"
#include "dtmfdrive/steering.hpp"
#include "dtmfdrive/wav.hpp"
#include "report.hpp"

namespace {

using namespace dtmfdrive;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr const char* kProfileEnv = "DTMF_DRIVE_PROFILE";

bool g_json = false;

void emit(const json& doc, const std::string& text) {
  if (g_json) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Accepts 390k, 100n, 2.2M, 10u, 1m, 5p as well as plain numbers.
CLI::Option* add_quantity(CLI::App* app, const std::string& name, double& value,
                          const std::string& desc) {
  static const std::map<std::string, double> prefixes{
      {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6}, {"m", 1e-3}, {"k", 1e3}, {"K", 1e3}, {"M", 1e6}};
  return app->add_option(name, value, desc)
      ->transform(CLI::AsNumberWithUnit(prefixes, CLI::AsNumberWithUnit::CASE_SENSITIVE))
      ->capture_default_str();
}

CLI::Option* add_profile(CLI::App* app, std::string& value, const std::string& desc) {
  return app->add_option("--profile", value, desc)
      ->check(CLI::IsMember({"standard", "paper-replication", "paper_replication"}));
}

decoder::Profile profile_of(const std::string& name) {
  const auto p = decoder::parse_profile(name);
  if (!p) throw ConfigError("unknown detector profile '" + name + "'");
  return *p;
}

// Flag, then the scenario file, then the environment, then standard. An
// invalid environment value is a usage error rather than ignored.
decoder::Profile resolve_profile(const std::string& flag, const nlohmann::json* scenario = nullptr) {
  if (!flag.empty()) return profile_of(flag);
  if (scenario && scenario->contains("detector") && (*scenario)["detector"].contains("profile")) {
    return profile_of((*scenario)["detector"]["profile"].get<std::string>());
  }
  if (const char* env = std::getenv(kProfileEnv); env && *env) {
    if (const auto p = decoder::parse_profile(env)) return *p;
    throw ConfigError(std::string(kProfileEnv) + ": unknown detector profile '" + env + "'");
  }
  return decoder::Profile::standard;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << data)) throw DataError("cannot write " + path);
}

json event_json(const steering::SteeringEvent& e) {
  const bool latched = e.kind == steering::SteeringEvent::Kind::latched;
  return {{"t_ms", e.t_ms},
          {"event", latched ? "latched" : "released"},
          {"code", e.code.binary()},
          {"code_hex", e.code.hex()},
          {"key", std::string(1, steering::key_of(e.code).symbol())}};
}

// --- encode ---------------------------------------------------------------

struct EncodeArgs {
  std::string keys;
  double hold_ms = 100.0;
  double gap_ms = 80.0;
  double lead_ms = 0.0;
  double tail_ms = 50.0;
  int rate_hz = 8000;
  double amplitude = signal::kDefaultToneAmplitude;
  double twist_db = 0.0;
  double gain_db = 0.0;
  std::optional<double> snr_db;
  double freq_scale = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_encode(const EncodeArgs& a) {
  const auto script = signal::make_script(a.keys, a.hold_ms, a.gap_ms, a.lead_ms);
  const signal::ToneLevels levels{a.amplitude, a.twist_db};
  auto buffer = signal::render_script(script, a.rate_hz, levels, a.tail_ms);
  channel::ChannelConfig ch;
  ch.gain_db = a.gain_db;
  ch.snr_db = a.snr_db;
  ch.freq_scale = a.freq_scale;
  buffer = channel::apply(buffer, ch, a.seed);
  signal::write_wav(a.out, buffer);
  emit({{"out", a.out},
        {"keys", a.keys},
        {"rate_hz", buffer.rate_hz},
        {"samples", buffer.size()},
        {"duration_ms", buffer.duration_ms()}},
       fmt("wrote %s: %zu keys, %zu samples at %d Hz (%.1f ms)\n", a.out.c_str(), a.keys.size(),
           buffer.size(), buffer.rate_hz, buffer.duration_ms()));
  return 0;
}

// --- decode ---------------------------------------------------------------

struct DecodeArgs {
  std::string in;
  std::string profile;
  steering::SteeringConfig steering;
  std::string events;
};

int run_decode(const DecodeArgs& a) {
  const auto buffer = signal::read_wav(a.in);
  const auto profile = resolve_profile(a.profile);
  const auto det = decoder::DetectorConfig::for_profile(profile, buffer.rate_hz);
  a.steering.validate();
  const auto events = cli::decode_events(buffer, det, a.steering);

  std::string keys;
  json list = json::array();
  std::string csv = "t_ms,event,code_hex,key\n";
  for (const auto& e : events) {
    const auto j = event_json(e);
    list.push_back(j);
    if (e.kind == steering::SteeringEvent::Kind::latched) keys += j["key"].get<std::string>();
    csv += fmt("%.3f,%s,%s,%s\n", e.t_ms, j["event"].get<std::string>().c_str(),
               j["code_hex"].get<std::string>().c_str(), j["key"].get<std::string>().c_str());
  }
  if (!a.events.empty()) write_file(a.events, csv);

  std::string text;
  for (const auto& e : events) {
    if (e.kind != steering::SteeringEvent::Kind::latched) continue;
    text += fmt("%10.3f ms  %s  %s  %c\n", e.t_ms, e.code.binary().c_str(), e.code.hex().c_str(),
                steering::key_of(e.code).symbol());
  }
  text += "keys: " + keys + "\n";
  emit({{"in", a.in},
        {"profile", decoder::profile_name(profile)},
        {"keys", keys},
        {"events", list}},
       text);
  return 0;
}

// --- simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  std::string out;
  std::string profile;
};

json read_scenario_doc(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

int run_simulate(const SimulateArgs& a) {
  const auto doc = read_scenario_doc(a.scenario);
  auto scenario = session::scenario_from_json(doc);
  scenario.config.profile = resolve_profile(a.profile, &doc);

  const auto result = session::run_scenario(scenario);
  const auto csv = session::trace_csv(result.trace);
  if (!a.out.empty()) write_file(a.out, csv);

  json events = json::array();
  for (const auto& e : result.events) events.push_back(event_json(e));
  const auto& p = result.final_pose;
  const json summary{{"ticks", result.trace.size()},
                     {"profile", decoder::profile_name(scenario.config.profile)},
                     {"final_pose", {{"x", p.x}, {"y", p.y}, {"theta", p.theta}}},
                     {"events", events},
                     {"out", a.out.empty() ? json(nullptr) : json(a.out)}};
  if (g_json) {
    emit(summary, "");
  } else if (a.out.empty()) {
    std::cout << csv;
  } else {
    emit(summary, fmt("wrote %s: %zu ticks, final pose x=%.6f y=%.6f theta=%.6f\n", a.out.c_str(),
                      result.trace.size(), p.x, p.y, p.theta));
  }
  return 0;
}

// --- serve ----------------------------------------------------------------

struct ServeArgs {
  server::ServeOptions opts;
  std::string scenario;
  std::string profile;
};

int run_serve(ServeArgs a) {
  json doc = json::object();
  if (!a.scenario.empty()) {
    doc = read_scenario_doc(a.scenario);
    a.opts.defaults = session::scenario_from_json(doc).config;
  }
  a.opts.defaults.profile = resolve_profile(a.profile, &doc);

  // Signals are taken synchronously by this thread; the service runs on
  // its own.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  server::Server srv(a.opts);
  const std::string url = fmt("http://%s:%u/", a.opts.address.c_str(), srv.port());
  emit({{"listening", url}, {"port", srv.port()}}, "listening on " + url + "\n");
  std::cout.flush();

  std::thread worker([&] { srv.run(); });
  int sig = 0;
  sigwait(&set, &sig);
  srv.stop();
  worker.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DTMF-controlled vehicle: tone codec, decoder, design calculator and simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", g_json, "Machine-readable JSON output");
  app.footer(std::string("Environment: ") + kProfileEnv +
             " selects the detector profile (standard | paper-replication).");

  EncodeArgs enc;
  auto* encode = app.add_subcommand("encode", "Render a key sequence to a PCM16 WAV file");
  encode->add_option("--keys", enc.keys, "Keypad symbols, e.g. 2486")->required();
  encode->add_option("--out", enc.out, "Output WAV path")->required();
  add_quantity(encode, "--hold-ms", enc.hold_ms, "Tone duration per key (ms)");
  add_quantity(encode, "--gap-ms", enc.gap_ms, "Silence between keys (ms)");
  add_quantity(encode, "--lead-ms", enc.lead_ms, "Silence before the first key (ms)");
  add_quantity(encode, "--tail-ms", enc.tail_ms, "Silence after the last key (ms)");
  encode->add_option("--rate", enc.rate_hz, "Sample rate (Hz)")
      ->check(CLI::IsMember({8000, 16000, 44100}))
      ->capture_default_str();
  encode->add_option("--amplitude", enc.amplitude, "Mean per-tone amplitude (full scale 1)")
      ->capture_default_str();
  encode->add_option("--twist-db", enc.twist_db, "High tone level minus low tone level (dB)")
      ->capture_default_str();
  encode->add_option("--gain-db", enc.gain_db, "Channel gain (dB)")->capture_default_str();
  encode->add_option("--snr-db", enc.snr_db, "Add white noise at this SNR (dB)");
  encode->add_option("--freq-scale", enc.freq_scale, "Channel time-base scale [0.9, 1.1]")
      ->capture_default_str();
  encode->add_option("--seed", enc.seed, "Noise seed")->capture_default_str();

  DecodeArgs dec;
  auto* decode = app.add_subcommand("decode", "Decode a WAV file into latched key codes");
  decode->add_option("--in", dec.in, "Input WAV path")->required();
  add_profile(decode, dec.profile,
              std::string("Detector profile (default: $") + kProfileEnv + ", else standard)");
  add_quantity(decode, "--t-gtp-ms", dec.steering.t_gtp_ms, "Tone-present guard time (ms)");
  add_quantity(decode, "--t-gta-ms", dec.steering.t_gta_ms, "Tone-absent guard time (ms)");
  decode->add_option("--events", dec.events, "Write Latched/Released events as CSV");

  auto* calc = app.add_subcommand("calc", "Analog design calculations");
  calc->require_subcommand(1);

  double r_gt = 390e3, c_gt = 100e-9, vdd = 5.0, vtst = 2.5;
  bool discharge = false;
  auto* c_guard = calc->add_subcommand("guard-time", "RC guard time t = RC ln(Vdd/Vtst)");
  add_quantity(c_guard, "--r", r_gt, "Resistance (ohm)");
  add_quantity(c_guard, "--c", c_gt, "Capacitance (F)");
  add_quantity(c_guard, "--vdd", vdd, "Supply voltage (V)");
  add_quantity(c_guard, "--vtst", vtst, "Steering threshold (V)");
  c_guard->add_flag("--discharge", discharge, "Use RC ln(Vdd/(Vdd-Vtst))");

  double r_z = 100e3, c_z = 10e-9, f_z = 685.0;
  auto* c_imp = calc->add_subcommand("impedance", "Input impedance sqrt(R^2 + (1/wC)^2)");
  add_quantity(c_imp, "--r", r_z, "Resistance (ohm)");
  add_quantity(c_imp, "--c", c_z, "Capacitance (F)");
  add_quantity(c_imp, "--f", f_z, "Frequency (Hz)");

  double rf_g = 220e3, r_g = 220e3, tau_g = 1.52e-3, f_g = 685.0;
  auto* c_gain = calc->add_subcommand("gain", "Input amplifier gain M(w) in dB");
  add_quantity(c_gain, "--rf", rf_g, "Feedback resistance (ohm)");
  add_quantity(c_gain, "--r", r_g, "Input resistance (ohm)");
  add_quantity(c_gain, "--tau", tau_g, "Input time constant (s)");
  add_quantity(c_gain, "--f", f_g, "Frequency (Hz)");

  double atten = -0.1, f_t = 685.0;
  std::optional<double> r_t;
  auto* c_tau = calc->add_subcommand("tau", "Time constant for a given attenuation");
  add_quantity(c_tau, "--atten-db", atten, "Allowed attenuation (dB, negative)");
  add_quantity(c_tau, "--f", f_t, "Frequency (Hz)");
  c_tau->add_option("--r", r_t, "Also report C = tau/R for this resistance (ohm)")
      ->transform(CLI::AsNumberWithUnit(
          std::map<std::string, double>{
              {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6}, {"m", 1e-3}, {"k", 1e3}, {"K", 1e3}, {"M", 1e6}},
          CLI::AsNumberWithUnit::CASE_SENSITIVE));

  double r1_p = 39e3, r2_p = 100e3;
  auto* c_par = calc->add_subcommand("parallel", "Parallel resistance R1 R2 / (R1 + R2)");
  add_quantity(c_par, "--r1", r1_p, "First resistance (ohm)");
  add_quantity(c_par, "--r2", r2_p, "Second resistance (ohm)");

  double r5_v = 100e3, r1_v = 100e3;
  auto* c_vg = calc->add_subcommand("voltage-gain", "Differential amplifier gain R5/R1");
  add_quantity(c_vg, "--r5", r5_v, "Feedback resistance (ohm)");
  add_quantity(c_vg, "--r1", r1_v, "Input resistance (ohm)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario JSON and write the trace CSV");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON path")->required();
  simulate->add_option("--out", sim.out, "Trace CSV path (stdout when omitted)");
  add_profile(simulate, sim.profile,
              std::string("Detector profile (default: scenario file, then $") + kProfileEnv +
                  ", else standard)");

  bool tables = false;
  auto* report = app.add_subcommand("report", "Reproduce the golden decision table, worked values and measured tones");
  report->add_flag("--tables", tables, "Tables and worked values (the only section)");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Live WebSocket teleoperation service");
  serve->add_option("--address", srv.opts.address, "Bind address")->capture_default_str();
  serve->add_option("--port", srv.opts.port, "TCP port (0 = ephemeral)")->capture_default_str();
  serve->add_option("--scenario", srv.scenario, "Scenario JSON supplying the session defaults");
  add_profile(serve, srv.profile,
              std::string("Detector profile (default: scenario file, then $") + kProfileEnv +
                  ", else standard)");
  serve->add_option("--frame-every", srv.opts.frame_every_ticks, "Ticks per state frame")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--speed", srv.opts.speed, "Simulated time per wall-clock time")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  serve->add_option("--static-dir", srv.opts.static_dir, "Directory served over HTTP GET");
  serve->add_option("--log-dir", srv.opts.log_dir,
                    "Write session-N.json (replayable scenario) and session-N.csv per session")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*encode) return run_encode(enc);
    if (*decode) return run_decode(dec);
    if (*simulate) return run_simulate(sim);
    if (*serve) return run_serve(srv);
    if (*report) {
      const auto r = cli::build_report();
      emit(r.doc, r.text);
      return r.pass ? 0 : kExitData;
    }
    if (*c_guard) {
      const double t = discharge ? design::guard_time_discharge(r_gt, c_gt, vdd, vtst)
                                 : design::guard_time(r_gt, c_gt, vdd, vtst);
      emit({{"guard_time_s", t}}, fmt("guard time %.9g s (%.6g ms)\n", t, t * 1e3));
    } else if (*c_imp) {
      const double z = design::input_impedance(r_z, c_z, f_z);
      emit({{"impedance_ohm", z}}, fmt("input impedance %.9g ohm (%.6g kOhm)\n", z, z * 1e-3));
    } else if (*c_gain) {
      const double g = design::amplifier_gain_db(rf_g, r_g, tau_g, f_g);
      emit({{"gain_db", g}}, fmt("gain %.6g dB\n", g));
    } else if (*c_tau) {
      const double tau = design::solve_time_constant(atten, f_t);
      json doc{{"tau_s", tau}};
      std::string text = fmt("time constant %.9g s (%.6g ms)\n", tau, tau * 1e3);
      if (r_t) {
        const double c = design::capacitor_for(tau, *r_t);
        doc["capacitance_f"] = c;
        text += fmt("capacitance %.9g F (%.6g nF)\n", c, c * 1e9);
      }
      emit(doc, text);
    } else if (*c_par) {
      const double r = design::parallel_resistance(r1_p, r2_p);
      emit({{"resistance_ohm", r}}, fmt("parallel resistance %.9g ohm (%.6g kOhm)\n", r, r * 1e-3));
    } else if (*c_vg) {
      const double g = design::voltage_gain(r5_v, r1_v);
      emit({{"voltage_gain", g}}, fmt("voltage gain %.6g\n", g));
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (g_json) std::cout << json{{"error", e.what()}, {"kind", "usage"}}.dump() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (g_json) std::cout << json{{"error", e.what()}, {"kind", "data"}}.dump() << '\n';
    return kExitData;
  }
}

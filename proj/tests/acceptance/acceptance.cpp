// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion ids as
// arguments to run a subset; exit status is non-zero if any ran and failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtmfdrive/channel.hpp"
#include "dtmfdrive/decoder.hpp"
#include "dtmfdrive/design_calc.hpp"
#include "dtmfdrive/drivetrain.hpp"
#include "dtmfdrive/session.hpp"
#include "dtmfdrive/steering.hpp"
#include "dtmfdrive/vehicle.hpp"
#include "support/live.hpp"
#include "support/oracles.hpp"

using namespace dtmfdrive;
using signal::DtmfKey;
using steering::SteeringEvent;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<SteeringEvent> decode(const signal::SampleBuffer& buf, decoder::Profile profile) {
  const auto frames = decoder::stream_detect(buf, decoder::DetectorConfig::for_profile(profile, buf.rate_hz));
  return steering::run(frames, {});
}

std::string latched_keys(const std::vector<SteeringEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    if (e.kind == SteeringEvent::Kind::latched) out += steering::key_of(e.code).symbol();
  }
  return out;
}

// Tone pair at arbitrary frequencies, zero phase, with silence either side.
signal::SampleBuffer tone_pair(double low_hz, double high_hz, double ms, double pad_ms) {
  const auto pad = signal::samples_for_ms(pad_ms, 8000);
  const auto n = signal::samples_for_ms(ms, 8000);
  signal::SampleBuffer b{8000, std::vector<double>(pad + n + pad, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 8000.0;
    b.samples[pad + i] = 0.4 * std::sin(2 * oracle::kPi * low_hz * t) + 0.4 * std::sin(2 * oracle::kPi * high_hz * t);
  }
  return b;
}

Outcome golden_decisions() {
  struct Row {
    char key;
    const char* code;
    std::uint8_t port;
    const char* decision;
  };
  const Row rows[] = {{'2', "0010", 0x0A, "Forward"},
                      {'4', "0100", 0x08, "Left turn"},
                      {'6', "0110", 0x02, "Right turn"},
                      {'8', "1000", 0x05, "Backward"},
                      {'5', "0101", 0x00, "Stop"}};
  const auto t0 = Clock::now();
  int ok = 0;
  std::string got;
  for (const auto& row : rows) {
    const auto clean = channel::apply(signal::synthesize(DtmfKey::parse(row.key), 100.0), {}, 1);
    const auto events = decode(clean, decoder::Profile::standard);
    if (events.empty() || events.front().kind != SteeringEvent::Kind::latched) {
      got += fmt(" %c:none", row.key);
      continue;
    }
    const auto code = events.front().code;
    const auto port = drivetrain::control_decision(code, drivetrain::kStop);
    const auto label = drivetrain::motion_label(drivetrain::driver_outputs(port));
    got += fmt(" %c:%s/%s/%s", row.key, code.binary().c_str(), port.hex().c_str(), label.c_str());
    ok += code.binary() == row.code && port.bits() == row.port && label == row.decision;
  }
  const double s = seconds_since(t0);
  return {ok == 5 && s < 1.0, fmt("%d/5 rows exact in %.3f s;", ok, s) + got};
}

Outcome worked_values() {
  struct Check {
    const char* name;
    double got;
    double want;
    double rel;
  };
  const double tau = design::solve_time_constant(-0.1, 685.0);
  const Check checks[] = {
      {"guard_time", design::guard_time(390e3, 100e-9, 5.0, 2.5), 0.027027, 1e-6},
      {"tau", tau, 1.52e-3, 0.01},
      {"C", design::capacitor_for(tau, 220e3), 6.9e-9, 0.01},
      {"parallel", design::parallel_resistance(39e3, 100e3), 28.06e3, 1e-3},
      {"impedance", design::input_impedance(100e3, 10e-9, 685.0), 102.66e3, 1e-3},
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : checks) {
    const double rel = std::abs(c.got - c.want) / std::abs(c.want);
    const bool ok = rel <= c.rel;
    pass = pass && ok;
    detail += fmt("%s%s=%.6g (want %.6g, rel %.2e, tol %.0e)", detail.empty() ? "" : "; ", c.name, c.got, c.want,
                  rel, c.rel);
    if (!ok) detail += " OUT";
  }
  return {pass, detail};
}

Outcome bench_tones() {
  struct Row {
    char key;
    double low;
    double high;
  };
  const Row rows[] = {{'2', 672, 1320}, {'4', 731, 1201}, {'6', 731, 1475}, {'8', 855, 1322}, {'5', 735, 1325}};
  int ok = 0;
  std::string replication;
  std::string standard;
  for (const auto& r : rows) {
    const auto buf = tone_pair(r.low, r.high, 100.0, 50.0);
    const auto rep = latched_keys(decode(buf, decoder::Profile::paper_replication));
    const auto std_keys = latched_keys(decode(buf, decoder::Profile::standard));
    ok += rep == std::string(1, r.key);
    replication += fmt(" %c->%s", r.key, rep.empty() ? "-" : rep.c_str());
    standard += fmt(" %c->%s", r.key, std_keys.empty() ? "-" : std_keys.c_str());
  }
  return {ok == 5, fmt("paper-replication %d/5:", ok) + replication + "; standard (recorded):" + standard};
}

// Keys lost or inserted, counted from the longest common subsequence.
int key_errors(const std::string& sent, const std::string& got) {
  std::vector<std::vector<int>> l(sent.size() + 1, std::vector<int>(got.size() + 1, 0));
  for (std::size_t i = 1; i <= sent.size(); ++i) {
    for (std::size_t j = 1; j <= got.size(); ++j) {
      l[i][j] = sent[i - 1] == got[j - 1] ? l[i - 1][j - 1] + 1 : std::max(l[i - 1][j], l[i][j - 1]);
    }
  }
  const int common = l[sent.size()][got.size()];
  return static_cast<int>(sent.size()) - common + static_cast<int>(got.size()) - common;
}

Outcome roundtrip() {
  const auto t0 = Clock::now();
  oracle::Gen gen(2024);
  int clean_ok = 0;
  int noisy_errors = 0;
  int noisy_keys = 0;
  const int sequences = 1000;
  for (int s = 0; s < sequences; ++s) {
    signal::KeyScript script;
    const auto keys = gen.keys(8);
    double at = gen.uniform(0.0, 20.0);
    for (char k : keys) {
      const double hold = gen.uniform(60.0, 120.0);
      script.events.push_back({DtmfKey::parse(k), at, hold});
      at += hold + gen.uniform(60.0, 120.0);
    }
    const auto buf = signal::render_script(script, 8000, {}, 60.0);
    clean_ok += latched_keys(decode(buf, decoder::Profile::standard)) == keys;

    channel::ChannelConfig ch;
    ch.snr_db = 20.0;
    const auto noisy = channel::apply(buf, ch, static_cast<std::uint64_t>(s) + 1);
    noisy_errors += key_errors(keys, latched_keys(decode(noisy, decoder::Profile::standard)));
    noisy_keys += 8;
  }
  const double secs = seconds_since(t0);
  const double noisy_rate = 1.0 - static_cast<double>(noisy_errors) / noisy_keys;
  const bool pass = clean_ok == sequences && noisy_rate >= 0.999 && secs < 60.0;
  return {pass, fmt("clean %d/%d sequences; 20 dB SNR per-key %.5f (%d errors in %d keys); %.1f s", clean_ok,
                    sequences, noisy_rate, noisy_errors, noisy_keys, secs)};
}

Outcome guard_time() {
  oracle::Gen gen(27);
  const double hop = 6.375;
  int bad = 0;
  int short_n = 0;
  int long_n = 0;
  std::string first_bad;
  for (int trial = 0; trial < 500; ++trial) {
    const double len = gen.uniform(1.0, 100.0);
    const double lead = hop * gen.integer(1, 6);
    const auto buf = signal::render_script(signal::make_script(std::string(1, gen.key()), len, 0, lead), 8000, {}, 60);
    int latches = 0;
    for (const auto& e : decode(buf, decoder::Profile::standard)) latches += e.kind == SteeringEvent::Kind::latched;
    bool ok = true;
    if (len < 27.0) {
      ++short_n;
      ok = latches == 0;
    } else if (len >= 27.0 + hop) {
      ++long_n;
      ok = latches == 1;
    }
    if (!ok && bad++ == 0) first_bad = fmt("; first miss L=%.3f ms with %d latches", len, latches);
  }
  return {bad == 0, fmt("500 trials, hop-aligned onsets: %d below 27 ms, %d at or above 33.375 ms, %d violations",
                        short_n, long_n, bad) + first_bad};
}

Outcome talk_off() {
  int latched = 0;
  int tones = 0;
  std::string which;
  for (double amp : {0.1, 0.4, 0.8}) {
    for (double f = 300; f <= 3400; f += 10) {
      const auto n = signal::samples_for_ms(60.0, 8000);
      const auto pad = signal::samples_for_ms(30.0, 8000);
      signal::SampleBuffer b{8000, std::vector<double>(pad + n + pad, 0.0)};
      for (std::size_t i = 0; i < n; ++i) b.samples[pad + i] = amp * std::sin(2 * oracle::kPi * f * i / 8000.0);
      const auto keys = latched_keys(decode(b, decoder::Profile::standard));
      ++tones;
      if (!keys.empty()) {
        ++latched;
        which += fmt(" %.0fHz@%.1f", f, amp);
      }
    }
  }
  return {latched == 0, fmt("%d single tones (300-3400 Hz, 3 levels), %d latched", tones, latched) + which};
}

Outcome oracle_equivalence() {
  oracle::Gen gen(10'000);
  const auto cfg = decoder::DetectorConfig::standard();
  double worst = 0.0;
  int bad = 0;
  for (int i = 0; i < 10'000; ++i) {
    std::vector<double> w(102);
    switch (i % 3) {
      case 0:
        w = gen.window(102, gen.uniform(0.01, 1.0));
        break;
      case 1: {
        const auto t = oracle::tones_of(gen.key());
        const double pl = gen.uniform(0, 6.28);
        const double ph = gen.uniform(0, 6.28);
        for (std::size_t n = 0; n < w.size(); ++n) {
          w[n] = 0.4 * std::sin(2 * oracle::kPi * t.low * n / 8000 + pl) +
                 0.4 * std::sin(2 * oracle::kPi * t.high * n / 8000 + ph) + gen.normal(0.05);
        }
        break;
      }
      default: {
        const double f = gen.uniform(300, 3400);
        for (std::size_t n = 0; n < w.size(); ++n) w[n] = 0.5 * std::sin(2 * oracle::kPi * f * n / 8000);
      }
    }
    const auto e = decoder::band_energies(w, cfg);
    for (std::size_t k = 0; k < 4; ++k) {
      for (auto [got, f] : {std::pair{e.low[k], oracle::kRowHz[k]}, std::pair{e.high[k], oracle::kColHz[k]}}) {
        const double ref = oracle::dft_energy(w, f, 8000);
        const double rel = std::abs(got - ref) / std::max(ref, 1e-12);
        worst = std::max(worst, rel);
        bad += rel > 0.01;
      }
    }
  }
  return {bad == 0, fmt("10000 windows x 8 bins; worst relative error %.2e; %d over 1%%", worst, bad)};
}

Outcome kinematics() {
  const vehicle::VehicleParams p;
  using drivetrain::MotorDirection;
  const double t = oracle::kPi * p.track_width_m / p.wheel_speed_mps;
  const auto got = vehicle::advance({}, {MotorDirection::stop, MotorDirection::forward}, t, p);
  const auto ref = oracle::arc({0, 0, 0}, 0.0, p.wheel_speed_mps, p.track_width_m, t);
  const double pos_err = std::hypot(got.x - ref.x, got.y - ref.y);
  const double path = 0.5 * p.wheel_speed_mps * t;
  const double per_second = pos_err / path / t;
  const double heading_err = std::abs(oracle::wrap(got.theta - ref.theta)) / oracle::kPi;

  oracle::Gen gen(8);
  double fixed_err = 0.0;
  double reverse_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const vehicle::VehiclePose start{gen.uniform(-2, 2), gen.uniform(-2, 2), gen.uniform(-3, 3)};
    const auto still = vehicle::advance(start, {}, gen.uniform(0, 5), p);
    fixed_err = std::max(fixed_err, std::hypot(still.x - start.x, still.y - start.y));
    const double d = gen.uniform(0.01, 5);
    auto q = vehicle::advance(start, {MotorDirection::forward, MotorDirection::forward}, d, p);
    q = vehicle::advance(q, {MotorDirection::backward, MotorDirection::backward}, d, p);
    reverse_err = std::max(reverse_err, std::hypot(q.x - start.x, q.y - start.y));
  }
  const bool pass = per_second <= 0.01 && heading_err <= 0.01 && fixed_err <= 1e-9 && reverse_err <= 1e-9;
  return {pass, fmt("pivot: position error %.2e per s of travel, heading error %.2e; stop drift %.1e m; "
                    "reversal error %.1e m",
                    per_second, heading_err, fixed_err, reverse_err)};
}

Outcome replay() {
  using namespace std::chrono_literals;
  server::ServeOptions opts;
  opts.speed = 4.0;
  opts.frame_every_ticks = 1;
  live::Harness h(opts);
  {
    live::Client c(h.port());
    c.send(nlohmann::json{{"type", "set_config"}, {"channel", {{"snr_db", 20.0}}}, {"seed", 11}});
    oracle::Gen gen(9);
    for (int i = 0; i < 8; ++i) {
      c.send(nlohmann::json{{"type", "key_down"}, {"key", std::string(1, "24685"[i % 5])}});
      std::this_thread::sleep_for(std::chrono::milliseconds(gen.integer(5, 40)));
      c.send(nlohmann::json{{"type", "key_up"}});
      std::this_thread::sleep_for(std::chrono::milliseconds(gen.integer(5, 30)));
    }
    c.close();
  }
  const auto logs = h.wait_logs(2);
  if (logs.size() < 2) return {false, "live session log never arrived"};
  const auto& log = logs.back();
  // Round-trip through the scenario document, as a saved log would be.
  const auto doc = session::to_json(session::replay_scenario(log.config, log.changes, log.ticks));
  const auto replayed = session::trace_csv(session::run_scenario(session::scenario_from_json(doc)).trace);
  const bool same = replayed == log.trace_csv;
  return {same, fmt("%lld ticks, %zu key changes, trace %zu bytes, %s", static_cast<long long>(log.ticks),
                    log.changes.size(), log.trace_csv.size(), same ? "byte-identical" : "DIFFERS")};
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"golden_decisions", "Key-to-motion golden pipeline", golden_decisions},
      {"worked_values", "Design worked values", worked_values},
      {"bench_tones", "Bench-measured tone pairs", bench_tones},
      {"roundtrip", "Encode/decode roundtrip", roundtrip},
      {"guard_time", "Guard-time property", guard_time},
      {"talk_off", "Talk-off property", talk_off},
      {"oracle", "Band energy oracle equivalence", oracle_equivalence},
      {"kinematics", "Kinematics oracle", kinematics},
      {"replay", "Live replay equivalence", replay},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  int ran = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %-16s %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matches the given ids\n");
    return 2;
  }
  return failed == 0 ? 0 : 1;
}

#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "dtmfdrive/design_calc.hpp"
#include "dtmfdrive/drivetrain.hpp"

namespace dtmfdrive::cli {

using nlohmann::json;

std::vector<steering::SteeringEvent> decode_events(const signal::SampleBuffer& buffer,
                                                   const decoder::DetectorConfig& det,
                                                   const steering::SteeringConfig& steer) {
  const auto frames = decoder::stream_detect(buffer, det);
  return steering::run(frames, steer, det.hop_ms());
}

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::optional<steering::DecodedCode> first_latch(const signal::SampleBuffer& buffer,
                                                 const decoder::DetectorConfig& det) {
  for (const auto& e : decode_events(buffer, det, {})) {
    if (e.kind == steering::SteeringEvent::Kind::latched) return e.code;
  }
  return std::nullopt;
}

// A tone pair at arbitrary frequencies, 100 ms plus 50 ms of silence.
signal::SampleBuffer tone_pair(double low_hz, double high_hz) {
  signal::SampleBuffer buf;
  const auto on = signal::samples_for_ms(100.0, buf.rate_hz);
  buf.samples.assign(on + signal::samples_for_ms(50.0, buf.rate_hz), 0.0);
  const signal::ToneLevels levels;
  for (std::size_t n = 0; n < on; ++n) {
    const double t = static_cast<double>(n) / buf.rate_hz;
    buf.samples[n] = levels.low_amplitude() * std::sin(2 * std::numbers::pi * low_hz * t) +
                     levels.high_amplitude() * std::sin(2 * std::numbers::pi * high_hz * t);
  }
  return buf;
}

struct DecisionRow {
  char key;
  const char* code;
  const char* port;
  const char* decision;
};

constexpr DecisionRow kDecisions[] = {
    {'2', "0010", "0x0A", "Forward"},   {'4', "0100", "0x08", "Left turn"},
    {'6', "0110", "0x02", "Right turn"}, {'8', "1000", "0x05", "Backward"},
    {'5', "0101", "0x00", "Stop"},
};

struct MeasuredRow {
  char key;
  double low_hz;
  double high_hz;
};

constexpr MeasuredRow kMeasuredTones[] = {
    {'2', 672, 1320}, {'4', 731, 1201}, {'6', 731, 1475}, {'8', 855, 1322}, {'5', 735, 1325},
};

}  // namespace

Report build_report() {
  Report r;
  const auto standard = decoder::DetectorConfig::standard();
  const auto replication = decoder::DetectorConfig::paper_replication();

  r.text += "Hex readings and decisions (synthesised key -> decoder -> firmware -> H-bridge)\n";
  r.text += "key  mt8870  port  decision     expected                 result\n";
  json t3 = json::array();
  for (const auto& row : kDecisions) {
    const auto key = signal::DtmfKey::parse(row.key);
    const auto code = first_latch(signal::synthesize(key, 100.0), standard);
    std::string bits = "-", port = "-", decision = "-";
    if (code) {
      const auto nibble = drivetrain::control_decision(*code, drivetrain::kStop);
      bits = code->binary();
      port = nibble.hex();
      decision = drivetrain::motion_label(drivetrain::driver_outputs(nibble));
    }
    const bool ok = bits == row.code && port == row.port && decision == row.decision;
    r.pass = r.pass && ok;
    r.text += format("%-4c %-7s %-5s %-12s %s/%s/%-11s %s\n", row.key, bits.c_str(), port.c_str(),
                     decision.c_str(), row.code, row.port, row.decision, ok ? "PASS" : "FAIL");
    t3.push_back({{"key", std::string(1, row.key)},
                  {"code", bits},
                  {"port", port},
                  {"decision", decision},
                  {"expected", {{"code", row.code}, {"port", row.port}, {"decision", row.decision}}},
                  {"pass", ok}});
  }

  // Expected values carry three to five significant figures; each is
  // checked at that precision.
  struct Worked {
    const char* name;
    double value;
    double expected;
    double rel_tol;
    const char* unit;
    double scale;
    const char* note;
  };
  const double tau = design::solve_time_constant(-0.1, 685.0);
  const Worked worked[] = {
      {"guard time 390k/100n/5V/2.5V", design::guard_time(390e3, 100e-9, 5.0, 2.5), 0.027027, 1e-3,
       "ms", 1e3, "expected value uses ln 2 = 0.693"},
      {"input time constant -0.1 dB @ 685 Hz", tau, 1.52e-3, 1e-2, "ms", 1e3, ""},
      {"capacitor tau / 220k", design::capacitor_for(tau, 220e3), 6.9e-9, 1e-2, "nF", 1e9, ""},
      {"parallel 39k || 100k", design::parallel_resistance(39e3, 100e3), 28.06e3, 1e-3, "kOhm",
       1e-3, ""},
      {"input impedance 100k/10n @ 685 Hz", design::input_impedance(100e3, 10e-9, 685.0), 102.66e3,
       1e-3, "kOhm", 1e-3, "often rounded to 100 kOhm"},
      {"voltage gain 100k/100k", design::voltage_gain(100e3, 100e3), 1.0, 1e-9, "", 1.0, ""},
  };
  r.text += "\nWorked design values\n";
  r.text += "quantity                               computed      expected      tol     result\n";
  json wv = json::array();
  for (const auto& w : worked) {
    const double rel = std::abs(w.value - w.expected) / std::abs(w.expected);
    const bool ok = rel <= w.rel_tol;
    r.pass = r.pass && ok;
    r.text += format("%-38s %-13s %-13s %-7s %s%s%s\n", w.name,
                     format("%.5g %s", w.value * w.scale, w.unit).c_str(),
                     format("%.5g %s", w.expected * w.scale, w.unit).c_str(),
                     format("%g%%", w.rel_tol * 100).c_str(), ok ? "PASS" : "FAIL",
                     *w.note ? "  (" : "", *w.note ? (std::string(w.note) + ")").c_str() : "");
    wv.push_back({{"name", w.name},
                  {"value", w.value},
                  {"expected", w.expected},
                  {"rel_error", rel},
                  {"rel_tol", w.rel_tol},
                  {"pass", ok}});
  }

  r.text += "\nMeasured tone frequencies (paper-replication profile is golden; standard is informational)\n";
  r.text += "key  low   high  paper-replication  standard\n";
  json t1 = json::array();
  for (const auto& row : kMeasuredTones) {
    const auto buf = tone_pair(row.low_hz, row.high_hz);
    const auto rep = first_latch(buf, replication);
    const auto std_code = first_latch(buf, standard);
    const auto expect = steering::code_of(signal::DtmfKey::parse(row.key));
    const bool ok = rep && *rep == expect;
    r.pass = r.pass && ok;
    const auto shown = [](const std::optional<steering::DecodedCode>& c) {
      return c ? std::string(1, steering::key_of(*c).symbol()) : std::string("-");
    };
    r.text += format("%-4c %-5.0f %-5.0f %-3s %-14s %s\n", row.key, row.low_hz, row.high_hz,
                     shown(rep).c_str(), ok ? "PASS" : "FAIL", shown(std_code).c_str());
    t1.push_back({{"key", std::string(1, row.key)},
                  {"low_hz", row.low_hz},
                  {"high_hz", row.high_hz},
                  {"paper_replication", shown(rep)},
                  {"standard", shown(std_code)},
                  {"pass", ok}});
  }

  r.text += r.pass ? "\nall golden rows match\n" : "\ngolden mismatch\n";
  r.doc = {{"decisions", t3}, {"worked_values", wv}, {"measured_tones", t1}, {"pass", r.pass}};
  return r;
}

}  // namespace dtmfdrive::cli

#include "dtmfdrive/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::signal {
namespace {

constexpr std::string_view kSymbols = "123A456B789C*0#D";

}  // namespace

std::optional<DtmfKey> DtmfKey::from_symbol(char symbol) {
  if (symbol >= 'a' && symbol <= 'd') symbol = static_cast<char>(symbol - 'a' + 'A');
  const auto pos = kSymbols.find(symbol);
  if (pos == std::string_view::npos) return std::nullopt;
  return DtmfKey::at(static_cast<int>(pos) / 4, static_cast<int>(pos) % 4);
}

DtmfKey DtmfKey::parse(char symbol) {
  if (auto key = from_symbol(symbol)) return *key;
  throw ConfigError(std::string("not a DTMF key: '") + symbol + "'");
}

const std::array<DtmfKey, 16>& DtmfKey::all() {
  static constexpr auto keys = []<std::size_t... I>(std::index_sequence<I...>) {
    return std::array<DtmfKey, 16>{DtmfKey::at(I / 4, I % 4)...};
  }(std::make_index_sequence<16>{});
  return keys;
}

char DtmfKey::symbol() const { return kSymbols[index_]; }

ToneSpec tone_spec(DtmfKey key) {
  return {kLowGroupHz[static_cast<std::size_t>(key.row())],
          kHighGroupHz[static_cast<std::size_t>(key.column())]};
}

double SampleBuffer::duration_ms() const {
  return rate_hz > 0 ? 1000.0 * static_cast<double>(samples.size()) / rate_hz : 0.0;
}

void SampleBuffer::validate() const {
  if (rate_hz < kMinRateHz) {
    throw DataError("sample rate " + std::to_string(rate_hz) + " Hz is below " +
                    std::to_string(kMinRateHz) + " Hz");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double s = samples[i];
    if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
      throw DataError("sample " + std::to_string(i) + " out of range");
    }
  }
}

double ToneLevels::low_amplitude() const { return amplitude * std::pow(10.0, -twist_db / 40.0); }

double ToneLevels::high_amplitude() const { return amplitude * std::pow(10.0, twist_db / 40.0); }

void ToneLevels::validate() const {
  if (!std::isfinite(amplitude) || !std::isfinite(twist_db) || amplitude < 0.0) {
    throw ConfigError("tone amplitude must be finite and non-negative");
  }
  if (low_amplitude() + high_amplitude() > 1.0) {
    throw ConfigError("tone amplitude " + std::to_string(amplitude) + " with twist " +
                      std::to_string(twist_db) + " dB would clip");
  }
}

ToneOscillator::ToneOscillator(DtmfKey key, int rate_hz, ToneLevels levels, double freq_scale)
    : key_(key), low_amp_(levels.low_amplitude()), high_amp_(levels.high_amplitude()) {
  levels.validate();
  if (rate_hz < kMinRateHz) throw ConfigError("sample rate below 4000 Hz");
  const auto spec = tone_spec(key);
  low_step_ = 2.0 * std::numbers::pi * spec.low_hz * freq_scale / rate_hz;
  high_step_ = 2.0 * std::numbers::pi * spec.high_hz * freq_scale / rate_hz;
}

void ToneOscillator::generate(std::span<double> out) {
  for (double& s : out) {
    const auto n = static_cast<double>(n_++);
    s = low_amp_ * std::sin(low_step_ * n) + high_amp_ * std::sin(high_step_ * n);
  }
}

std::size_t samples_for_ms(double ms, int rate_hz) {
  return static_cast<std::size_t>(std::llround(ms * rate_hz / 1000.0));
}

SampleBuffer synthesize(DtmfKey key, double duration_ms, int rate_hz, ToneLevels levels) {
  if (!(duration_ms > 0.0)) throw ConfigError("tone duration must be positive");
  SampleBuffer out{rate_hz, std::vector<double>(samples_for_ms(duration_ms, rate_hz))};
  ToneOscillator osc(key, rate_hz, levels);
  osc.generate(out.samples);
  return out;
}

void KeyScript::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (!std::isfinite(ev.press_at_ms) || ev.press_at_ms < 0.0) {
      throw ConfigError("key event " + std::to_string(i) + ": press time must be >= 0");
    }
    if (!std::isfinite(ev.hold_ms) || ev.hold_ms <= 0.0) {
      throw ConfigError("key event " + std::to_string(i) + ": hold must be positive");
    }
    if (i > 0) {
      const auto& prev = events[i - 1];
      if (ev.press_at_ms <= prev.press_at_ms) {
        throw ConfigError("key event " + std::to_string(i) + ": presses must be strictly increasing");
      }
      if (prev.press_at_ms + prev.hold_ms > ev.press_at_ms) {
        throw ConfigError("key event " + std::to_string(i) + " overlaps the previous event");
      }
    }
  }
}

double KeyScript::end_ms() const {
  return events.empty() ? 0.0 : events.back().press_at_ms + events.back().hold_ms;
}

KeyScript make_script(std::string_view keys, double hold_ms, double gap_ms, double lead_ms) {
  KeyScript script;
  double t = lead_ms;
  for (char c : keys) {
    script.events.push_back({DtmfKey::parse(c), t, hold_ms});
    t += hold_ms + gap_ms;
  }
  script.validate();
  return script;
}

SampleBuffer render_script(const KeyScript& script, int rate_hz, ToneLevels levels,
                           double tail_ms) {
  script.validate();
  levels.validate();
  if (rate_hz < kMinRateHz) throw ConfigError("sample rate below 4000 Hz");
  if (tail_ms < 0.0) throw ConfigError("tail must be non-negative");

  SampleBuffer out{rate_hz, std::vector<double>(samples_for_ms(script.end_ms() + tail_ms, rate_hz))};
  for (const auto& ev : script.events) {
    const auto begin = std::min(samples_for_ms(ev.press_at_ms, rate_hz), out.size());
    const auto end = std::min(samples_for_ms(ev.press_at_ms + ev.hold_ms, rate_hz), out.size());
    const auto count = end > begin ? end - begin : 0;
    ToneOscillator osc(ev.key, rate_hz, levels);
    osc.generate(std::span<double>(out.samples).subspan(begin, count));
  }
  return out;
}

}  // namespace dtmfdrive::signal

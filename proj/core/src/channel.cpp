#include "dtmfdrive/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::channel {
namespace {

constexpr int kLanczosLobes = 8;
constexpr double kMinScale = 0.9;
constexpr double kMaxScale = 1.1;

double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

double lanczos(double x) {
  if (x == 0.0) return 1.0;
  if (std::abs(x) >= kLanczosLobes) return 0.0;
  const double px = std::numbers::pi * x;
  return kLanczosLobes * std::sin(px) * std::sin(px / kLanczosLobes) / (px * px);
}

// Reads the input at n * scale for each output index n.
std::vector<double> rescale_time(const std::vector<double>& in, double scale) {
  std::vector<double> out(in.size(), 0.0);
  const auto len = static_cast<std::int64_t>(in.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double t = static_cast<double>(n) * scale;
    const auto base = static_cast<std::int64_t>(std::floor(t));
    double acc = 0.0;
    for (std::int64_t k = base - kLanczosLobes + 1; k <= base + kLanczosLobes; ++k) {
      if (k < 0 || k >= len) continue;
      acc += in[static_cast<std::size_t>(k)] * lanczos(t - static_cast<double>(k));
    }
    out[n] = acc;
  }
  return out;
}

}  // namespace

bool ChannelConfig::is_clean() const {
  return gain_db == 0.0 && !snr_db && freq_scale == 1.0 && !interferer;
}

void ChannelConfig::validate() const {
  if (!std::isfinite(gain_db)) throw ConfigError("channel gain must be finite");
  if (snr_db && !std::isfinite(*snr_db)) throw ConfigError("channel SNR must be finite or clean");
  if (!(freq_scale >= kMinScale && freq_scale <= kMaxScale)) {
    throw ConfigError("freq_scale " + std::to_string(freq_scale) + " outside [0.9, 1.1]");
  }
  if (interferer && (!std::isfinite(interferer->freq_hz) || interferer->freq_hz <= 0.0 ||
                     !std::isfinite(interferer->level_db))) {
    throw ConfigError("interferer needs a positive frequency and finite level");
  }
}

signal::SampleBuffer apply(const signal::SampleBuffer& buffer, const ChannelConfig& cfg,
                           std::uint64_t seed) {
  cfg.validate();
  buffer.validate();
  if (cfg.is_clean()) return buffer;

  signal::SampleBuffer out{buffer.rate_hz, buffer.samples};
  if (cfg.gain_db != 0.0) {
    const double g = db_to_amplitude(cfg.gain_db);
    for (double& s : out.samples) s *= g;
  }

  // Active (non-silent) spans of the input, carried through the time map.
  std::vector<bool> active(out.size(), false);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const auto src = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.freq_scale));
    active[n] = src < buffer.size() && buffer.samples[src] != 0.0;
  }
  if (cfg.freq_scale != 1.0) out.samples = rescale_time(out.samples, cfg.freq_scale);

  double sigma = 0.0;
  if (cfg.snr_db) {
    double power = 0.0;
    std::size_t count = 0;
    for (std::size_t n = 0; n < out.size(); ++n) {
      if (!active[n]) continue;
      power += out.samples[n] * out.samples[n];
      ++count;
    }
    // With nothing to reference, fall back to the default dual tone.
    power = count > 0 ? power / static_cast<double>(count)
                      : signal::kDefaultToneAmplitude * signal::kDefaultToneAmplitude;
    sigma = std::sqrt(power / std::pow(10.0, *cfg.snr_db / 10.0));
  }

  if (cfg.interferer) {
    const double amp = db_to_amplitude(cfg.interferer->level_db);
    const double step = 2.0 * std::numbers::pi * cfg.interferer->freq_hz / buffer.rate_hz;
    for (std::size_t n = 0; n < out.size(); ++n) {
      out.samples[n] += amp * std::sin(step * static_cast<double>(n));
    }
  }
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& s : out.samples) s += sigma * normal(rng);
  }

  for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
  return out;
}

ChannelStream::ChannelStream(const ChannelConfig& cfg, int rate_hz, double reference_power,
                             std::uint64_t seed)
    : gain_(db_to_amplitude(cfg.gain_db)), rng_(seed) {
  cfg.validate();
  if (cfg.freq_scale != 1.0) {
    throw ConfigError("a streaming channel cannot rescale the time base");
  }
  if (cfg.snr_db) {
    const double p = reference_power * gain_ * gain_;
    noise_sigma_ = std::sqrt(p / std::pow(10.0, *cfg.snr_db / 10.0));
  }
  if (cfg.interferer) {
    interferer_amp_ = db_to_amplitude(cfg.interferer->level_db);
    interferer_step_ = 2.0 * std::numbers::pi * cfg.interferer->freq_hz / rate_hz;
  }
}

void ChannelStream::process(std::span<double> chunk) {
  for (double& s : chunk) {
    double v = s * gain_;
    if (interferer_amp_ != 0.0) v += interferer_amp_ * std::sin(interferer_step_ * static_cast<double>(n_));
    if (noise_sigma_ != 0.0) v += noise_sigma_ * normal_(rng_);
    s = std::clamp(v, -1.0, 1.0);
    ++n_;
  }
}

}  // namespace dtmfdrive::channel

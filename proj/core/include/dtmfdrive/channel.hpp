#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>

#include "dtmfdrive/signal.hpp"

namespace dtmfdrive::channel {

struct Interferer {
  double freq_hz = 0.0;
  double level_db = -20.0;  // amplitude relative to full scale
};

struct ChannelConfig {
  double gain_db = 0.0;
  std::optional<double> snr_db;  // empty = clean
  double freq_scale = 1.0;
  std::optional<Interferer> interferer;

  bool is_clean() const;
  // Throws ConfigError when freq_scale is outside [0.9, 1.1] or a value is
  // non-finite.
  void validate() const;
};

// Gain, time-base scaling (resampled back to the input rate, so length is
// preserved), an optional interfering sinusoid and white Gaussian noise.
// Noise power is referenced to the mean power of the non-silent samples.
// Deterministic for a fixed seed; the clean config returns the input
// unchanged.
signal::SampleBuffer apply(const signal::SampleBuffer& buffer, const ChannelConfig& cfg,
                           std::uint64_t seed);

// Causal, chunked form used by the tick loop. Time-base scaling needs
// unbounded lookahead on an open-ended stream, so freq_scale must be 1
// here; the session applies it at the oscillator instead. Noise is
// referenced to a fixed signal power supplied by the caller.
class ChannelStream {
 public:
  ChannelStream(const ChannelConfig& cfg, int rate_hz, double reference_power,
                std::uint64_t seed);

  void process(std::span<double> chunk);

 private:
  double gain_;
  double noise_sigma_ = 0.0;
  double interferer_amp_ = 0.0;
  double interferer_step_ = 0.0;
  std::int64_t n_ = 0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dtmfdrive::channel

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtmfdrive/signal.hpp"

namespace dtmfdrive::decoder {

enum class Profile { standard, paper_replication };

std::optional<Profile> parse_profile(std::string_view name);
std::string_view profile_name(Profile profile);

struct DetectorConfig {
  int rate_hz = signal::kDefaultRateHz;
  int window_samples = 102;
  int hop_samples = 51;
  // Largest accepted deviation below a nominal grid frequency, as a
  // fraction. Also the bound above nominal unless rel_freq_tolerance_above
  // is set.
  double rel_freq_tolerance = 0.02;
  std::optional<double> rel_freq_tolerance_above;
  double twist_limit_db = 8.0;
  double dominance_margin_db = 8.0;
  // Margin applied instead while the previous frame already reported the
  // same key (release hysteresis).
  double sustain_margin_db = 0.0;
  // Fraction of window energy the two fitted tones must jointly explain.
  double signal_floor = 0.5;
  // Per-tone amplitude floor (full scale = 1); stands in for the input
  // comparator hysteresis.
  double min_tone_amplitude = 0.01;

  // Window and hop keep their 8 kHz durations (12.75 ms / 6.375 ms) at
  // other rates.
  static DetectorConfig standard(int rate_hz = signal::kDefaultRateHz);
  // Accepts up to 6% below nominal (2% above), wide enough for the
  // bench-measured tone frequencies.
  static DetectorConfig paper_replication(int rate_hz = signal::kDefaultRateHz);
  static DetectorConfig for_profile(Profile profile, int rate_hz = signal::kDefaultRateHz);

  double tolerance_below() const { return rel_freq_tolerance; }
  double tolerance_above() const { return rel_freq_tolerance_above.value_or(rel_freq_tolerance); }
  double hop_ms() const { return 1000.0 * hop_samples / rate_hz; }
  double window_ms() const { return 1000.0 * window_samples / rate_hz; }
  void validate() const;
};

// Energy at each nominal grid frequency, scaled as 2|X(f)|^2 / N so a
// sinusoid of amplitude A centred in the window reports about A^2 N / 2,
// the same scale as the window's sum of squares.
struct BandEnergies {
  std::array<double, 4> low{};
  std::array<double, 4> high{};
};

BandEnergies band_energies(std::span<const double> window, const DetectorConfig& cfg);

// Single-frequency energy on the same scale as BandEnergies, via the
// Goertzel recurrence.
double goertzel_energy(std::span<const double> window, double freq_hz, int rate_hz);

struct GroupTone {
  double freq_hz = 0.0;
  double amplitude = 0.0;
  double energy = 0.0;  // sum of squares of the fitted sinusoid
};

// Everything classify() needs from one window: nominal band energies, the
// dominant tone of each group (frequency located by a coarse scan plus
// golden-section refinement, amplitudes by a joint least-squares fit), and
// the residual energy left at the nominal frequencies once both fitted
// tones are removed.
struct ToneAnalysis {
  BandEnergies nominal;
  double total_energy = 0.0;
  GroupTone low;
  GroupTone high;
  std::array<double, 4> residual_low{};
  std::array<double, 4> residual_high{};
};

ToneAnalysis analyze(std::span<const double> window, const DetectorConfig& cfg);

// Grid index whose tolerance band contains freq_hz, if any.
std::optional<int> match_grid(double freq_hz, std::span<const double, 4> grid,
                              const DetectorConfig& cfg);

// A key is reported iff each group's fitted tone lies in exactly one
// tolerance band, clears the amplitude floor and exceeds every residual
// nominal bin of its group by dominance_margin_db; the two tones jointly
// explain at least signal_floor of the window energy; and the level
// difference between them is within twist_limit_db. When `held` names the
// key reported for the previous window, that key only has to clear
// sustain_margin_db.
std::optional<signal::DtmfKey> classify(const ToneAnalysis& analysis, const DetectorConfig& cfg,
                                        std::optional<signal::DtmfKey> held = std::nullopt);

struct ToneFrame {
  double t_ms = 0.0;  // end of the analysed window
  bool est_active = false;
  std::optional<signal::DtmfKey> candidate;
  BandEnergies energies;
};

// Sliding-window detector over an open-ended stream. Emits one frame per
// hop once the first full window has been seen; each frame's candidate is
// classify() of its window with the previous frame's candidate as `held`.
class StreamDetector {
 public:
  explicit StreamDetector(DetectorConfig cfg);

  // Appends samples and returns the frames completed by them.
  std::vector<ToneFrame> push(std::span<const double> samples);
  const DetectorConfig& config() const { return cfg_; }

 private:
  DetectorConfig cfg_;
  std::vector<double> ring_;
  std::vector<double> linear_;
  std::size_t head_ = 0;
  std::size_t until_next_ = 0;
  std::int64_t consumed_ = 0;
  std::optional<signal::DtmfKey> held_;
};

// Throws DataError when the buffer is shorter than one window or its rate
// differs from the config.
std::vector<ToneFrame> stream_detect(const signal::SampleBuffer& buffer, const DetectorConfig& cfg);

}  // namespace dtmfdrive::decoder

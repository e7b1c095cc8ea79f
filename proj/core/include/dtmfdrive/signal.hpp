#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtmfdrive::signal {

inline constexpr std::array<double, 4> kLowGroupHz{697.0, 770.0, 852.0, 941.0};
inline constexpr std::array<double, 4> kHighGroupHz{1209.0, 1336.0, 1477.0, 1633.0};

inline constexpr int kDefaultRateHz = 8000;
inline constexpr int kMinRateHz = 4000;
inline constexpr double kDefaultToneAmplitude = 0.4;

// One of the 16 keypad symbols. Row selects the low-group tone, column the
// high-group tone:
//
//          1209  1336  1477  1633
//    697     1     2     3     A
//    770     4     5     6     B
//    852     7     8     9     C
//    941     *     0     #     D
class DtmfKey {
 public:
  static std::optional<DtmfKey> from_symbol(char symbol);
  // Throws ConfigError for symbols outside the keypad.
  static DtmfKey parse(char symbol);
  static constexpr DtmfKey at(int row, int column) {
    return DtmfKey(static_cast<std::uint8_t>(row * 4 + column));
  }
  static const std::array<DtmfKey, 16>& all();

  char symbol() const;
  constexpr int row() const { return index_ / 4; }
  constexpr int column() const { return index_ % 4; }
  constexpr int index() const { return index_; }

  friend constexpr bool operator==(DtmfKey, DtmfKey) = default;

 private:
  constexpr explicit DtmfKey(std::uint8_t index) : index_(index) {}
  std::uint8_t index_;
};

struct ToneSpec {
  double low_hz;
  double high_hz;
};

ToneSpec tone_spec(DtmfKey key);

// Mono audio. Samples are expected in [-1, 1].
struct SampleBuffer {
  int rate_hz = kDefaultRateHz;
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  double duration_ms() const;
  // Throws DataError when a sample is non-finite or out of range, or the
  // rate is below kMinRateHz.
  void validate() const;
};

// Per-tone amplitudes. twist_db is split evenly between the two tones so
// the high tone sits twist_db above the low tone and the mean level stays
// at `amplitude`.
struct ToneLevels {
  double amplitude = kDefaultToneAmplitude;
  double twist_db = 0.0;

  double low_amplitude() const;
  double high_amplitude() const;
  void validate() const;
};

// Phase-continuous dual-tone source. Phase is zero at the first sample
// after construction or restart(), so a key rendered in several chunks is
// sample-identical to one rendered in a single call.
class ToneOscillator {
 public:
  ToneOscillator(DtmfKey key, int rate_hz, ToneLevels levels, double freq_scale = 1.0);

  void restart() { n_ = 0; }
  void generate(std::span<double> out);
  DtmfKey key() const { return key_; }

 private:
  DtmfKey key_;
  double low_step_;
  double high_step_;
  double low_amp_;
  double high_amp_;
  std::int64_t n_ = 0;
};

std::size_t samples_for_ms(double ms, int rate_hz);

SampleBuffer synthesize(DtmfKey key, double duration_ms, int rate_hz = kDefaultRateHz,
                        ToneLevels levels = {});

struct KeyEvent {
  DtmfKey key;
  double press_at_ms;
  double hold_ms;
};

struct KeyScript {
  std::vector<KeyEvent> events;

  // Throws ConfigError on negative times, zero holds, unsorted or
  // overlapping events.
  void validate() const;
  double end_ms() const;
};

// Keys pressed in order with a fixed hold and gap; the first press is at
// lead_ms.
KeyScript make_script(std::string_view keys, double hold_ms, double gap_ms, double lead_ms = 0.0);

SampleBuffer render_script(const KeyScript& script, int rate_hz = kDefaultRateHz,
                           ToneLevels levels = {}, double tail_ms = 0.0);

}  // namespace dtmfdrive::signal

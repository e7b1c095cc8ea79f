#pragma once

#include <filesystem>
#include <string>

#include "dtmfdrive/error.hpp"
#include "dtmfdrive/signal.hpp"

namespace dtmfdrive::signal {

// 16-bit PCM mono RIFF/WAVE at 8000, 16000 or 44100 Hz.
class WavError : public DataError {
 public:
  enum class Kind {
    io,
    malformed_header,
    unsupported_encoding,
    unsupported_channel_count,
    unsupported_bit_depth,
    unsupported_sample_rate,
  };

  WavError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

bool is_supported_wav_rate(int rate_hz);

std::string encode_wav(const SampleBuffer& buffer);
SampleBuffer decode_wav(std::string_view bytes);

void write_wav(const std::filesystem::path& path, const SampleBuffer& buffer);
SampleBuffer read_wav(const std::filesystem::path& path);

}  // namespace dtmfdrive::signal

#include "dtmfdrive/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace dtmfdrive::signal {
namespace {

constexpr double kFullScale = 32767.0;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

std::uint32_t get_u32(std::string_view b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + static_cast<std::size_t>(i)]);
  return v;
}

[[noreturn]] void fail(WavError::Kind kind, const std::string& what) { throw WavError(kind, what); }

}  // namespace

bool is_supported_wav_rate(int rate_hz) {
  return rate_hz == 8000 || rate_hz == 16000 || rate_hz == 44100;
}

std::string encode_wav(const SampleBuffer& buffer) {
  if (!is_supported_wav_rate(buffer.rate_hz)) {
    fail(WavError::Kind::unsupported_sample_rate,
         "unsupported sample rate " + std::to_string(buffer.rate_hz));
  }
  buffer.validate();

  const auto data_bytes = static_cast<std::uint32_t>(buffer.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(buffer.rate_hz));
  put_u32(out, static_cast<std::uint32_t>(buffer.rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : buffer.samples) {
    const auto q = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * kFullScale));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

SampleBuffer decode_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    fail(WavError::Kind::malformed_header, "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const auto id = b.substr(pos, 4);
    const std::size_t size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > b.size()) fail(WavError::Kind::malformed_header, "truncated fmt chunk");
      const auto format = get_u16(b, body);
      const auto channels = get_u16(b, body + 2);
      rate = static_cast<int>(get_u32(b, body + 4));
      const auto bits = get_u16(b, body + 14);
      if (format != 1) fail(WavError::Kind::unsupported_encoding, "unsupported encoding (format " + std::to_string(format) + ")");
      if (channels != 1) fail(WavError::Kind::unsupported_channel_count, "unsupported channel count");
      if (bits != 16) fail(WavError::Kind::unsupported_bit_depth, "unsupported bit depth " + std::to_string(bits));
      if (!is_supported_wav_rate(rate)) fail(WavError::Kind::unsupported_sample_rate, "unsupported sample rate " + std::to_string(rate));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) fail(WavError::Kind::malformed_header, "data chunk before fmt chunk");
      if (body + size > b.size() || size % 2 != 0) fail(WavError::Kind::malformed_header, "truncated data chunk");
      SampleBuffer out{rate, std::vector<double>(size / 2)};
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto q = static_cast<std::int16_t>(get_u16(b, body + 2 * i));
        out.samples[i] = std::max(-1.0, q / kFullScale);
      }
      return out;
    }
    pos = body + size + (size & 1U);
  }
  fail(WavError::Kind::malformed_header, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

void write_wav(const std::filesystem::path& path, const SampleBuffer& buffer) {
  const auto bytes = encode_wav(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(WavError::Kind::io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(WavError::Kind::io, "write failed: " + path.string());
}

SampleBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(WavError::Kind::io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace dtmfdrive::signal

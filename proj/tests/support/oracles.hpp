#pragma once

// Independent reference computations and random generators shared by the
// unit and acceptance tests. Nothing here calls into the library's DSP or
// kinematics code.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;

// 2|X(f)|^2 / N with X(f) evaluated by direct cos/sin sums.
inline double dft_energy(std::span<const double> x, double freq_hz, int rate_hz) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double ph = 2.0 * kPi * freq_hz * static_cast<double>(n) / rate_hz;
    re += x[n] * std::cos(ph);
    im -= x[n] * std::sin(ph);
  }
  return 2.0 * (re * re + im * im) / static_cast<double>(x.size());
}

// Keypad layout and tone grid, written out from the standard DTMF table.
inline constexpr char kKeypad[4][4] = {
    {'1', '2', '3', 'A'}, {'4', '5', '6', 'B'}, {'7', '8', '9', 'C'}, {'*', '0', '#', 'D'}};
inline constexpr double kRowHz[4] = {697, 770, 852, 941};
inline constexpr double kColHz[4] = {1209, 1336, 1477, 1633};

struct Tones {
  double low;
  double high;
};

inline Tones tones_of(char key) {
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (kKeypad[r][c] == key) return {kRowHz[r], kColHz[c]};
    }
  }
  return {0, 0};
}

// MT8870 output word Q4..Q1 per key, from the device's function table.
inline int mt8870_code(char key) {
  switch (key) {
    case '1': return 0b0001;
    case '2': return 0b0010;
    case '3': return 0b0011;
    case '4': return 0b0100;
    case '5': return 0b0101;
    case '6': return 0b0110;
    case '7': return 0b0111;
    case '8': return 0b1000;
    case '9': return 0b1001;
    case '0': return 0b1010;
    case '*': return 0b1011;
    case '#': return 0b1100;
    case 'A': return 0b1101;
    case 'B': return 0b1110;
    case 'C': return 0b1111;
    case 'D': return 0b0000;
  }
  return -1;
}

// Ideal differential drive over `t` seconds with wheel speeds vl, vr and
// track width w, integrated in closed form.
struct Pose {
  double x;
  double y;
  double theta;
};

inline Pose arc(Pose p, double vl, double vr, double w, double t) {
  const double v = 0.5 * (vl + vr);
  const double omega = (vr - vl) / w;
  if (std::abs(omega) < 1e-15) {
    return {p.x + v * t * std::cos(p.theta), p.y + v * t * std::sin(p.theta), p.theta};
  }
  const double th = p.theta + omega * t;
  return {p.x + v / omega * (std::sin(th) - std::sin(p.theta)),
          p.y - v / omega * (std::cos(th) - std::cos(p.theta)), th};
}

inline double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

// Hand-rolled generators over a seeded engine.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  char key() { return "123A456B789C*0#D"[integer(0, 15)]; }

  std::string keys(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += key();
    return s;
  }

  std::vector<double> window(std::size_t n, double amplitude) {
    std::vector<double> w(n);
    for (auto& v : w) v = uniform(-amplitude, amplitude);
    return w;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle

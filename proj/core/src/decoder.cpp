#include "dtmfdrive/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "dtmfdrive/error.hpp"

namespace dtmfdrive::decoder {
namespace {

using signal::kHighGroupHz;
using signal::kLowGroupHz;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Golden-section refinement stops below this bracket width (Hz).
constexpr double kRefineResolutionHz = 0.01;

double omega_of(double freq_hz, int rate_hz) { return kTwoPi * freq_hz / rate_hz; }

// sum_{n<N} exp(i theta n)
std::complex<double> geometric_sum(double theta, std::size_t n) {
  const double half = 0.5 * theta;
  const double denom = std::sin(half);
  if (std::abs(denom) < 1e-12) return {static_cast<double>(n), 0.0};  // theta = 2 pi k
  const double mag = std::sin(half * static_cast<double>(n)) / denom;
  const double arg = half * static_cast<double>(n - 1);
  return {mag * std::cos(arg), mag * std::sin(arg)};
}

// Inner products of x with cos(w n) and sin(w n).
struct Projection {
  double c = 0.0;
  double s = 0.0;
};

Projection project(std::span<const double> x, double omega) {
  const double dc = std::cos(omega);
  const double ds = std::sin(omega);
  double re = 1.0;
  double im = 0.0;
  Projection p;
  for (double v : x) {
    p.c += v * re;
    p.s += v * im;
    const double next = re * dc - im * ds;
    im = im * dc + re * ds;
    re = next;
  }
  return p;
}

// Gram block between {cos(a n), sin(a n)} and {cos(b n), sin(b n)}:
// [cc cs; sc ss].
std::array<double, 4> gram_block(double a, double b, std::size_t n) {
  const auto diff = geometric_sum(a - b, n);
  const auto sum = geometric_sum(a + b, n);
  return {0.5 * (diff.real() + sum.real()), 0.5 * (sum.imag() - diff.imag()),
          0.5 * (sum.imag() + diff.imag()), 0.5 * (diff.real() - sum.real())};
}

struct SingleFit {
  double a = 0.0;  // cos coefficient
  double b = 0.0;  // sin coefficient
  double energy = 0.0;
};

SingleFit fit_single(std::span<const double> x, double omega) {
  const auto p = project(x, omega);
  const auto g = gram_block(omega, omega, x.size());
  const double det = g[0] * g[3] - g[1] * g[2];
  if (std::abs(det) < 1e-12) return {};
  SingleFit f;
  f.a = (g[3] * p.c - g[1] * p.s) / det;
  f.b = (g[0] * p.s - g[2] * p.c) / det;
  f.energy = std::max(0.0, f.a * p.c + f.b * p.s);
  return f;
}

void subtract_sinusoid(std::span<double> x, double omega, double a, double b) {
  const double dc = std::cos(omega);
  const double ds = std::sin(omega);
  double re = 1.0;
  double im = 0.0;
  for (double& v : x) {
    v -= a * re + b * im;
    const double next = re * dc - im * ds;
    im = im * dc + re * ds;
    re = next;
  }
}

struct Band {
  double lo_hz;
  double hi_hz;
};

Band search_band(std::span<const double, 4> grid, const DetectorConfig& cfg) {
  const double margin = std::max(0.10, std::max(cfg.tolerance_below(), cfg.tolerance_above()) + 0.02);
  return {grid.front() * (1.0 - margin), grid.back() * (1.0 + margin)};
}

double golden_max(std::span<const double> x, double lo, double hi, int rate_hz) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto energy = [&](double f) { return fit_single(x, omega_of(f, rate_hz)).energy; };
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = energy(c);
  double fd = energy(d);
  while (b - a > kRefineResolutionHz) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = energy(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = energy(d);
    }
  }
  return 0.5 * (a + b);
}

double coarse_step_hz(const DetectorConfig& cfg) {
  return static_cast<double>(cfg.rate_hz) / cfg.window_samples / 2.0;
}

// Frequency of the strongest single sinusoid within `band`.
double locate_peak(std::span<const double> x, Band band, const DetectorConfig& cfg) {
  const double step = coarse_step_hz(cfg);
  double best_f = band.lo_hz;
  double best_e = -1.0;
  for (double f = band.lo_hz; f <= band.hi_hz + 1e-9; f += step) {
    const double e = fit_single(x, omega_of(f, cfg.rate_hz)).energy;
    if (e > best_e) {
      best_e = e;
      best_f = f;
    }
  }
  return golden_max(x, std::max(band.lo_hz, best_f - step), std::min(band.hi_hz, best_f + step),
                    cfg.rate_hz);
}

double refine_peak(std::span<const double> x, double around, Band band, const DetectorConfig& cfg) {
  const double step = coarse_step_hz(cfg);
  return golden_max(x, std::max(band.lo_hz, around - step), std::min(band.hi_hz, around + step),
                    cfg.rate_hz);
}

// Solves the 4x4 normal equations in place (partial pivoting).
bool solve4(std::array<std::array<double, 4>, 4> m, std::array<double, 4>& rhs) {
  for (std::size_t col = 0; col < 4; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (std::abs(m[piv][col]) < 1e-12) return false;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < 4; ++r) {
      const double k = m[r][col] / m[col][col];
      for (std::size_t c = col; c < 4; ++c) m[r][c] -= k * m[col][c];
      rhs[r] -= k * rhs[col];
    }
  }
  for (std::size_t i = 4; i-- > 0;) {
    double acc = rhs[i];
    for (std::size_t c = i + 1; c < 4; ++c) acc -= m[i][c] * rhs[c];
    rhs[i] = acc / m[i][i];
  }
  return true;
}

}  // namespace

std::optional<Profile> parse_profile(std::string_view name) {
  if (name == "standard") return Profile::standard;
  if (name == "paper-replication" || name == "paper_replication") return Profile::paper_replication;
  return std::nullopt;
}

std::string_view profile_name(Profile profile) {
  return profile == Profile::standard ? "standard" : "paper-replication";
}

DetectorConfig DetectorConfig::standard(int rate_hz) {
  DetectorConfig cfg;
  cfg.rate_hz = rate_hz;
  cfg.window_samples = static_cast<int>(std::lround(102.0 * rate_hz / 8000.0));
  cfg.hop_samples = cfg.window_samples / 2;
  return cfg;
}

DetectorConfig DetectorConfig::paper_replication(int rate_hz) {
  auto cfg = standard(rate_hz);
  cfg.rel_freq_tolerance = 0.06;
  cfg.rel_freq_tolerance_above = 0.02;
  return cfg;
}

DetectorConfig DetectorConfig::for_profile(Profile profile, int rate_hz) {
  return profile == Profile::standard ? standard(rate_hz) : paper_replication(rate_hz);
}

void DetectorConfig::validate() const {
  if (rate_hz < signal::kMinRateHz) throw ConfigError("detector rate below 4000 Hz");
  if (window_samples < 64) throw ConfigError("detector window must be at least 64 samples");
  if (hop_samples <= 0 || hop_samples > window_samples) {
    throw ConfigError("detector hop must be in [1, window_samples]");
  }
  auto tol_ok = [](double t) { return std::isfinite(t) && t > 0.0 && t <= 0.08; };
  if (!tol_ok(rel_freq_tolerance) || !tol_ok(tolerance_above())) {
    throw ConfigError("frequency tolerance must be in (0, 0.08]");
  }
  if (!(twist_limit_db >= 0.0) || !(dominance_margin_db >= 0.0) || !(sustain_margin_db >= 0.0)) {
    throw ConfigError("twist limit and dominance margins must be non-negative");
  }
  if (!(signal_floor > 0.0 && signal_floor <= 1.0)) throw ConfigError("signal floor must be in (0, 1]");
  if (!(min_tone_amplitude >= 0.0)) throw ConfigError("minimum tone amplitude must be non-negative");
}

double goertzel_energy(std::span<const double> window, double freq_hz, int rate_hz) {
  const double w = omega_of(freq_hz, rate_hz);
  const double coeff = 2.0 * std::cos(w);
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : window) {
    const double s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  // |X|^2 with X = sum x[n] e^{-i w n}
  const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
  return window.empty() ? 0.0 : 2.0 * std::max(0.0, power) / static_cast<double>(window.size());
}

BandEnergies band_energies(std::span<const double> window, const DetectorConfig& cfg) {
  if (window.size() != static_cast<std::size_t>(cfg.window_samples)) {
    throw DataError("window has " + std::to_string(window.size()) + " samples, expected " +
                    std::to_string(cfg.window_samples));
  }
  BandEnergies e;
  for (std::size_t i = 0; i < 4; ++i) {
    e.low[i] = goertzel_energy(window, kLowGroupHz[i], cfg.rate_hz);
    e.high[i] = goertzel_energy(window, kHighGroupHz[i], cfg.rate_hz);
  }
  return e;
}

ToneAnalysis analyze(std::span<const double> window, const DetectorConfig& cfg) {
  ToneAnalysis out;
  out.nominal = band_energies(window, cfg);
  for (double v : window) out.total_energy += v * v;
  if (out.total_energy <= 0.0) return out;

  const Band low_band = search_band(kLowGroupHz, cfg);
  const Band high_band = search_band(kHighGroupHz, cfg);
  const int rate = cfg.rate_hz;

  double f_low = locate_peak(window, low_band, cfg);
  double f_high = locate_peak(window, high_band, cfg);

  // One decoupling pass: refine each tone with the other one removed.
  std::vector<double> work(window.begin(), window.end());
  {
    const auto hf = fit_single(window, omega_of(f_high, rate));
    subtract_sinusoid(work, omega_of(f_high, rate), hf.a, hf.b);
    f_low = refine_peak(work, f_low, low_band, cfg);
    std::copy(window.begin(), window.end(), work.begin());
    const auto lf = fit_single(window, omega_of(f_low, rate));
    subtract_sinusoid(work, omega_of(f_low, rate), lf.a, lf.b);
    f_high = refine_peak(work, f_high, high_band, cfg);
  }

  const double wl = omega_of(f_low, rate);
  const double wh = omega_of(f_high, rate);
  const std::size_t n = window.size();
  const auto gll = gram_block(wl, wl, n);
  const auto glh = gram_block(wl, wh, n);
  const auto ghh = gram_block(wh, wh, n);
  const std::array<std::array<double, 4>, 4> gram{{
      {gll[0], gll[1], glh[0], glh[1]},
      {gll[2], gll[3], glh[2], glh[3]},
      {glh[0], glh[2], ghh[0], ghh[1]},
      {glh[1], glh[3], ghh[2], ghh[3]},
  }};
  const auto pl = project(window, wl);
  const auto ph = project(window, wh);
  std::array<double, 4> coef{pl.c, pl.s, ph.c, ph.s};
  if (!solve4(gram, coef)) return out;

  auto block_energy = [](const std::array<double, 4>& g, double a, double b) {
    return std::max(0.0, a * a * g[0] + a * b * (g[1] + g[2]) + b * b * g[3]);
  };
  out.low = {f_low, std::hypot(coef[0], coef[1]), block_energy(gll, coef[0], coef[1])};
  out.high = {f_high, std::hypot(coef[2], coef[3]), block_energy(ghh, coef[2], coef[3])};

  std::copy(window.begin(), window.end(), work.begin());
  subtract_sinusoid(work, wl, coef[0], coef[1]);
  subtract_sinusoid(work, wh, coef[2], coef[3]);
  for (std::size_t i = 0; i < 4; ++i) {
    out.residual_low[i] = goertzel_energy(work, kLowGroupHz[i], rate);
    out.residual_high[i] = goertzel_energy(work, kHighGroupHz[i], rate);
  }
  return out;
}

std::optional<int> match_grid(double freq_hz, std::span<const double, 4> grid,
                              const DetectorConfig& cfg) {
  std::optional<int> found;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double lo = grid[i] * (1.0 - cfg.tolerance_below());
    const double hi = grid[i] * (1.0 + cfg.tolerance_above());
    if (freq_hz >= lo && freq_hz <= hi) {
      if (found) return std::nullopt;
      found = static_cast<int>(i);
    }
  }
  return found;
}

std::optional<signal::DtmfKey> classify(const ToneAnalysis& a, const DetectorConfig& cfg,
                                        std::optional<signal::DtmfKey> held) {
  if (!(a.total_energy > 0.0)) return std::nullopt;
  if (a.low.amplitude < cfg.min_tone_amplitude || a.high.amplitude < cfg.min_tone_amplitude) {
    return std::nullopt;
  }
  if (!(a.low.energy > 0.0) || !(a.high.energy > 0.0)) return std::nullopt;

  const auto row = match_grid(a.low.freq_hz, kLowGroupHz, cfg);
  const auto col = match_grid(a.high.freq_hz, kHighGroupHz, cfg);
  if (!row || !col) return std::nullopt;

  const auto key = signal::DtmfKey::at(*row, *col);
  const double margin_db = held == key ? cfg.sustain_margin_db : cfg.dominance_margin_db;
  const double margin = std::pow(10.0, margin_db / 10.0);
  const double low_runner = *std::max_element(a.residual_low.begin(), a.residual_low.end());
  const double high_runner = *std::max_element(a.residual_high.begin(), a.residual_high.end());
  if (a.low.energy < margin * low_runner || a.high.energy < margin * high_runner) return std::nullopt;

  if (a.low.energy + a.high.energy < cfg.signal_floor * a.total_energy) return std::nullopt;

  const double twist_db = 10.0 * std::log10(a.high.energy / a.low.energy);
  if (std::abs(twist_db) > cfg.twist_limit_db) return std::nullopt;

  return key;
}

StreamDetector::StreamDetector(DetectorConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  ring_.assign(static_cast<std::size_t>(cfg_.window_samples), 0.0);
  linear_.resize(ring_.size());
  until_next_ = ring_.size();
}

std::vector<ToneFrame> StreamDetector::push(std::span<const double> samples) {
  std::vector<ToneFrame> frames;
  for (double s : samples) {
    ring_[head_] = s;
    head_ = (head_ + 1) % ring_.size();
    ++consumed_;
    if (--until_next_ > 0) continue;
    until_next_ = static_cast<std::size_t>(cfg_.hop_samples);

    std::rotate_copy(ring_.begin(), ring_.begin() + static_cast<std::ptrdiff_t>(head_), ring_.end(),
                     linear_.begin());
    const auto analysis = analyze(linear_, cfg_);
    ToneFrame frame;
    frame.t_ms = 1000.0 * static_cast<double>(consumed_) / cfg_.rate_hz;
    frame.candidate = classify(analysis, cfg_, held_);
    held_ = frame.candidate;
    frame.est_active = frame.candidate.has_value();
    frame.energies = analysis.nominal;
    frames.push_back(frame);
  }
  return frames;
}

std::vector<ToneFrame> stream_detect(const signal::SampleBuffer& buffer, const DetectorConfig& cfg) {
  cfg.validate();
  if (buffer.rate_hz != cfg.rate_hz) {
    throw DataError("buffer rate " + std::to_string(buffer.rate_hz) + " Hz does not match detector rate " +
                    std::to_string(cfg.rate_hz) + " Hz");
  }
  if (buffer.size() < static_cast<std::size_t>(cfg.window_samples)) {
    throw DataError("buffer is shorter than one detector window");
  }
  StreamDetector det(cfg);
  return det.push(buffer.samples);
}

}  // namespace dtmfdrive::decoder

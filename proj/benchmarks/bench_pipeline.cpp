#include <benchmark/benchmark.h>

#include <random>

#include "dtmfdrive/channel.hpp"
#include "dtmfdrive/decoder.hpp"
#include "dtmfdrive/session.hpp"
#include "dtmfdrive/steering.hpp"

using namespace dtmfdrive;

namespace {

std::vector<double> noisy_key_window() {
  auto w = signal::synthesize(signal::DtmfKey::parse('5'), 12.75).samples;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.04);
  for (double& v : w) v += n(rng);
  return w;
}

void BM_BandEnergies(benchmark::State& state) {
  const auto cfg = decoder::DetectorConfig::standard();
  const auto w = noisy_key_window();
  for (auto _ : state) benchmark::DoNotOptimize(decoder::band_energies(w, cfg));
}
BENCHMARK(BM_BandEnergies);

void BM_Analyze(benchmark::State& state) {
  const auto cfg = decoder::DetectorConfig::standard();
  const auto w = noisy_key_window();
  for (auto _ : state) benchmark::DoNotOptimize(decoder::analyze(w, cfg));
}
BENCHMARK(BM_Analyze);

// One second of keyed audio through detector and steering.
void BM_DecodeSecond(benchmark::State& state) {
  const auto cfg = decoder::DetectorConfig::standard();
  auto buf = signal::render_script(signal::make_script("24685", 100, 100), 8000, {}, 100);
  channel::ChannelConfig ch;
  ch.snr_db = 20.0;
  buf = channel::apply(buf, ch, 3);
  for (auto _ : state) {
    const auto frames = decoder::stream_detect(buf, cfg);
    benchmark::DoNotOptimize(steering::run(frames, {}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(buf.size()));
}
BENCHMARK(BM_DecodeSecond)->Unit(benchmark::kMillisecond);

void BM_RunScenario(benchmark::State& state) {
  session::Scenario s;
  s.script = signal::make_script("2465", 150, 100, 10);
  s.duration_ms = 1200;
  for (auto _ : state) benchmark::DoNotOptimize(session::run_scenario(s));
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

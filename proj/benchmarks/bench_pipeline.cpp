#include <benchmark/benchmark.h>

#include <vector>

#include "sipmlink/experiments.hpp"

using namespace sipmlink;

namespace {

constexpr std::size_t kChunk = 1 << 14;

void BM_RequiredLambdaS(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(required_lambda_s(0.048, 1e-3));
}
BENCHMARK(BM_RequiredLambdaS);

void BM_Pe(benchmark::State& state) {
  const PhotonBudget b{9.32, 0.048};
  for (auto _ : state) benchmark::DoNotOptimize(pe(b, 1));
}
BENCHMARK(BM_Pe);

void BM_PulseSynthesis(benchmark::State& state) {
  const auto p = SiPMParams::calibrated();
  const double rate = static_cast<double>(state.range(0));
  const double duration = 1e-3;
  const auto ev = homogeneous_poisson(rate, duration, RngSeed{1});
  std::vector<double> buf(kChunk);
  for (auto _ : state) {
    PulseSynthesizer synth(ev.times, PulseTemplate(p), 1e9, {p.amplitude_spread, RngSeed{1}});
    for (std::size_t done = 0; done < 1000000; done += kChunk) synth.generate(buf);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000000);
}
BENCHMARK(BM_PulseSynthesis)->Arg(30000)->Arg(10000000);

void BM_LowPass(benchmark::State& state) {
  OnePoleLowPass lpf(400e6, 1e9);
  std::vector<double> buf(kChunk, 1e-4);
  for (auto _ : state) {
    lpf.process(buf, 180.0);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * kChunk);
}
BENCHMARK(BM_LowPass);

void BM_Noise(benchmark::State& state) {
  Rng rng(RngSeed{1}, StreamId::kNoise);
  std::vector<double> buf(kChunk, 0.0);
  for (auto _ : state) {
    rng.add_normal(buf, 1e-3);
    benchmark::DoNotOptimize(buf.data());
  }
  state.SetItemsProcessed(state.iterations() * kChunk);
}
BENCHMARK(BM_Noise);

void BM_DarkCountPipeline(benchmark::State& state) {
  auto cfg = LinkConfig::experimental();
  for (auto _ : state) benchmark::DoNotOptimize(measure_count_rate(cfg, 0.0, 1e-3));
  state.SetItemsProcessed(state.iterations() * 1000000);
}
BENCHMARK(BM_DarkCountPipeline)->Unit(benchmark::kMillisecond);

void BM_IdealCountsLink(benchmark::State& state) {
  LinkConfig cfg;
  cfg.link.avg_optical_power = dbm_to_watts(-74.0);
  cfg.n_bits = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_link(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.n_bits);
}
BENCHMARK(BM_IdealCountsLink)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

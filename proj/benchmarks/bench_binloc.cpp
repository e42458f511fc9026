#include <benchmark/benchmark.h>

#include <filesystem>

#include "binloc/datagen.hpp"
#include "binloc/dprtf.hpp"
#include "binloc/estimators.hpp"
#include "binloc/hrir.hpp"
#include "binloc/rng.hpp"
#include "binloc/roomsim.hpp"
#include "binloc/signals.hpp"

using namespace binloc;

namespace {

const StftConfig kStft{};

MultiSignal noise(std::size_t channels, std::size_t len, std::uint64_t seed) {
  Rng rng(seed);
  MultiSignal x(channels, Signal(len));
  for (auto& ch : x)
    for (double& v : ch) v = rng.gaussian();
  return x;
}

const HrirSet& head() {
  static const HrirSet set = synth_spherical_head({}, DoaGrid::full_circle(5.0));
  return set;
}

const Dictionary& dict() {
  static const Dictionary d = build_dictionary(head(), DoaGrid::standard(), kStft);
  return d;
}

RoomConfig room(double rt60) {
  RoomConfig rc;
  rc.dimensions = {5.0, 7.0, 3.0};
  rc.array_center = {2.5, 3.5, 1.5};
  rc.rt60 = rt60;
  return rc;
}

void BM_StftForward(benchmark::State& state) {
  const auto x = noise(2, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(stft_forward(x, kStft));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StftForward)->Arg(8192)->Arg(160000);

void BM_StftRoundTrip(benchmark::State& state) {
  const auto x = noise(2, 8192, 2);
  for (auto _ : state) benchmark::DoNotOptimize(stft_inverse(stft_forward(x, kStft)));
}
BENCHMARK(BM_StftRoundTrip);

void BM_EstimateDprtfCpsd(benchmark::State& state) {
  const auto spec = select_band(stft_forward(noise(2, 8192, 3), kStft));
  for (auto _ : state) {
    const auto mask = vad_mask(spec);
    benchmark::DoNotOptimize(estimate_dprtf_cpsd(spec, &mask));
  }
}
BENCHMARK(BM_EstimateDprtfCpsd);

void BM_GccPhat(benchmark::State& state) {
  const auto x = noise(2, 8192, 4);
  for (auto _ : state) benchmark::DoNotOptimize(gcc_phat(x[0], x[1], 16));
}
BENCHMARK(BM_GccPhat);

void BM_MatchDoa(benchmark::State& state) {
  const auto& d = dict();
  const DpRtfVec probe = d.entry(35.0);
  for (auto _ : state) benchmark::DoNotOptimize(match_doa(probe, d));
}
BENCHMARK(BM_MatchDoa);

void BM_BuildDictionary(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(build_dictionary(head(), DoaGrid::standard(), kStft));
}
BENCHMARK(BM_BuildDictionary)->Unit(benchmark::kMillisecond);

void BM_SimulateBrir(benchmark::State& state) {
  const auto rc = room(static_cast<double>(state.range(0)) / 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_brir(rc, 30.0, 1.5, head()));
}
BENCHMARK(BM_SimulateBrir)->Arg(3)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

void BM_RenderSource(benchmark::State& state) {
  const auto brir = simulate_brir(room(0.6), 30.0, 1.5, head());
  const auto src = synth_speech_like(8192, 16000.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(render_source(brir, src));
}
BENCHMARK(BM_RenderSource)->Unit(benchmark::kMillisecond);

void BM_DiffuseNoise(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        generate_diffuse_noise(8192, 0.157, {NoiseKind::kBabble, ++seed}, kStft));
}
BENCHMARK(BM_DiffuseNoise);

void BM_GenerateDataset(benchmark::State& state) {
  auto cfg = default_gen_config();
  for (auto& [name, split] : cfg.splits) split.count = name == "test" ? 10 : 0;
  std::erase_if(cfg.splits, [](const auto& s) { return s.second.count == 0; });
  const auto dir = std::filesystem::temp_directory_path() / "binloc-bench-dataset";
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_dataset(cfg, dir, 1));
  }
  std::filesystem::remove_all(dir);
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_GenerateDataset)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace

BENCHMARK_MAIN();

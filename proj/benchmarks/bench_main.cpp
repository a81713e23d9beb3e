#include <benchmark/benchmark.h>

#include "tracefail/alignment.hpp"
#include "tracefail/clustering.hpp"
#include "tracefail/detector.hpp"
#include "tracefail/rng.hpp"
#include "tracefail/vmm.hpp"

namespace {

using namespace tracefail;

SymbolSequence random_sequence(std::size_t n, std::uint32_t d, std::uint64_t seed) {
  Rng rng(seed);
  SymbolSequence s{"s" + std::to_string(seed), {}};
  for (std::size_t i = 0; i < n; ++i) s.symbols.push_back(Symbol{static_cast<std::uint32_t>(rng.below(d))});
  return s;
}

// Mostly shared skeleton with sparse edits, like real trace pairs.
std::vector<SymbolSequence> noisy_copies(std::size_t count, std::size_t n, std::uint32_t d, std::uint64_t seed) {
  const auto base = random_sequence(n, d, seed);
  Rng rng(seed + 1);
  std::vector<SymbolSequence> out;
  for (std::size_t c = 0; c < count; ++c) {
    SymbolSequence s{"t" + std::to_string(c), {}};
    for (const auto sym : base.symbols) {
      if (rng.bernoulli(0.03)) continue;
      s.symbols.push_back(sym);
      if (rng.bernoulli(0.03)) s.symbols.push_back(Symbol{static_cast<std::uint32_t>(rng.below(d))});
    }
    out.push_back(std::move(s));
  }
  return out;
}

void BM_LcsLength(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_sequence(n, 50, 1);
  const auto b = random_sequence(n, 50, 2);
  for (auto _ : state) benchmark::DoNotOptimize(lcs_length(a.span(), b.span()));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LcsLength)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_Diff(benchmark::State& state) {
  const auto pair = noisy_copies(2, static_cast<std::size_t>(state.range(0)), 50, 3);
  for (auto _ : state) benchmark::DoNotOptimize(diff(pair[0], pair[1]));
}
BENCHMARK(BM_Diff)->RangeMultiplier(2)->Range(64, 1024);

void BM_VmmTrain(benchmark::State& state) {
  const auto pool = noisy_copies(20, static_cast<std::size_t>(state.range(0)), 50, 4);
  for (auto _ : state) benchmark::DoNotOptimize(VmmModel::train(pool, 50, 5));
}
BENCHMARK(BM_VmmTrain)->Arg(100)->Arg(300);

void BM_VmmProb(benchmark::State& state) {
  const auto pool = noisy_copies(20, 300, 50, 5);
  const auto model = VmmModel::train(pool, 50, 5);
  const auto& probe = pool[3];
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t at = 1 + i++ % (probe.size() - 1);
    benchmark::DoNotOptimize(model.prob(probe.span().first(at), probe.symbols[at]));
  }
}
BENCHMARK(BM_VmmProb);

void BM_AnalyzeExperiment(benchmark::State& state) {
  const auto pool = noisy_copies(21, static_cast<std::size_t>(state.range(0)), 50, 6);
  const std::vector<SymbolSequence> training(pool.begin(), pool.begin() + 20);
  const CampaignAnalyzer analyzer(training, 50, Thresholds{}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(analyzer.analyze(pool[20]));
}
BENCHMARK(BM_AnalyzeExperiment)->Arg(100)->Arg(300);

void BM_KMedoids(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  std::vector<FeatureVector> vectors;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector v{std::to_string(i), std::vector<double>(40, 0.0)};
    v.values[i % 4] = 5.0;
    for (auto& x : v.values) x += rng.uniform01();
    vectors.push_back(std::move(v));
  }
  const DistanceMatrix dist(vectors);
  for (auto _ : state) benchmark::DoNotOptimize(kmedoids(dist, 4, 1));
}
BENCHMARK(BM_KMedoids)->Arg(100)->Arg(500);

}  // namespace
BENCHMARK_MAIN();

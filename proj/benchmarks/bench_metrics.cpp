#include <benchmark/benchmark.h>

#include <vector>

#include "iconometer/correlation.hpp"
#include "iconometer/embedding.hpp"
#include "iconometer/pipeline.hpp"
#include "iconometer/random.hpp"
#include "iconometer/realization.hpp"

using namespace iconometer;

namespace {

EmbeddingMatrix random_rows(Rng& rng, std::size_t rows, std::size_t dim, EmbeddingKind kind) {
  std::vector<float> data(rows * dim);
  for (float& x : data) x = static_cast<float>(2.0 * uniform_unit(rng) - 1.0);
  return EmbeddingMatrix::normalized(rows, dim, std::move(data), kind);
}

}  // namespace

static void BM_MaxSimilarity(benchmark::State& state) {
  Rng rng(1);
  const auto bank = random_rows(rng, static_cast<std::size_t>(state.range(0)), 768, EmbeddingKind::kGlobal);
  const auto query = random_rows(rng, 1, 768, EmbeddingKind::kGlobal);
  for (auto _ : state) benchmark::DoNotOptimize(max_similarity(query.row(0), bank));
}
BENCHMARK(BM_MaxSimilarity)->Arg(1)->Arg(5)->Arg(20);

// One generated image against the bank of a reference with `range` images.
static void BM_PatchReuse(benchmark::State& state) {
  Rng rng(2);
  const auto gen = random_rows(rng, 16, 384, EmbeddingKind::kPatch);
  const auto bank = random_rows(rng, 16 * static_cast<std::size_t>(state.range(0)), 384, EmbeddingKind::kPatch);
  const Thresholds t;
  for (auto _ : state) benchmark::DoNotOptimize(patch_reuse(gen, bank, t));
}
BENCHMARK(BM_PatchReuse)->Arg(1)->Arg(4)->Arg(16);

static void BM_SpearmanPermutations(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = uniform_unit(rng);
    y[i] = x[i] + uniform_unit(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(spearman(x, y, 10000, 42));
}
BENCHMARK(BM_SpearmanPermutations)->Arg(50)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_CoherenceFilter(benchmark::State& state) {
  Rng rng(4);
  const auto candidates = random_rows(rng, static_cast<std::size_t>(state.range(0)), 768, EmbeddingKind::kGlobal);
  Thresholds t;
  t.tau_coherence = 0.01;
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(coherence_filter(candidates, t));
    } catch (const std::exception&) {
    }
  }
}
BENCHMARK(BM_CoherenceFilter)->Arg(4)->Arg(16);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <vector>

#include "readtrace/random.hpp"
#include "readtrace/study.hpp"

using namespace readtrace;

static void BM_AssignBatch(benchmark::State& state) {
  Rng rng(6);
  std::vector<std::size_t> words;
  for (std::int64_t i = 0; i < state.range(0); ++i) words.push_back(80 + rng.below(500));
  CorpusState corpus(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) corpus.completed[i] = static_cast<std::uint32_t>(rng.below(3));
  const StudyConfig config;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(assign_batch(words, corpus, config, seed++));
}
BENCHMARK(BM_AssignBatch)->Arg(200)->Arg(5000);

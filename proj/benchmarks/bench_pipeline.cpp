#include <benchmark/benchmark.h>

#include "readtrace/gaze.hpp"
#include "readtrace/metrics.hpp"
#include "synthetic.hpp"

using namespace readtrace;

static void BM_Consolidate(benchmark::State& state) {
  Rng rng(1);
  const TokenizedStimulus s = bench::stimulus(rng, 40, static_cast<std::size_t>(state.range(0)));
  const auto events = bench::sweep(s, rng);
  for (auto _ : state) benchmark::DoNotOptimize(consolidate(events, s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_Consolidate)->Arg(100)->Arg(400)->Arg(1600);

static void BM_ZscoreBins(benchmark::State& state) {
  Rng rng(2);
  DurationVector d;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    d.totals.push_back(rng.below(4) == 0 ? 0 : 160 + static_cast<std::int64_t>(rng.below(4000)));
  }
  for (auto _ : state) benchmark::DoNotOptimize(zscore_bins(d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ZscoreBins)->Arg(300)->Arg(3000);

static void BM_AnalyzeTrial(benchmark::State& state) {
  Rng rng(3);
  const TokenizedStimulus s = bench::stimulus(rng, 40, 140);
  TrialRecord t;
  t.stimulus_id = s.id();
  t.events = bench::sweep(s, rng);
  t.choice = Choice::ResponseA;
  t.rationale = Rationale::MoreHelpful;
  for (auto _ : state) benchmark::DoNotOptimize(analyze_trial(t, s));
}
BENCHMARK(BM_AnalyzeTrial);

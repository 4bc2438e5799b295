#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "readtrace/distributions.hpp"
#include "readtrace/random.hpp"
#include "readtrace/stats.hpp"

using namespace readtrace;

static void BM_KrippendorffAlpha(benchmark::State& state) {
  Rng rng(4);
  stats::LabelMatrix m;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    m.items.push_back({static_cast<int>(rng.below(2)), static_cast<int>(rng.below(2)),
                       rng.below(10) == 0 ? std::nullopt : std::optional<int>(static_cast<int>(rng.below(2)))});
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::krippendorff_alpha(m));
}
BENCHMARK(BM_KrippendorffAlpha)->Arg(100)->Arg(10000);

static void BM_ChiSquareSf(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::chi_square_sf(x, 4.0));
    x = x < 40.0 ? x + 0.37 : 0.1;
  }
}
BENCHMARK(BM_ChiSquareSf);

static void BM_StudentT(benchmark::State& state) {
  double t = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::student_t_two_sided(t, 57.0));
    t = t < 8.0 ? t + 0.13 : 0.1;
  }
}
BENCHMARK(BM_StudentT);

static void BM_TTestIndependent(benchmark::State& state) {
  Rng rng(5);
  std::vector<double> a, b;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    a.push_back(rng.uniform(0, 10));
    b.push_back(rng.uniform(1, 11));
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::t_test_independent(a, b));
}
BENCHMARK(BM_TTestIndependent)->Arg(100)->Arg(10000);

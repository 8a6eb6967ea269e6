// Serial reference vs OpenMP kernel evaluation. Set OMP_NUM_THREADS to compare thread counts.
#include <benchmark/benchmark.h>

#include "robloc/distmodel.hpp"
#include "robloc/kernels.hpp"

using namespace robloc;

namespace {

SortedSample sample(std::size_t n) {
  auto sv = draw_sample(DistributionSpec::make(Family::exponential, 1, 1), n, SampleMode::quasi);
  return SortedSample::from_sorted(std::move(sv.values));
}

KernelSpec exact_spec() {
  KernelSpec ks;
  ks.k = 2;
  ks.mode = KernelMode::exact;
  return ks;
}

KernelSpec bootstrap_spec(double k) {
  KernelSpec ks;
  ks.k = k;
  ks.mode = KernelMode::bootstrap;
  ks.budget = 1000000;
  ks.seed = 3;
  return ks;
}

template <class F>
void run(benchmark::State& st, const KernelSpec& ks, F f) {
  auto s = sample(static_cast<std::size_t>(st.range(0)));
  std::size_t m = 0;
  for (auto _ : st) {
    auto v = f(s, ks);
    m = v.size();
    benchmark::DoNotOptimize(v.data());
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(st.iterations() * m));
}

void BM_ExactSerial(benchmark::State& st) { run(st, exact_spec(), serial::kernel_values); }
void BM_ExactParallel(benchmark::State& st) { run(st, exact_spec(), kernel_values); }
void BM_BootstrapSerial(benchmark::State& st) { run(st, bootstrap_spec(5.19), serial::kernel_values); }
void BM_BootstrapParallel(benchmark::State& st) { run(st, bootstrap_spec(5.19), kernel_values); }

}  // namespace

BENCHMARK(BM_ExactSerial)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExactParallel)->Arg(1000)->Arg(3000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

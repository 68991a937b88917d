#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "hurdlerank/baselines.hpp"
#include "hurdlerank/simgen.hpp"
#include "hurdlerank/solver.hpp"

namespace hr = hurdlerank;

namespace {

void BM_LossEval(benchmark::State& state) {
  const hr::LossSpec spec{static_cast<hr::LossKind>(state.range(0))};
  const double a = spec.kind == hr::LossKind::logistic ? 1.0 : 3.0;
  double z = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hr::loss_eval(spec, z, a));
    benchmark::DoNotOptimize(hr::loss_deriv(spec, z, a));
    z = z > 2.0 ? 0.1 : z + 1e-3;
  }
}
BENCHMARK(BM_LossEval)->DenseRange(0, 3)->ArgName("kind");

hr::DataTable zero_inflated_table(std::size_t n, std::size_t p) {
  const auto rates = hr::default_zero_rates(p);
  hr::DataTable t;
  t.values = hr::simulate_zero_inflated(1, n, p, 4, rates, 6.0);
  hr::HurdleSpec h;
  h.g_loss = hr::LossSpec{hr::LossKind::truncated_poisson};
  for (std::size_t j = 0; j < p; ++j) t.columns.push_back(hr::ColumnSpec{"v" + std::to_string(j + 1), h});
  return hr::calibrate(std::move(t));
}

void BM_HurdleSweep(benchmark::State& state) {
  const auto t = zero_inflated_table(static_cast<std::size_t>(state.range(0)), 20);
  hr::FitConfig cfg;
  cfg.rank = 4;
  cfg.max_sweeps = 1;
  cfg.rel_tol = 1e-300;
  const auto start = hr::initialize(t, cfg.rank, 1);
  for (auto _ : state) benchmark::DoNotOptimize(hr::fit_from(t, cfg, start).trace.back());
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_HurdleSweep)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MarFit(benchmark::State& state) {
  const auto bundle = hr::simulate_mar_dataset(1, static_cast<std::size_t>(state.range(0)));
  hr::DataTable t = hr::quadratic_table(bundle.masked(bundle.mar_mask));
  hr::FitConfig cfg;
  cfg.rank = 4;
  cfg.set_gamma(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(hr::fit(t, cfg).sweeps);
}
BENCHMARK(BM_MarFit)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const auto t = zero_inflated_table(2000, 20);
  const auto f = hr::initialize(t, 4, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hr::reconstruct_table(t, f).sum());
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMillisecond);

void BM_Nipals(benchmark::State& state) {
  const auto bundle = hr::simulate_mar_dataset(1, 5000);
  const hr::Matrix v = bundle.masked(bundle.mar_mask);
  for (auto _ : state) benchmark::DoNotOptimize(hr::nipals_fit(v, 4).imputed.sum());
}
BENCHMARK(BM_Nipals)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// Serial reference vs OpenMP-blocked MLP loss/gradient on a full blob dataset.
#include "pdd/kernels.hpp"
#include "pdd/toynet.hpp"

#include <benchmark/benchmark.h>

namespace {

struct Fixture {
  pdd::Dataset data;
  pdd::MlpParams params;
  pdd::Matrix X;
  std::vector<int> y;

  explicit Fixture(int n)
      : data(pdd::make_blobs(0, n, 20, 5, 0.5)), params(pdd::init_mlp({20, 16, 16, 5}, 1)) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    X = data.columns(all);
    y = data.labels_of(all);
  }
};

void BM_serial(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pdd::mlp_loss_grad_serial(f.params, f.X, f.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_parallel(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pdd::mlp_loss_grad_parallel(f.params, f.X, f.y));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_serial)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK(BM_parallel)->Arg(256)->Arg(2048)->Arg(16384);
BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "fairshift/adaboost.hpp"
#include "fairshift/fairness.hpp"
#include "fairshift/logreg.hpp"
#include "fairshift/rng.hpp"
#include "fairshift/stump.hpp"
#include "fairshift/svm.hpp"
#include "test_util.hpp"

using namespace fairshift;

namespace {

Dataset bench_dataset(int n, int d) {
  Rng rng(4242);
  return testutil::random_dataset(rng, n, d);
}

void BM_StumpSearch(benchmark::State& state) {
  const auto ds = bench_dataset(static_cast<int>(state.range(0)), 20);
  StumpSearch search(ds.x);
  const std::vector<double> w(ds.n(), 1.0 / ds.n());
  for (auto _ : state) {
    benchmark::DoNotOptimize(search.best(ds.labels, w));
  }
  state.SetItemsProcessed(state.iterations() * ds.n() * 20);
}
BENCHMARK(BM_StumpSearch)->Arg(2000)->Arg(20000);

void BM_AdaBoost20(benchmark::State& state) {
  const auto ds = bench_dataset(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_adaboost(ds, {20, 0.0}));
  }
}
BENCHMARK(BM_AdaBoost20)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SmoGaussian(benchmark::State& state) {
  const auto ds = bench_dataset(static_cast<int>(state.range(0)), 10);
  SvmConfig cfg;
  cfg.kernel.kind = KernelSpec::Kind::Gaussian;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_svm(ds, cfg));
  }
}
BENCHMARK(BM_SmoGaussian)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_LogRegObjective(benchmark::State& state) {
  const auto ds = bench_dataset(static_cast<int>(state.range(0)), 50);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(ds.dim() + 1, 0.01);
  Eigen::VectorXd grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(logreg_objective(ds.x, ds.labels, w, 1e-4, &grad));
  }
}
BENCHMARK(BM_LogRegObjective)->Arg(20000);

void BM_FitSdb(benchmark::State& state) {
  Rng rng(7);
  const int n = static_cast<int>(state.range(0));
  std::vector<double> confs(n);
  std::vector<int> labels(n);
  std::vector<std::uint8_t> mask(n);
  for (int i = 0; i < n; ++i) {
    mask[i] = rng.bernoulli(0.4) ? 1 : 0;
    labels[i] = rng.bernoulli(mask[i] ? 0.25 : 0.45) ? +1 : -1;
    confs[i] = rng.uniform01() * 2 - 1 + 0.5 * labels[i];
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_sdb(confs, labels, mask, 0.0));
  }
}
BENCHMARK(BM_FitSdb)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

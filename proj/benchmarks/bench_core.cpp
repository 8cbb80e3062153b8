#include <random>

#include <benchmark/benchmark.h>

#include "brz/bellman.hpp"
#include "brz/families.hpp"
#include "brz/hankel.hpp"
#include "brz/riesz.hpp"
#include "brz/semigroups.hpp"

using namespace brz;

namespace {

PlanPtr plan_for(int d, int n) {
  const auto a = MultiIndexAlpha::uniform(d, 0.5);
  const double x = d == 3 ? 8.0 : 11.0, y = d == 3 ? 8.0 : 8.5;
  return make_plan(build_grid(a, n, x), build_grid(a, n, y));
}

GridFunction sample(const PlanPtr& plan) {
  std::mt19937_64 rng(3);
  return make_spectral_sample(*plan, FamilySpec{}, rng).f;
}

void BM_hankel_apply(benchmark::State& state) {
  const auto plan = plan_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto f = sample(plan);
  for (auto _ : state) benchmark::DoNotOptimize(hankel_apply(*plan, f));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.size()));
}
BENCHMARK(BM_hankel_apply)->Args({1, 96})->Args({2, 96})->Args({3, 64})->Unit(benchmark::kMillisecond);

void BM_poisson_apply(benchmark::State& state) {
  const auto plan = plan_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto f = sample(plan);
  for (auto _ : state) benchmark::DoNotOptimize(poisson_apply(*plan, f, 0.5));
}
BENCHMARK(BM_poisson_apply)->Args({2, 96})->Unit(benchmark::kMillisecond);

void BM_riesz_components(benchmark::State& state) {
  const auto plan = plan_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const auto f = sample(plan);
  for (auto _ : state) benchmark::DoNotOptimize(riesz_components(*plan, f));
}
BENCHMARK(BM_riesz_components)->Args({1, 96})->Args({2, 96})->Args({3, 64})->Unit(benchmark::kMillisecond);

void BM_poisson_kernel(benchmark::State& state) {
  const MultiIndexAlpha a({0.5, 1.0});
  const double x[2] = {1.0, 0.7}, y[2] = {0.4, 1.3};
  for (auto _ : state) benchmark::DoNotOptimize(poisson_kernel(a, 0.8, x, y));
}
BENCHMARK(BM_poisson_kernel);

void BM_bellman_jet(benchmark::State& state) {
  const BellmanFunction b(BellmanShape{1, static_cast<int>(state.range(0)), 3.0, 0.1});
  double r = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(b.jet(r, 1.1));
    r = r < 3.0 ? r + 0.01 : 0.5;
  }
}
BENCHMARK(BM_bellman_jet)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

void BM_tau_search(benchmark::State& state) {
  const BellmanFunction b(BellmanShape{1, 2, 3.0, 0.1});
  Eigen::VectorXd z(1), e(2);
  z << 0.8;
  e << 1.1, 0.0;
  const Eigen::MatrixXd H = b.hessian(z, e);
  const double gamma = b.shape().gamma();
  for (auto _ : state) benchmark::DoNotOptimize(tau_search(H, gamma, 1, 2));
}
BENCHMARK(BM_tau_search)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

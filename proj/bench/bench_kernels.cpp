// Serial reference against the OpenMP kernel for the sampler, the two-put
// dual search and the transport cost matrix.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "lcurtain/american_put.hpp"
#include "lcurtain/coupling.hpp"
#include "lcurtain/curtain.hpp"
#include "lcurtain/measures.hpp"
#include "lcurtain/transport.hpp"

using namespace lcurtain;

namespace {

const CouplingTriple& uniform_triple() {
  static const CouplingTriple t =
      build_left_curtain(discretize(QuantileSource::uniform(0, 2), 200), discretize(QuantileSource::uniform(-1, 3), 400));
  return t;
}

template <auto Fn>
void BM_sample(benchmark::State& state) {
  const CouplingTriple& t = uniform_triple();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(t, 7, n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_dual_search(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const AtomicMeasure mu = discretize(QuantileSource::uniform(0, 2), n);
  const AtomicMeasure nu = discretize(QuantileSource::uniform(-1, 3), 2 * n);
  const PutPair k{1.25, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(Fn(mu, nu, k));
}

std::vector<WeightedPoint> cloud(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<WeightedPoint> out(n);
  for (WeightedPoint& p : out) p = {unit(rng), unit(rng), 1.0 / static_cast<double>(n)};
  return out;
}

template <auto Fn>
void BM_cost_matrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = cloud(n, 1), b = cloud(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_sample<sample_serial>)->Name("sample/serial")->Arg(1 << 16)->Arg(1 << 20)->UseRealTime();
BENCHMARK(BM_sample<sample>)->Name("sample/omp")->Arg(1 << 16)->Arg(1 << 20)->UseRealTime();
BENCHMARK(BM_dual_search<dual_search_serial>)->Name("dual_search/serial")->Arg(50)->Arg(200)->UseRealTime();
BENCHMARK(BM_dual_search<dual_search>)->Name("dual_search/omp")->Arg(50)->Arg(200)->UseRealTime();
BENCHMARK(BM_cost_matrix<cost_matrix_serial>)->Name("cost_matrix/serial")->Arg(256)->Arg(1024)->UseRealTime();
BENCHMARK(BM_cost_matrix<cost_matrix>)->Name("cost_matrix/omp")->Arg(256)->Arg(1024)->UseRealTime();

BENCHMARK_MAIN();

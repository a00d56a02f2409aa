#include <benchmark/benchmark.h>

#include "haarscat/datasets.hpp"
#include "haarscat/pairing_learn.hpp"
#include "haarscat/parallel.hpp"
#include "haarscat/scattering.hpp"

namespace {

// Level-0 cost matrix of smooth signals on a square grid; args: side, signals, threads.
void BM_CostMatrix(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto ds = haar::synthetic_smooth(haar::grid_graph(side, side), static_cast<std::size_t>(state.range(1)), 4, 2);
    std::vector<haar::ScatteringTensor> batch;
    for (const auto& x : ds.signals) batch.push_back(haar::input_layer(x));
    const auto threads = static_cast<std::size_t>(state.range(2));
    for (auto _ : state) benchmark::DoNotOptimize(haar::build_cost_matrix(batch, threads));
    state.SetItemsProcessed(state.iterations() * state.range(1) * static_cast<std::int64_t>(side * side * side * side) / 2);
}
BENCHMARK(BM_CostMatrix)->Args({16, 500, 1})->Args({16, 2000, 1})->Args({32, 500, 1})->Args({16, 2000, 4})
    ->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_LearnMultires(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const auto ds = haar::synthetic_smooth(haar::grid_graph(side, side), static_cast<std::size_t>(state.range(1)), 5, 4);
    const int J = haar::log2_exact(side * side);
    for (auto _ : state) benchmark::DoNotOptimize(haar::learn_multires(ds.signals, J));
}
BENCHMARK(BM_LearnMultires)->Args({8, 500})->Args({16, 2000})->Unit(benchmark::kMillisecond);

}  // namespace

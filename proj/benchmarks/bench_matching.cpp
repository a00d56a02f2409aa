#include <benchmark/benchmark.h>

#include "haarscat/pairing_learn.hpp"
#include "haarscat/rng.hpp"

namespace {

haar::CostMatrix random_costs(std::size_t n, std::uint64_t seed) {
    haar::Rng rng(seed);
    std::vector<double> c(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) c[a * n + b] = c[b * n + a] = rng.uniform();
    return haar::CostMatrix(n, std::move(c));
}

void BM_Blossom(benchmark::State& state) {
    const auto costs = random_costs(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(haar::blossom_matching(costs));
}
BENCHMARK(BM_Blossom)->RangeMultiplier(2)->Range(16, 512)->Unit(benchmark::kMillisecond);

// Same instances: the counter reports how far the heuristic is from optimal.
void BM_Greedy(benchmark::State& state) {
    const auto costs = random_costs(static_cast<std::size_t>(state.range(0)), 3);
    haar::MatchingResult r;
    for (auto _ : state) benchmark::DoNotOptimize(r = haar::greedy_matching(costs));
    state.counters["excess_over_optimal"] = r.total_cost / haar::blossom_matching(costs).total_cost - 1.0;
}
BENCHMARK(BM_Greedy)->RangeMultiplier(2)->Range(16, 512)->Unit(benchmark::kMillisecond);

}  // namespace

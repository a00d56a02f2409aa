#include <benchmark/benchmark.h>

#include "haarscat/multires.hpp"
#include "haarscat/rng.hpp"
#include "haarscat/scattering.hpp"

namespace {

haar::MultiresApprox random_multires(haar::Rng& rng, std::size_t d) {
    std::vector<haar::Pairing> ps;
    for (std::size_t nodes = d; nodes > 1; nodes /= 2) {
        const auto order = rng.permutation(nodes);
        std::vector<haar::VertexPair> pairs;
        for (std::size_t k = 0; k < nodes; k += 2) pairs.emplace_back(order[k], order[k + 1]);
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& a, const auto& b) { return std::min(a.first, a.second) < std::min(b.first, b.second); });
        ps.emplace_back(std::move(pairs));
    }
    return haar::build_from_pairings(d, std::move(ps));
}

// Full-depth transform: J = log2 d layers of d/2 pair operations each.
void BM_TransformTop(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    haar::Rng rng(1);
    const auto m = random_multires(rng, d);
    haar::Signal x(d);
    for (auto& v : x) v = rng.normal();
    const int J = haar::log2_exact(d);
    for (auto _ : state) benchmark::DoNotOptimize(haar::transform_top(x, m, J));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d) * J);
}
BENCHMARK(BM_TransformTop)->RangeMultiplier(4)->Range(64, 4096);

void BM_TruncateByOrder(benchmark::State& state) {
    haar::Rng rng(2);
    const std::size_t d = 1024;
    const auto m = random_multires(rng, d);
    haar::Signal x(d);
    for (auto& v : x) v = rng.normal();
    const auto top = haar::transform_top(x, m, 10);
    for (auto _ : state) benchmark::DoNotOptimize(haar::truncate_by_order(top, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_TruncateByOrder)->DenseRange(1, 4);

}  // namespace

BENCHMARK_MAIN();

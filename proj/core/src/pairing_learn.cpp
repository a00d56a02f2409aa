#include "haarscat/pairing_learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "haarscat/blossom.hpp"
#include "haarscat/io.hpp"
#include "haarscat/parallel.hpp"
#include "haarscat/rng.hpp"

namespace haar {

namespace {

constexpr std::size_t kSignalBlock = 64;

void require_even(const CostMatrix& c, const char* who) {
    if (c.size() < 2 || c.size() % 2 != 0)
        throw Error(std::string(who) + ": need an even number of nodes >= 2, got " + std::to_string(c.size()));
}

std::vector<std::int64_t> quantized(const CostMatrix& c) {
    std::vector<std::int64_t> q(c.data().size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantize_cost(c.data()[i]);
    return q;
}

MatchingResult finish(const CostMatrix& c, const std::vector<std::uint32_t>& mate, MatchingMethod method) {
    std::vector<VertexPair> pairs;
    MatchingResult r;
    for (std::uint32_t v = 0; v < mate.size(); ++v)
        if (v < mate[v]) {
            pairs.emplace_back(v, mate[v]);
            r.total_cost += c(v, mate[v]);
            r.quantized_total += quantize_cost(c(v, mate[v]));
        }
    r.pairing = Pairing(std::move(pairs));
    r.method = method;
    return r;
}

// Walks vertices in ascending order; each still-free vertex v takes the
// smallest free partner u for which swapping (v,w),(u,t) to (v,u),(w,t)
// leaves the quantized total unchanged.
void normalize_ties(const std::vector<std::int64_t>& q, std::size_t n, std::vector<std::uint32_t>& mate) {
    std::vector<char> fixed(n, 0);
    for (std::uint32_t v = 0; v < n; ++v) {
        if (fixed[v]) continue;
        const std::uint32_t w = mate[v];
        for (std::uint32_t u = v + 1; u < w; ++u) {
            if (fixed[u]) continue;
            const std::uint32_t t = mate[u];
            if (q[v * n + u] + q[w * n + t] == q[v * n + w] + q[u * n + t]) {
                mate[v] = u;
                mate[u] = v;
                mate[w] = t;
                mate[t] = w;
                break;
            }
        }
        fixed[v] = 1;
        fixed[mate[v]] = 1;
    }
}

}  // namespace

CostMatrix::CostMatrix(std::size_t size, std::vector<double> costs) : size_(size), costs_(std::move(costs)) {
    if (costs_.size() != size_ * size_) throw Error("CostMatrix: expected a square matrix");
    for (std::size_t a = 0; a < size_; ++a) {
        if ((*this)(a, a) != 0.0) throw Error("CostMatrix: nonzero diagonal");
        for (std::size_t b = 0; b < size_; ++b) {
            const double v = (*this)(a, b);
            if (!(v >= 0.0) || !std::isfinite(v)) throw Error("CostMatrix: costs must be finite and nonnegative");
            if (v != (*this)(b, a)) throw Error("CostMatrix: matrix is not symmetric");
        }
    }
}

std::int64_t quantize_cost(double cost) {
    const double scaled = std::ldexp(cost, kCostScaleBits);
    if (!std::isfinite(scaled) || std::abs(scaled) >= std::ldexp(1.0, 52))
        throw Error("quantize_cost: cost " + std::to_string(cost) + " too large for exact matching");
    return std::llround(scaled);
}

std::string to_string(MatchingMethod method) {
    switch (method) {
        case MatchingMethod::ExactBlossom: return "exact-blossom";
        case MatchingMethod::BruteForce: return "brute-force";
        case MatchingMethod::Greedy: return "greedy";
    }
    return "unknown";
}

CostMatrix build_cost_matrix(std::span<const ScatteringTensor> batch, std::size_t threads) {
    if (batch.empty()) throw Error("build_cost_matrix: empty batch");
    const std::size_t rows = batch.front().rows;
    const std::size_t cols = batch.front().cols;
    for (const auto& t : batch)
        if (t.rows != rows || t.cols != cols || t.level != batch.front().level)
            throw Error("build_cost_matrix: layers differ in shape or level");

    std::vector<double> costs(rows * rows, 0.0);
    for (std::size_t start = 0; start < batch.size(); start += kSignalBlock) {
        const std::size_t stop = std::min(batch.size(), start + kSignalBlock);
        parallel_for(rows, threads, [&](std::size_t a) {
            for (std::size_t b = a + 1; b < rows; ++b) {
                double s = 0.0;
                for (std::size_t i = start; i < stop; ++i) {
                    const double* ra = batch[i].data.data() + a * cols;
                    const double* rb = batch[i].data.data() + b * cols;
                    for (std::size_t q = 0; q < cols; ++q) s += std::abs(ra[q] - rb[q]);
                }
                costs[a * rows + b] += s;
            }
        });
    }
    CostMatrix out(rows);
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = a + 1; b < rows; ++b) out.add(a, b, costs[a * rows + b]);
    return out;
}

MatchingResult blossom_matching(const CostMatrix& costs) {
    require_even(costs, "blossom_matching");
    const std::size_t n = costs.size();
    const auto q = quantized(costs);
    const std::int64_t top = *std::max_element(q.begin(), q.end());
    std::vector<WeightedEdge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = a + 1; b < n; ++b) edges.push_back({a, b, top - q[a * n + b] + 1});
    const auto raw = max_weight_matching(n, edges, true);
    std::vector<std::uint32_t> mate(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (raw[v] < 0) throw Error("blossom_matching: matcher returned an imperfect matching");
        mate[v] = static_cast<std::uint32_t>(raw[v]);
    }
    normalize_ties(q, n, mate);
    return finish(costs, mate, MatchingMethod::ExactBlossom);
}

MatchingResult brute_force_matching(const CostMatrix& costs) {
    require_even(costs, "brute_force_matching");
    const std::size_t n = costs.size();
    if (n > 14) throw Error("brute_force_matching: d' = " + std::to_string(n) + " exceeds the enumeration bound 14");
    const auto q = quantized(costs);
    std::vector<std::uint32_t> mate(n, 0), best;
    std::vector<char> used(n, 0);
    std::int64_t best_total = std::numeric_limits<std::int64_t>::max();

    auto recurse = [&](auto&& self, std::int64_t total) -> void {
        std::uint32_t v = 0;
        while (v < n && used[v]) ++v;
        if (v == n) {
            if (total < best_total) {
                best_total = total;
                best = mate;
            }
            return;
        }
        used[v] = 1;
        for (std::uint32_t u = v + 1; u < n; ++u) {
            if (used[u]) continue;
            used[u] = 1;
            mate[v] = u;
            mate[u] = v;
            self(self, total + q[v * n + u]);
            used[u] = 0;
        }
        used[v] = 0;
    };
    recurse(recurse, 0);
    return finish(costs, best, MatchingMethod::BruteForce);
}

MatchingResult greedy_matching(const CostMatrix& costs) {
    require_even(costs, "greedy_matching");
    const std::size_t n = costs.size();
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(n * (n - 1) / 2);
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    std::stable_sort(edges.begin(), edges.end(),
                     [&](const auto& x, const auto& y) { return costs(x.first, x.second) < costs(y.first, y.second); });
    std::vector<std::uint32_t> mate(n);
    std::vector<char> used(n, 0);
    for (const auto& [a, b] : edges)
        if (!used[a] && !used[b]) {
            used[a] = used[b] = 1;
            mate[a] = b;
            mate[b] = a;
        }
    return finish(costs, mate, MatchingMethod::Greedy);
}

namespace {

double total_l1(std::span<const ScatteringTensor> layers) {
    double s = 0.0;
    for (const auto& t : layers) s += t.norm_l1();
    return s;
}

}  // namespace

LearnOutcome learn_multires(std::span<const Signal> training, int J, const LearnOptions& options) {
    if (training.empty()) throw Error("learn_multires: empty training set");
    const std::size_t d = training.front().size();
    for (const auto& x : training)
        if (x.size() != d) throw Error("learn_multires: training signals differ in length");
    if (!is_power_of_two(d)) throw Error("learn_multires: d = " + std::to_string(d) + " is not a power of two");
    if (J < 0 || J > log2_exact(d)) throw Error("learn_multires: J must lie in 0..log2(d)");
    const std::size_t threads = resolve_threads(options.threads);

    std::vector<Pairing> pairings;
    LearnOutcome out;

    // Current layer of every signal, kept unless layers are recomputed.
    std::vector<ScatteringTensor> layers;
    if (!options.recompute_layers) {
        layers.resize(training.size());
        parallel_for(training.size(), threads, [&](std::size_t i) { layers[i] = input_layer(training[i]); });
    }

    for (int j = 0; j < J; ++j) {
        const std::size_t nodes = d >> j;
        LevelTrace trace;
        trace.level = j;
        CostMatrix costs(nodes);
        if (options.recompute_layers) {
            const MultiresApprox partial = build_from_pairings(d, pairings);
            for (std::size_t start = 0; start < training.size(); start += kSignalBlock) {
                const std::size_t stop = std::min(training.size(), start + kSignalBlock);
                std::vector<ScatteringTensor> block(stop - start);
                parallel_for(block.size(), threads,
                             [&](std::size_t i) { block[i] = transform_top(training[start + i], partial, j); });
                trace.l1_before += total_l1(block);
                const CostMatrix part = build_cost_matrix(block, threads);
                for (std::size_t a = 0; a < nodes; ++a)
                    for (std::size_t b = a + 1; b < nodes; ++b) costs.add(a, b, part(a, b));
            }
        } else {
            trace.l1_before = total_l1(layers);
            costs = build_cost_matrix(layers, threads);
        }

        MatchingResult match = blossom_matching(costs);
        trace.matching_cost = match.total_cost;
        trace.quantized_cost = match.quantized_total;
        pairings.push_back(match.pairing);

        if (options.recompute_layers) {
            const MultiresApprox partial = build_from_pairings(d, pairings);
            std::vector<double> norms(training.size());
            parallel_for(training.size(), threads,
                         [&](std::size_t i) { norms[i] = transform_top(training[i], partial, j + 1).norm_l1(); });
            for (const double v : norms) trace.l1_after += v;
        } else {
            parallel_for(layers.size(), threads, [&](std::size_t i) { layers[i] = scatter_step(layers[i], pairings.back()); });
            trace.l1_after = total_l1(layers);
        }
        out.levels.push_back(trace);
    }
    out.multires = build_from_pairings(d, std::move(pairings));
    return out;
}

EnsembleOutcome learn_ensemble(std::span<const Signal> training, int J, int N, std::uint64_t seed,
                               const LearnOptions& options) {
    if (N < 1) throw Error("learn_ensemble: N must be at least 1");
    if (training.size() < static_cast<std::size_t>(N))
        throw Error("learn_ensemble: N = " + std::to_string(N) + " exceeds the training size " +
                    std::to_string(training.size()));
    EnsembleOutcome out;
    out.seed = seed;
    std::vector<std::uint32_t> order(training.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(seed);
    rng.shuffle(std::span<std::uint32_t>(order));
    const std::size_t total = order.size();
    for (int k = 0; k < N; ++k) {
        const std::size_t begin = total * k / N;
        const std::size_t end = total * (k + 1) / N;
        std::vector<std::uint32_t> subset(order.begin() + begin, order.begin() + end);
        std::sort(subset.begin(), subset.end());
        out.subsets.push_back(std::move(subset));
    }

    const std::size_t threads = resolve_threads(options.threads);
    // With several members, parallelism goes to the members themselves.
    LearnOptions inner = options;
    inner.threads = N > 1 ? 1 : threads;
    out.members.resize(N);
    parallel_for(static_cast<std::size_t>(N), N > 1 ? threads : 1, [&](std::size_t k) {
        std::vector<Signal> subset;
        subset.reserve(out.subsets[k].size());
        for (const auto i : out.subsets[k]) subset.push_back(training[i]);
        out.members[k] = learn_multires(subset, J, inner);
    });
    return out;
}

nlohmann::json level_trace_json(const LevelTrace& t) {
    return {{"level", t.level},
            {"matching_cost", t.matching_cost},
            {"quantized_cost", t.quantized_cost},
            {"l1_before", t.l1_before},
            {"l1_after", t.l1_after},
            {"l1_increase", t.l1_after - t.l1_before}};
}

void save_ensemble(const std::filesystem::path& dir, const EnsembleOutcome& ensemble, const nlohmann::json& extra) {
    nlohmann::json manifest = extra;
    manifest["seed"] = ensemble.seed;
    manifest["N"] = ensemble.members.size();
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t k = 0; k < ensemble.members.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "member_%03zu.json", k);
        write_json(dir / name, ensemble.members[k].multires.to_json());
        nlohmann::json levels = nlohmann::json::array();
        for (const auto& t : ensemble.members[k].levels) levels.push_back(level_trace_json(t));
        members.push_back({{"file", name}, {"subset", ensemble.subsets[k]}, {"levels", levels}});
    }
    manifest["members"] = members;
    write_json(dir / "manifest.json", manifest);
}

std::vector<MultiresApprox> load_ensemble(const std::filesystem::path& dir) {
    const auto manifest = read_json(dir / "manifest.json");
    std::vector<MultiresApprox> out;
    try {
        for (const auto& member : manifest.at("members"))
            out.push_back(MultiresApprox::from_json(read_json(dir / member.at("file").get<std::string>())));
    } catch (const nlohmann::json::exception& e) {
        throw Error("ensemble manifest: " + std::string(e.what()));
    }
    if (out.empty()) throw Error("ensemble manifest lists no members");
    return out;
}

}  // namespace haar

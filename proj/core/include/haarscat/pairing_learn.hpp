#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "haarscat/common.hpp"
#include "haarscat/multires.hpp"
#include "haarscat/scattering.hpp"

namespace haar {

/// Symmetric pairing costs over the d' nodes of one level:
/// cost(a, b) = sum_i sum_q |S_j x_i(a, q) - S_j x_i(b, q)|.
class CostMatrix {
public:
    CostMatrix() = default;
    explicit CostMatrix(std::size_t size) : size_(size), costs_(size * size, 0.0) {}
    /// Takes a dense row-major matrix; throws unless it is square, symmetric,
    /// nonnegative and zero on the diagonal.
    CostMatrix(std::size_t size, std::vector<double> costs);

    std::size_t size() const { return size_; }
    double operator()(std::size_t a, std::size_t b) const { return costs_[a * size_ + b]; }
    const std::vector<double>& data() const { return costs_; }

    /// Adds to both (a, b) and (b, a).
    void add(std::size_t a, std::size_t b, double value) {
        costs_[a * size_ + b] += value;
        costs_[b * size_ + a] += value;
    }

private:
    std::size_t size_ = 0;
    std::vector<double> costs_;
};

/// Costs are matched as integers round(cost * 2^20); the total of an optimal
/// pairing is therefore exact up to 2^-20 * d'/2.
inline constexpr int kCostScaleBits = 20;
std::int64_t quantize_cost(double cost);

enum class MatchingMethod { ExactBlossom, BruteForce, Greedy };
std::string to_string(MatchingMethod method);

struct MatchingResult {
    Pairing pairing;  // pairs sorted by their smaller index
    double total_cost = 0.0;
    std::int64_t quantized_total = 0;
    MatchingMethod method = MatchingMethod::ExactBlossom;
};

/// Builds the level cost matrix of a batch of same-shaped layers. Signals are
/// accumulated in fixed blocks, so the result does not depend on `threads`.
CostMatrix build_cost_matrix(std::span<const ScatteringTensor> batch, std::size_t threads = 1);

/// Minimum-cost perfect matching on the complete graph. Among optima reached
/// by exchanging two pairs at equal quantized cost, the lexicographically
/// smallest partner sequence is returned.
MatchingResult blossom_matching(const CostMatrix& costs);

/// Exhaustive search over all (d'-1)!! pairings; d' <= 14. Ties resolve to
/// the lexicographically first pairing in enumeration order.
MatchingResult brute_force_matching(const CostMatrix& costs);

/// Cheapest-edge-first heuristic, kept as a benchmark baseline.
MatchingResult greedy_matching(const CostMatrix& costs);

struct LevelTrace {
    int level = 0;             // pairing level j (merges S_j into S_{j+1})
    double matching_cost = 0;  // sum of matched costs
    std::int64_t quantized_cost = 0;
    double l1_before = 0;  // sum_i ||S_j x_i||_1
    double l1_after = 0;   // sum_i ||S_{j+1} x_i||_1
};

struct LearnOptions {
    std::size_t threads = 1;
    /// Recompute each block's layer from the signals at every level instead
    /// of keeping the whole batch's current layer in memory.
    bool recompute_layers = false;
};

struct LearnOutcome {
    MultiresApprox multires;
    std::vector<LevelTrace> levels;
};

/// Greedy fine-to-coarse learning: at each level, the pairing minimising the
/// total variation of the training layers.
LearnOutcome learn_multires(std::span<const Signal> training, int J, const LearnOptions& options = {});

struct EnsembleOutcome {
    std::uint64_t seed = 0;
    std::vector<std::vector<std::uint32_t>> subsets;  // training indices per member
    std::vector<LearnOutcome> members;
};

/// Shuffles the training indices with `seed`, splits them into N disjoint
/// near-equal subsets and learns one multiresolution per subset.
EnsembleOutcome learn_ensemble(std::span<const Signal> training, int J, int N, std::uint64_t seed,
                               const LearnOptions& options = {});

nlohmann::json level_trace_json(const LevelTrace& trace);

/// Writes member_NNN.json files and manifest.json into `dir`.
void save_ensemble(const std::filesystem::path& dir, const EnsembleOutcome& ensemble,
                   const nlohmann::json& extra = nlohmann::json::object());

/// Loads the members listed in dir/manifest.json.
std::vector<MultiresApprox> load_ensemble(const std::filesystem::path& dir);

}  // namespace haar

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace haar {

struct WeightedEdge {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    std::int64_t weight = 0;
};

/// Maximum-weight matching on a general graph (Edmonds' blossom algorithm,
/// primal-dual form with O(n^3) time).
///
/// All arithmetic is integral, so the optimum is exact. With max_cardinality
/// set the result is the heaviest matching among those of maximum size.
/// Returns mate[v], or -1 for unmatched vertices. Weights must satisfy
/// |w| < 2^60.
std::vector<int> max_weight_matching(std::size_t vertex_count,
                                     std::span<const WeightedEdge> edges,
                                     bool max_cardinality);

}  // namespace haar

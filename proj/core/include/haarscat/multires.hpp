#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "haarscat/common.hpp"

namespace haar {

using VertexPair = std::pair<std::uint32_t, std::uint32_t>;

/// Unweighted undirected graph on vertices 0..vertex_count-1.
class Graph {
public:
    Graph() = default;
    /// Deduplicates edges and stores each as (min, max). Rejects self-loops
    /// and out-of-range endpoints.
    Graph(std::size_t vertex_count, std::vector<VertexPair> edges);

    std::size_t vertex_count() const { return vertex_count_; }
    const std::vector<VertexPair>& edges() const { return edges_; }
    const std::vector<std::vector<std::uint32_t>>& adjacency() const { return adjacency_; }
    std::size_t degree(std::uint32_t v) const { return adjacency_.at(v).size(); }

    /// Relabels vertex v as perm[v].
    Graph relabeled(std::span<const std::uint32_t> perm) const;

private:
    std::size_t vertex_count_ = 0;
    std::vector<VertexPair> edges_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
};

/// Perfect matching of the nodes 0..node_count()-1 of one level. Pair n
/// merges its two nodes into node n of the next level.
class Pairing {
public:
    Pairing() = default;
    /// Stores each pair as (min, max), keeping the given pair order. Throws
    /// unless every index in 0..2*pairs.size()-1 appears exactly once.
    explicit Pairing(std::vector<VertexPair> pairs);

    std::size_t size() const { return pairs_.size(); }
    std::size_t node_count() const { return 2 * pairs_.size(); }
    const std::vector<VertexPair>& pairs() const { return pairs_; }
    const VertexPair& operator[](std::size_t n) const { return pairs_[n]; }

    /// partner()[v] is the node matched with v.
    std::vector<std::uint32_t> partner() const;

    bool operator==(const Pairing&) const = default;

private:
    std::vector<VertexPair> pairs_;
};

/// Multiresolution approximation of the vertex set {0..d-1}: one pairing per
/// level and the nested vertex sets V_{j,n} they induce.
class MultiresApprox {
public:
    MultiresApprox() = default;

    std::size_t dimension() const { return d_; }
    int depth() const { return static_cast<int>(pairings_.size()); }

    /// Pairing applied to the 2^-j d nodes of level j (0 <= j < depth()).
    const Pairing& pairing(int level) const { return pairings_.at(level); }
    const std::vector<Pairing>& pairings() const { return pairings_; }

    /// Sorted vertex sets V_{level,n}, n = 0..2^-level d - 1, for 0 <= level <= depth().
    const std::vector<std::vector<std::uint32_t>>& vertex_sets(int level) const {
        return vertex_sets_.at(level);
    }

    /// node_of(level)[v] = n such that v is in V_{level,n}.
    std::vector<std::uint32_t> node_of(int level) const;

    /// The first J levels of this approximation.
    MultiresApprox truncated(int J) const;

    /// Same hierarchy on relabeled vertices: vertex v becomes perm[v].
    MultiresApprox relabeled(std::span<const std::uint32_t> perm) const;

    nlohmann::json to_json() const;
    static MultiresApprox from_json(const nlohmann::json& doc);

    bool operator==(const MultiresApprox& other) const {
        return d_ == other.d_ && pairings_ == other.pairings_;
    }

    friend MultiresApprox build_from_pairings(std::size_t d, std::vector<Pairing> pairings);

private:
    std::size_t d_ = 0;
    std::vector<Pairing> pairings_;
    std::vector<std::vector<std::vector<std::uint32_t>>> vertex_sets_;
};

/// Validates the level sizes and derives V_{j+1,n} = V_{j,a_n} ∪ V_{j,b_n}.
MultiresApprox build_from_pairings(std::size_t d, std::vector<Pairing> pairings);

/// Number of grid variants enumerated by grid_multires.
inline constexpr int kGridVariantCount = 64;

/// Known-geometry multiresolution on a width x height pixel grid (vertex
/// index y*width + x).
///
/// Variant 0 merges sets horizontally at even levels and vertically at odd
/// levels, giving aligned 2^a x 2^b blocks. The variant id encodes a
/// translation of that block tiling (shift_x = v & 3, shift_y = (v >> 2) & 3)
/// and a quarter-turn count (v >> 4) of the frame in which it is laid out;
/// odd rotations exchange the roles of the two axes. Blocks cut by the image
/// border are completed by merging with adjacent leftover sets, so every
/// V_{j,n} stays connected in the 8-neighbour grid.
MultiresApprox grid_multires(std::size_t width, std::size_t height, int J, int variant);

/// Per-level fraction (index j = 0..depth) of sets V_{j,n} inducing a
/// connected subgraph of g. With `active`, sets are first restricted to the
/// active vertices and sets with no active vertex are not counted; a level
/// with no counted set reports 1.
std::vector<double> connectivity_fraction(const MultiresApprox& m, const Graph& g,
                                          const std::vector<std::uint32_t>* active = nullptr);

/// Whether `vertices` induce a connected subgraph (the empty set counts as connected).
bool induces_connected_subgraph(const Graph& g, std::span<const std::uint32_t> vertices);

}  // namespace haar

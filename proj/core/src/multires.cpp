#include "haarscat/multires.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "haarscat/blossom.hpp"

namespace haar {

Graph::Graph(std::size_t vertex_count, std::vector<VertexPair> edges)
    : vertex_count_(vertex_count), adjacency_(vertex_count) {
    for (auto& e : edges) {
        if (e.first >= vertex_count || e.second >= vertex_count)
            throw Error("Graph: edge endpoint out of range");
        if (e.first == e.second) throw Error("Graph: self-loop at vertex " + std::to_string(e.first));
        if (e.first > e.second) std::swap(e.first, e.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    for (const auto& [u, v] : edges_) {
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

Graph Graph::relabeled(std::span<const std::uint32_t> perm) const {
    if (perm.size() != vertex_count_) throw Error("Graph::relabeled: permutation size mismatch");
    std::vector<VertexPair> edges;
    edges.reserve(edges_.size());
    for (const auto& [u, v] : edges_) edges.emplace_back(perm[u], perm[v]);
    return Graph(vertex_count_, std::move(edges));
}

Pairing::Pairing(std::vector<VertexPair> pairs) : pairs_(std::move(pairs)) {
    const std::size_t nodes = 2 * pairs_.size();
    std::vector<char> seen(nodes, 0);
    for (auto& p : pairs_) {
        if (p.first > p.second) std::swap(p.first, p.second);
        for (const auto v : {p.first, p.second}) {
            if (v >= nodes)
                throw Error("Pairing: index " + std::to_string(v) + " out of range for " +
                            std::to_string(nodes) + " nodes");
            if (seen[v]) throw Error("Pairing: index " + std::to_string(v) + " repeated");
            seen[v] = 1;
        }
    }
}

std::vector<std::uint32_t> Pairing::partner() const {
    std::vector<std::uint32_t> out(node_count());
    for (const auto& [a, b] : pairs_) {
        out[a] = b;
        out[b] = a;
    }
    return out;
}

MultiresApprox build_from_pairings(std::size_t d, std::vector<Pairing> pairings) {
    if (!is_power_of_two(d)) throw Error("build_from_pairings: d = " + std::to_string(d) + " is not a power of two");
    const int max_depth = log2_exact(d);
    if (static_cast<int>(pairings.size()) > max_depth)
        throw Error("build_from_pairings: depth exceeds log2(d)");

    MultiresApprox m;
    m.d_ = d;
    m.vertex_sets_.resize(pairings.size() + 1);
    auto& base = m.vertex_sets_[0];
    base.resize(d);
    for (std::uint32_t v = 0; v < d; ++v) base[v] = {v};

    for (std::size_t j = 0; j < pairings.size(); ++j) {
        const std::size_t expected = d >> j;
        if (pairings[j].node_count() != expected)
            throw Error("build_from_pairings: level " + std::to_string(j) + " pairs " +
                        std::to_string(pairings[j].node_count()) + " nodes, expected " +
                        std::to_string(expected));
        const auto& prev = m.vertex_sets_[j];
        auto& next = m.vertex_sets_[j + 1];
        next.reserve(pairings[j].size());
        for (const auto& [a, b] : pairings[j].pairs()) {
            std::vector<std::uint32_t> merged;
            merged.reserve(prev[a].size() + prev[b].size());
            std::merge(prev[a].begin(), prev[a].end(), prev[b].begin(), prev[b].end(),
                       std::back_inserter(merged));
            next.push_back(std::move(merged));
        }
    }
    m.pairings_ = std::move(pairings);
    return m;
}

std::vector<std::uint32_t> MultiresApprox::node_of(int level) const {
    std::vector<std::uint32_t> out(d_);
    const auto& sets = vertex_sets(level);
    for (std::uint32_t n = 0; n < sets.size(); ++n)
        for (const auto v : sets[n]) out[v] = n;
    return out;
}

MultiresApprox MultiresApprox::truncated(int J) const {
    if (J < 0 || J > depth()) throw Error("MultiresApprox::truncated: J out of range");
    return build_from_pairings(d_, std::vector<Pairing>(pairings_.begin(), pairings_.begin() + J));
}

MultiresApprox MultiresApprox::relabeled(std::span<const std::uint32_t> perm) const {
    if (perm.size() != d_) throw Error("MultiresApprox::relabeled: permutation size mismatch");
    std::vector<Pairing> pairings = pairings_;
    if (!pairings.empty()) {
        std::vector<VertexPair> pairs;
        pairs.reserve(pairings[0].size());
        for (const auto& [a, b] : pairings[0].pairs()) pairs.emplace_back(perm[a], perm[b]);
        pairings[0] = Pairing(std::move(pairs));
    }
    return build_from_pairings(d_, std::move(pairings));
}

nlohmann::json MultiresApprox::to_json() const {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& p : pairings_) {
        nlohmann::json level = nlohmann::json::array();
        for (const auto& [a, b] : p.pairs()) level.push_back({a, b});
        levels.push_back(std::move(level));
    }
    return {{"d", d_}, {"J", depth()}, {"pairings", std::move(levels)}};
}

MultiresApprox MultiresApprox::from_json(const nlohmann::json& doc) {
    try {
        const auto d = doc.at("d").get<std::size_t>();
        const auto J = doc.at("J").get<int>();
        std::vector<Pairing> pairings;
        for (const auto& level : doc.at("pairings")) {
            std::vector<VertexPair> pairs;
            for (const auto& pr : level) {
                if (!pr.is_array() || pr.size() != 2) throw Error("multires JSON: pair must have two entries");
                pairs.emplace_back(pr[0].get<std::uint32_t>(), pr[1].get<std::uint32_t>());
            }
            pairings.emplace_back(std::move(pairs));
        }
        if (static_cast<int>(pairings.size()) != J)
            throw Error("multires JSON: J does not match the number of pairing levels");
        return build_from_pairings(d, std::move(pairings));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("multires JSON: ") + e.what());
    }
}

namespace {

struct BlockShape {
    std::size_t width = 1;
    std::size_t height = 1;
};

// Ideal block shape after `levels` merges in a frame of the given size:
// horizontal merges at even steps, vertical at odd ones, falling back to the
// other axis once one side of the frame is exhausted.
BlockShape block_shape(int levels, std::size_t frame_w, std::size_t frame_h) {
    BlockShape s;
    for (int i = 0; i < levels; ++i) {
        const bool horizontal = (i % 2 == 0);
        if ((horizontal && s.width < frame_w) || s.height >= frame_h)
            s.width *= 2;
        else
            s.height *= 2;
    }
    return s;
}

}  // namespace

MultiresApprox grid_multires(std::size_t width, std::size_t height, int J, int variant) {
    if (width == 0 || height == 0) throw Error("grid_multires: empty grid");
    const std::size_t d = width * height;
    if (!is_power_of_two(width) || !is_power_of_two(height))
        throw Error("grid_multires: width*height must be a power of two");
    if (J < 0 || J > log2_exact(d)) throw Error("grid_multires: J exceeds log2(width*height)");
    if (variant < 0 || variant >= kGridVariantCount) throw Error("grid_multires: variant out of range");

    const std::size_t shift_x = variant & 3;
    const std::size_t shift_y = (variant >> 2) & 3;
    const int quarter_turns = variant >> 4;

    // Pixel coordinates in the rotated frame.
    std::vector<std::size_t> fx(d), fy(d);
    std::size_t frame_w = width, frame_h = height;
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            std::size_t rx = x, ry = y, w = width, h = height;
            for (int t = 0; t < quarter_turns; ++t) {
                const std::size_t nx = h - 1 - ry;
                ry = rx;
                rx = nx;
                std::swap(w, h);
            }
            fx[y * width + x] = rx;
            fy[y * width + x] = ry;
            frame_w = w;
            frame_h = h;
        }
    }

    std::vector<std::uint32_t> set_of(d);
    std::iota(set_of.begin(), set_of.end(), 0u);
    std::vector<std::vector<std::uint32_t>> sets(d);
    for (std::uint32_t v = 0; v < d; ++v) sets[v] = {v};

    std::vector<Pairing> pairings;
    for (int j = 0; j < J; ++j) {
        const BlockShape shape = block_shape(j + 1, frame_w, frame_h);
        const std::size_t blocks_per_row = (frame_w + 3) / shape.width + 1;
        auto ideal_block = [&](std::uint32_t v) {
            return ((fy[v] + shift_y) / shape.height) * blocks_per_row + (fx[v] + shift_x) / shape.width;
        };

        std::set<VertexPair> adjacent;
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                const auto v = static_cast<std::uint32_t>(y * width + x);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const long nx = static_cast<long>(x) + dx, ny = static_cast<long>(y) + dy;
                        if (nx < 0 || ny < 0 || nx >= static_cast<long>(width) || ny >= static_cast<long>(height))
                            continue;
                        const auto u = static_cast<std::uint32_t>(ny * static_cast<long>(width) + nx);
                        const auto a = set_of[v], b = set_of[u];
                        if (a < b) adjacent.emplace(a, b);
                    }
                }
            }
        }

        // Prefer merges whose union touches as few ideal blocks as possible.
        const std::int64_t big = (std::int64_t{1} << (j + 1)) + 2;
        std::vector<WeightedEdge> edges;
        edges.reserve(adjacent.size());
        for (const auto& [a, b] : adjacent) {
            std::set<std::size_t> touched;
            for (const auto v : sets[a]) touched.insert(ideal_block(v));
            for (const auto v : sets[b]) touched.insert(ideal_block(v));
            edges.push_back({a, b, big - static_cast<std::int64_t>(touched.size())});
        }
        const auto mate = max_weight_matching(sets.size(), edges, true);

        std::vector<VertexPair> pairs;
        for (std::uint32_t a = 0; a < sets.size(); ++a) {
            if (mate[a] < 0)
                throw Error("grid_multires: no connected pairing exists at level " + std::to_string(j));
            if (a < static_cast<std::uint32_t>(mate[a])) pairs.emplace_back(a, static_cast<std::uint32_t>(mate[a]));
        }
        std::vector<std::vector<std::uint32_t>> next;
        next.reserve(pairs.size());
        for (std::uint32_t n = 0; n < pairs.size(); ++n) {
            const auto [a, b] = pairs[n];
            std::vector<std::uint32_t> merged;
            std::merge(sets[a].begin(), sets[a].end(), sets[b].begin(), sets[b].end(),
                       std::back_inserter(merged));
            for (const auto v : merged) set_of[v] = n;
            next.push_back(std::move(merged));
        }
        sets = std::move(next);
        pairings.emplace_back(std::move(pairs));
    }
    return build_from_pairings(d, std::move(pairings));
}

bool induces_connected_subgraph(const Graph& g, std::span<const std::uint32_t> vertices) {
    if (vertices.size() <= 1) return true;
    std::map<std::uint32_t, char> visited;
    for (const auto v : vertices) visited[v] = 0;
    std::vector<std::uint32_t> stack{vertices.front()};
    visited[vertices.front()] = 1;
    std::size_t reached = 1;
    const auto& adj = g.adjacency();
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (const auto u : adj[v]) {
            auto it = visited.find(u);
            if (it != visited.end() && !it->second) {
                it->second = 1;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    return reached == vertices.size();
}

std::vector<double> connectivity_fraction(const MultiresApprox& m, const Graph& g,
                                          const std::vector<std::uint32_t>* active) {
    if (g.vertex_count() != m.dimension())
        throw Error("connectivity_fraction: graph has " + std::to_string(g.vertex_count()) +
                    " vertices, multiresolution has " + std::to_string(m.dimension()));
    std::vector<char> is_active(m.dimension(), active ? 0 : 1);
    if (active) {
        for (const auto v : *active) {
            if (v >= m.dimension()) throw Error("connectivity_fraction: active vertex out of range");
            is_active[v] = 1;
        }
    }
    std::vector<double> fractions;
    for (int j = 0; j <= m.depth(); ++j) {
        std::size_t counted = 0, connected = 0;
        for (const auto& set : m.vertex_sets(j)) {
            std::vector<std::uint32_t> kept;
            for (const auto v : set)
                if (is_active[v]) kept.push_back(v);
            if (kept.empty()) continue;
            ++counted;
            if (induces_connected_subgraph(g, kept)) ++connected;
        }
        fractions.push_back(counted == 0 ? 1.0 : static_cast<double>(connected) / static_cast<double>(counted));
    }
    return fractions;
}

}  // namespace haar

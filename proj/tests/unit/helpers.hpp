#pragma once

#include <numeric>
#include <vector>

#include "haarscat/multires.hpp"
#include "haarscat/rng.hpp"

namespace haar::testing {

inline Pairing random_pairing(Rng& rng, std::size_t nodes) {
    auto order = rng.permutation(nodes);
    std::vector<VertexPair> pairs;
    for (std::size_t k = 0; k < nodes; k += 2) pairs.emplace_back(order[k], order[k + 1]);
    std::sort(pairs.begin(), pairs.end(), [](const VertexPair& a, const VertexPair& b) {
        return std::min(a.first, a.second) < std::min(b.first, b.second);
    });
    return Pairing(std::move(pairs));
}

inline MultiresApprox random_multires(Rng& rng, std::size_t d, int J) {
    std::vector<Pairing> ps;
    for (int j = 0; j < J; ++j) ps.push_back(random_pairing(rng, d >> j));
    return build_from_pairings(d, std::move(ps));
}

inline Signal gaussian_signal(Rng& rng, std::size_t d) {
    Signal x(d);
    for (auto& v : x) v = rng.normal();
    return x;
}

inline Signal uniform_signal(Rng& rng, std::size_t d) {
    Signal x(d);
    for (auto& v : x) v = rng.uniform();
    return x;
}

}  // namespace haar::testing

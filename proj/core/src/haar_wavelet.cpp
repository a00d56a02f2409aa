#include "haarscat/haar_wavelet.hpp"

#include <cmath>
#include <string>

namespace haar {

double SparseWavelet::inner(std::span<const double> x) const {
    double s = 0.0;
    for (const auto v : positive) s += x[v];
    for (const auto v : negative) s -= x[v];
    return s;
}

std::size_t HaarBasis::size() const {
    std::size_t n = indicators.size();
    for (const auto& level : wavelets) n += level.size();
    return n;
}

std::vector<Signal> HaarBasis::dense() const {
    std::vector<Signal> out;
    out.reserve(size());
    for (const auto& set : indicators) {
        Signal v(d, 0.0);
        for (const auto i : set) v[i] = 1.0;
        out.push_back(std::move(v));
    }
    for (const auto& level : wavelets)
        for (const auto& w : level) {
            Signal v(d, 0.0);
            for (const auto i : w.positive) v[i] = 1.0;
            for (const auto i : w.negative) v[i] = -1.0;
            out.push_back(std::move(v));
        }
    return out;
}

HaarBasis build_basis(const MultiresApprox& m, int J) {
    if (J < 0 || J > m.depth()) throw Error("build_basis: J out of range");
    HaarBasis b;
    b.d = m.dimension();
    b.J = J;
    b.indicators = m.vertex_sets(J);
    b.top_node = m.node_of(J);
    b.wavelets.resize(J);
    for (int j = 1; j <= J; ++j) {
        const auto& lower = m.vertex_sets(j - 1);
        const Pairing& p = m.pairing(j - 1);
        auto& level = b.wavelets[j - 1];
        level.reserve(p.size());
        for (std::size_t n = 0; n < p.size(); ++n)
            level.push_back({j, static_cast<std::uint32_t>(n), lower[p[n].first], lower[p[n].second]});
    }
    return b;
}

std::vector<double> gram_matrix(const HaarBasis& basis) {
    const auto vecs = basis.dense();
    const std::size_t k = vecs.size();
    std::vector<double> g(k * k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t i = 0; i < basis.d; ++i) s += vecs[r][i] * vecs[c][i];
            g[r * k + c] = s;
        }
    return g;
}

std::vector<double> analyze(const HaarBasis& basis, std::span<const double> x) {
    if (x.size() != basis.d) throw Error("analyze: dimension mismatch");
    std::vector<double> c = order0_oracle(x, basis);
    for (const auto& level : basis.wavelets)
        for (const auto& w : level) c.push_back(w.inner(x));
    return c;
}

Signal synthesize(const HaarBasis& basis, std::span<const double> coefficients) {
    if (coefficients.size() != basis.size()) throw Error("synthesize: coefficient count mismatch");
    Signal x(basis.d, 0.0);
    std::size_t k = 0;
    for (const auto& set : basis.indicators) {
        const double a = coefficients[k++] / static_cast<double>(set.size());
        for (const auto v : set) x[v] += a;
    }
    for (const auto& level : basis.wavelets)
        for (const auto& w : level) {
            const double a = coefficients[k++] / w.norm_squared();
            for (const auto v : w.positive) x[v] += a;
            for (const auto v : w.negative) x[v] -= a;
        }
    return x;
}

std::vector<double> order0_oracle(std::span<const double> x, const HaarBasis& basis) {
    if (x.size() != basis.d) throw Error("order0_oracle: dimension mismatch");
    std::vector<double> out;
    out.reserve(basis.indicators.size());
    for (const auto& set : basis.indicators) {
        double s = 0.0;
        for (const auto v : set) s += x[v];
        out.push_back(s);
    }
    return out;
}

std::vector<double> order1_oracle(std::span<const double> x, const HaarBasis& basis, int j1) {
    if (x.size() != basis.d) throw Error("order1_oracle: dimension mismatch");
    if (j1 < 1 || j1 > basis.J) throw Error("order1_oracle: scale outside 1..J");
    std::vector<double> out(basis.indicators.size(), 0.0);
    for (const auto& w : basis.wavelets[j1 - 1]) out[basis.top_node[w.positive.front()]] += std::abs(w.inner(x));
    return out;
}

std::vector<double> extended_map(const ScatteringTensor& layer, const MultiresApprox& m) {
    const auto& sets = m.vertex_sets(layer.level);
    if (sets.size() != layer.rows) throw Error("extended_map: layer does not match the multiresolution");
    std::vector<double> out(m.dimension() * layer.cols);
    for (std::size_t n = 0; n < layer.rows; ++n)
        for (const auto v : sets[n])
            for (std::size_t q = 0; q < layer.cols; ++q) out[v * layer.cols + q] = layer(n, q);
    return out;
}

std::vector<double> cascade_oracle(std::span<const double> x, const MultiresApprox& m, int J,
                                   std::span<const int> scales) {
    if (x.size() != m.dimension()) throw Error("cascade_oracle: dimension mismatch");
    if (J < 0 || J > m.depth()) throw Error("cascade_oracle: J out of range");
    int previous = 0;
    for (const int j : scales) {
        if (j <= previous || j > J) throw Error("cascade_oracle: scales must be strictly increasing in 1..J");
        previous = j;
    }
    const HaarBasis basis = build_basis(m, J);
    if (scales.empty()) return order0_oracle(x, basis);

    const int finest = scales.back();
    const auto coarser = scales.first(scales.size() - 1);
    const int base_level = coarser.empty() ? 0 : coarser.back();

    // Order k-1 values on the level base_level nodes, spread to the vertices.
    const auto lower = cascade_oracle(x, m, base_level, coarser);
    ScatteringTensor layer;
    layer.level = base_level;
    layer.rows = lower.size();
    layer.cols = 1;
    layer.data = lower;
    const auto extended = extended_map(layer, m);
    const double repeat = std::ldexp(1.0, base_level);

    std::vector<double> out(basis.indicators.size(), 0.0);
    for (const auto& w : basis.wavelets[finest - 1])
        out[basis.top_node[w.positive.front()]] += std::abs(w.inner(extended)) / repeat;
    return out;
}

}  // namespace haar

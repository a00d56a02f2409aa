#include "haarscat/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace haar {

namespace {

constexpr double kTol = 1e-9;
constexpr std::size_t kMaxCandidates = 64;
constexpr std::size_t kMaxCombinations = 1 << 14;

using Vec = std::vector<double>;

bool same(double a, double b) { return nearly_equal(a, b, kTol); }

bool same_vec(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same(a[i], b[i])) return false;
    return true;
}

struct PairValues {
    std::vector<std::uint32_t> pair_of;  // node -> pair index
    std::vector<std::uint32_t> partner;
    std::vector<double> lo, hi;
};

// Unordered value pairs of one pairing; nullopt if a value that must be
// nonnegative is clearly negative.
std::optional<PairValues> pair_values(const Pairing& p, std::span<const double> sums,
                                      std::span<const double> diffs, bool nonneg) {
    PairValues out;
    out.pair_of.resize(p.node_count());
    out.partner = p.partner();
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double hi = 0.5 * (sums[k] + diffs[k]);
        const double lo = 0.5 * (sums[k] - diffs[k]);
        if (nonneg && lo < -kTol * std::max(1.0, std::abs(hi))) return std::nullopt;
        out.lo.push_back(lo);
        out.hi.push_back(hi);
        out.pair_of[p[k].first] = static_cast<std::uint32_t>(k);
        out.pair_of[p[k].second] = static_cast<std::uint32_t>(k);
    }
    return out;
}

// All node vectors whose pair operator images under p0 and p1 are the given
// sums and differences.
std::vector<Vec> solve_channel(const Pairing& p0, const Pairing& p1, std::span<const double> s0,
                               std::span<const double> a0, std::span<const double> s1, std::span<const double> a1,
                               bool nonneg) {
    const auto v0 = pair_values(p0, s0, a0, nonneg);
    const auto v1 = pair_values(p1, s1, a1, nonneg);
    if (!v0 || !v1) return {};
    const std::size_t n = p0.node_count();
    const std::uint32_t k0 = v0->pair_of[0];
    std::vector<double> starts{v0->lo[k0]};
    if (!same(v0->lo[k0], v0->hi[k0])) starts.push_back(v0->hi[k0]);

    std::vector<Vec> out;
    for (const double start : starts) {
        Vec x(n, 0.0);
        std::vector<char> set(n, 0);
        x[0] = start;
        set[0] = 1;
        std::uint32_t v = 0;
        bool use0 = true, ok = true;
        for (std::size_t step = 0; step < n && ok; ++step) {
            const PairValues& pv = use0 ? *v0 : *v1;
            const std::uint32_t k = pv.pair_of[v];
            const std::uint32_t w = pv.partner[v];
            double other;
            if (same(x[v], pv.lo[k])) other = pv.hi[k];
            else if (same(x[v], pv.hi[k])) other = pv.lo[k];
            else { ok = false; break; }
            if (!set[w]) {
                x[w] = other;
                set[w] = 1;
            } else if (!same(x[w], other)) {
                ok = false;
            }
            v = w;
            use0 = !use0;
        }
        if (!ok || v != 0) continue;
        bool complete = true;
        for (const char c : set) complete = complete && c;
        if (complete) out.push_back(std::move(x));
    }
    return out;
}

void add_unique(std::vector<Vec>& into, Vec v) {
    for (const auto& u : into)
        if (same_vec(u, v)) return;
    into.push_back(std::move(v));
}

}  // namespace

bool is_interlaced(const Pairing& p0, const Pairing& p1) {
    if (p0.node_count() != p1.node_count()) throw Error("is_interlaced: pairings cover different node counts");
    const std::size_t n = p0.node_count();
    if (n == 0) return false;
    const auto m0 = p0.partner();
    const auto m1 = p1.partner();
    std::size_t visited = 0;
    std::uint32_t v = 0;
    bool use0 = true;
    do {
        v = use0 ? m0[v] : m1[v];
        use0 = !use0;
        ++visited;
    } while (!(v == 0 && use0) && visited <= 2 * n);
    // The walk alternates edges, so it closes after an even number of steps
    // equal to the cycle length through node 0.
    return visited == n;
}

InterlacedFamily::InterlacedFamily(std::size_t d, std::vector<std::pair<Pairing, Pairing>> levels)
    : d_(d), levels_(std::move(levels)) {
    if (!is_power_of_two(d)) throw Error("InterlacedFamily: d must be a power of two");
    if (static_cast<int>(levels_.size()) > log2_exact(d)) throw Error("InterlacedFamily: depth exceeds log2(d)");
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        const auto& [p0, p1] = levels_[j];
        if (p0.node_count() != (d >> j) || p1.node_count() != (d >> j))
            throw Error("InterlacedFamily: level " + std::to_string(j) + " pairings have the wrong size");
        if (!is_interlaced(p0, p1))
            throw Error("InterlacedFamily: level " + std::to_string(j) + " pairings are not interlaced");
    }
}

MultiresApprox InterlacedFamily::member(std::size_t index) const {
    if (index >= member_count()) throw Error("InterlacedFamily::member: index out of range");
    std::vector<Pairing> pairings;
    for (int j = 0; j < depth(); ++j) pairings.push_back(pairing(j, (index >> j) & 1));
    return build_from_pairings(d_, std::move(pairings));
}

InterlacedFamily standard_interlaced_family(std::size_t d, int J) {
    if (!is_power_of_two(d) || d < 2) throw Error("standard_interlaced_family: d must be a power of two >= 2");
    if (J < 0 || J > log2_exact(d)) throw Error("standard_interlaced_family: J must lie in 0..log2(d)");
    std::vector<std::pair<Pairing, Pairing>> levels;
    for (int j = 0; j < J; ++j) {
        const auto nodes = static_cast<std::uint32_t>(d >> j);
        std::vector<VertexPair> even, odd;
        for (std::uint32_t n = 0; n < nodes / 2; ++n) {
            even.emplace_back(2 * n, 2 * n + 1);
            const std::uint32_t a = 2 * n + 1, b = (2 * n + 2) % nodes;
            odd.emplace_back(std::min(a, b), std::max(a, b));
        }
        std::sort(odd.begin(), odd.end());
        levels.emplace_back(Pairing(std::move(even)), Pairing(std::move(odd)));
    }
    return InterlacedFamily(d, std::move(levels));
}

ScatteringTensor invert_layer(const ScatteringTensor& s0, const ScatteringTensor& s1, const Pairing& p0,
                              const Pairing& p1) {
    if (s0.rows != s1.rows || s0.cols != s1.cols || s0.level != s1.level)
        throw Error("invert_layer: tensors differ in shape or level");
    if (s0.level < 1) throw Error("invert_layer: nothing below layer 0");
    if (p0.size() != s0.rows || p1.size() != s0.rows || s0.cols % 2 != 0)
        throw Error("invert_layer: pairings do not match the tensors");
    const int level = s0.level - 1;
    ScatteringTensor out;
    out.level = level;
    out.rows = p0.node_count();
    out.cols = s0.cols / 2;
    out.data.assign(out.rows * out.cols, 0.0);
    for (std::size_t q = 0; q < out.cols; ++q) {
        const auto sums0 = s0.column(2 * q), diffs0 = s0.column(2 * q + 1);
        const auto sums1 = s1.column(2 * q), diffs1 = s1.column(2 * q + 1);
        auto sols = solve_channel(p0, p1, sums0, diffs0, sums1, diffs1, level > 0 && q > 0);
        std::vector<Vec> unique;
        for (auto& s : sols) add_unique(unique, std::move(s));
        if (unique.empty())
            throw ReconstructionError(ReconstructionError::Kind::Inconsistent, level,
                                      "invert_layer: channel " + std::to_string(q) + " has no consistent solution");
        if (unique.size() > 1)
            throw ReconstructionError(ReconstructionError::Kind::Ambiguous, level,
                                      "invert_layer: channel " + std::to_string(q) + " has " +
                                          std::to_string(unique.size()) + " solutions");
        for (std::size_t n = 0; n < out.rows; ++n) out(n, q) = unique.front()[n];
    }
    return out;
}

Signal reconstruct(std::span<const ScatteringTensor> outputs, const InterlacedFamily& family,
                   ReconstructionTrace* trace) {
    const int J = family.depth();
    const std::size_t d = family.dimension();
    if (outputs.size() != family.member_count())
        throw Error("reconstruct: expected " + std::to_string(family.member_count()) + " outputs, got " +
                    std::to_string(outputs.size()));
    for (const auto& t : outputs)
        if (t.level != J || t.rows != (d >> J) || t.cols != (std::size_t{1} << J))
            throw Error("reconstruct: output tensor has the wrong shape");
    if (trace) trace->max_candidates.assign(J, 0);

    // layers[prefix][q] = candidate columns of S_j under the prefix's pairings.
    using Channels = std::vector<std::vector<Vec>>;
    std::vector<Channels> layers(outputs.size());
    for (std::size_t e = 0; e < outputs.size(); ++e) {
        layers[e].resize(outputs[e].cols);
        for (std::size_t q = 0; q < outputs[e].cols; ++q) layers[e][q].push_back(outputs[e].column(q));
    }

    for (int j = J - 1; j >= 0; --j) {
        const Pairing& p0 = family.pairing(j, 0);
        const Pairing& p1 = family.pairing(j, 1);
        const std::size_t prefixes = std::size_t{1} << j;
        std::vector<Channels> lower(prefixes);
        for (std::size_t prefix = 0; prefix < prefixes; ++prefix) {
            const Channels& c0 = layers[prefix];
            const Channels& c1 = layers[prefix | (std::size_t{1} << j)];
            Channels& out = lower[prefix];
            out.resize(c0.size() / 2);
            for (std::size_t q = 0; q < out.size(); ++q) {
                const auto& A = c0[2 * q];
                const auto& B = c0[2 * q + 1];
                const auto& C = c1[2 * q];
                const auto& D = c1[2 * q + 1];
                if (A.size() * B.size() * C.size() * D.size() > kMaxCombinations)
                    throw ReconstructionError(ReconstructionError::Kind::Ambiguous, j,
                                              "reconstruct: too many candidate combinations at level " +
                                                  std::to_string(j));
                for (const auto& a : A)
                    for (const auto& b : B)
                        for (const auto& c : C)
                            for (const auto& dd : D)
                                for (auto& s : solve_channel(p0, p1, a, b, c, dd, j > 0 && q > 0))
                                    add_unique(out[q], std::move(s));
                if (out[q].empty())
                    throw ReconstructionError(ReconstructionError::Kind::Inconsistent, j,
                                              "reconstruct: no consistent solution at level " + std::to_string(j));
                if (out[q].size() > kMaxCandidates)
                    throw ReconstructionError(ReconstructionError::Kind::Ambiguous, j,
                                              "reconstruct: too many candidates at level " + std::to_string(j));
                if (trace) trace->max_candidates[j] = std::max(trace->max_candidates[j], out[q].size());
            }
        }
        layers = std::move(lower);
    }

    if (J == 0) return outputs.front().column(0);
    const auto& finals = layers.front().front();
    if (finals.size() > 1)
        throw ReconstructionError(ReconstructionError::Kind::Ambiguous, 0,
                                  "reconstruct: " + std::to_string(finals.size()) +
                                      " signals produce the same scattering outputs");
    return finals.front();
}

}  // namespace haar

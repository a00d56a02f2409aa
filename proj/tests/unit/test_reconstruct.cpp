#include <gtest/gtest.h>

#include <cmath>

#include "haarscat/reconstruct.hpp"
#include "helpers.hpp"

using namespace haar;
using haar::testing::gaussian_signal;
using haar::testing::random_pairing;

namespace {

// Independent closure check: no proper nonempty subset is closed under both pairings.
bool interlaced_by_subsets(const Pairing& p0, const Pairing& p1) {
    const std::size_t n = p0.node_count();
    const auto m0 = p0.partner(), m1 = p1.partner();
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
        bool closed = true;
        for (std::size_t v = 0; v < n && closed; ++v)
            if (mask >> v & 1) closed = (mask >> m0[v] & 1) && (mask >> m1[v] & 1);
        if (closed) return false;
    }
    return true;
}

std::vector<ScatteringTensor> family_outputs(const Signal& x, const InterlacedFamily& fam) {
    std::vector<ScatteringTensor> out;
    for (std::size_t e = 0; e < fam.member_count(); ++e) out.push_back(transform_top(x, fam.member(e), fam.depth()));
    return out;
}

double max_abs_diff(const Signal& a, const Signal& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST(Interlaced, Examples) {
    EXPECT_TRUE(is_interlaced(Pairing({{0, 1}, {2, 3}}), Pairing({{1, 2}, {3, 0}})));
    EXPECT_FALSE(is_interlaced(Pairing({{0, 1}, {2, 3}}), Pairing({{0, 1}, {2, 3}})));
    EXPECT_THROW(is_interlaced(Pairing({{0, 1}}), Pairing({{0, 1}, {2, 3}})), Error);
}

TEST(Interlaced, CycleTestAgreesWithSubsetClosure) {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 * (1 + rng.below(6));
        const auto p0 = random_pairing(rng, n), p1 = random_pairing(rng, n);
        EXPECT_EQ(is_interlaced(p0, p1), interlaced_by_subsets(p0, p1));
    }
    const auto fam = standard_interlaced_family(8, 1);
    EXPECT_TRUE(interlaced_by_subsets(fam.level(0).first, fam.level(0).second));
}

TEST(Family, StandardConstruction) {
    const auto fam = standard_interlaced_family(4, 1);
    EXPECT_EQ(fam.member_count(), 2u);
    EXPECT_EQ(fam.level(0).first.pairs(), (std::vector<VertexPair>{{0, 1}, {2, 3}}));
    EXPECT_EQ(fam.level(0).second.pairs(), (std::vector<VertexPair>{{0, 3}, {1, 2}}));
    for (std::size_t d = 2; d <= 64; d *= 2)
        for (int J = 0; J <= std::min(6, log2_exact(d)); ++J) {
            const auto f = standard_interlaced_family(d, J);
            EXPECT_EQ(f.member_count(), std::size_t{1} << J);
            for (int j = 0; j < J; ++j) EXPECT_TRUE(is_interlaced(f.level(j).first, f.level(j).second));
        }
    EXPECT_THROW(standard_interlaced_family(12, 1), Error);
    EXPECT_THROW(standard_interlaced_family(8, 4), Error);
}

TEST(Family, MemberUsesSelectedPairings) {
    const auto fam = standard_interlaced_family(16, 3);
    const auto m = fam.member(0b101);
    EXPECT_EQ(m.pairing(0), fam.level(0).second);
    EXPECT_EQ(m.pairing(1), fam.level(1).first);
    EXPECT_EQ(m.pairing(2), fam.level(2).second);
}

TEST(InvertLayer, RecoversFourPoints) {
    const Pairing p0({{0, 1}, {2, 3}}), p1({{0, 3}, {1, 2}});
    const Signal x{1, 2, 3, 4};
    const auto s0 = scatter_step(input_layer(x), p0), s1 = scatter_step(input_layer(x), p1);
    EXPECT_EQ(invert_layer(s0, s1, p0, p1).data, x);
}

TEST(InvertLayer, ConstantIsUnambiguous) {
    const Pairing p0({{0, 1}, {2, 3}}), p1({{0, 3}, {1, 2}});
    const Signal x(4, 2.5);
    const auto s0 = scatter_step(input_layer(x), p0), s1 = scatter_step(input_layer(x), p1);
    EXPECT_EQ(invert_layer(s0, s1, p0, p1).data, x);
}

TEST(InvertLayer, AlternatingPatternIsAmbiguous) {
    const Pairing p0({{0, 1}, {2, 3}}), p1({{0, 3}, {1, 2}});
    const Signal x{0, 1, 0, 1};
    const auto s0 = scatter_step(input_layer(x), p0), s1 = scatter_step(input_layer(x), p1);
    try {
        invert_layer(s0, s1, p0, p1);
        FAIL() << "expected an ambiguity";
    } catch (const ReconstructionError& e) {
        EXPECT_EQ(e.kind(), ReconstructionError::Kind::Ambiguous);
        EXPECT_EQ(e.level(), 0);
    }
}

TEST(InvertLayer, InconsistentInputs) {
    const Pairing p0({{0, 1}, {2, 3}}), p1({{0, 3}, {1, 2}});
    const auto s0 = scatter_step(input_layer(Signal{1, 2, 3, 4}), p0);
    const auto s1 = scatter_step(input_layer(Signal{5, 9, 3, 4}), p1);
    try {
        invert_layer(s0, s1, p0, p1);
        FAIL() << "expected an inconsistency";
    } catch (const ReconstructionError& e) {
        EXPECT_EQ(e.kind(), ReconstructionError::Kind::Inconsistent);
    }
}

TEST(InvertLayer, RegeneratesBothInputs) {
    Rng rng(2);
    const auto fam = standard_interlaced_family(32, 1);
    const auto& [p0, p1] = fam.level(0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto x = gaussian_signal(rng, 32);
        const auto s0 = scatter_step(input_layer(x), p0), s1 = scatter_step(input_layer(x), p1);
        const auto back = invert_layer(s0, s1, p0, p1);
        for (std::size_t i = 0; i < 32; ++i) EXPECT_NEAR(back.data[i], x[i], 1e-12);
        const auto r0 = scatter_step(back, p0), r1 = scatter_step(back, p1);
        for (std::size_t i = 0; i < s0.data.size(); ++i) {
            EXPECT_NEAR(r0.data[i], s0.data[i], 1e-12);
            EXPECT_NEAR(r1.data[i], s1.data[i], 1e-12);
        }
    }
}

TEST(Reconstruct, DepthZeroIsIdentity) {
    const auto fam = standard_interlaced_family(8, 0);
    const Signal x{1, -2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(reconstruct(family_outputs(x, fam), fam), x);
}

TEST(Reconstruct, ConstantSignal) {
    const auto fam = standard_interlaced_family(16, 3);
    const Signal x(16, 0.75);
    const auto back = reconstruct(family_outputs(x, fam), fam);
    EXPECT_LT(max_abs_diff(back, x), 1e-12);
}

TEST(Reconstruct, GaussianRoundTripBelowFullDepth) {
    Rng rng(3);
    for (const auto [d, J] : {std::pair<std::size_t, int>{8, 2}, {16, 3}, {32, 4}, {64, 5}}) {
        const auto fam = standard_interlaced_family(d, J);
        for (int trial = 0; trial < 10; ++trial) {
            const auto x = gaussian_signal(rng, d);
            const auto back = reconstruct(family_outputs(x, fam), fam);
            EXPECT_LT(max_abs_diff(back, x), 1e-8) << "d=" << d << " J=" << J;
        }
    }
}

TEST(Reconstruct, FullDepthHalfShiftIsIndistinguishable) {
    // At J = log2(d) the cyclic family cannot tell x from x rotated by d/2:
    // both produce identical outputs on every member.
    Rng rng(4);
    const std::size_t d = 16;
    const auto fam = standard_interlaced_family(d, 4);
    const auto x = gaussian_signal(rng, d);
    Signal shifted(d);
    for (std::size_t i = 0; i < d; ++i) shifted[i] = x[(i + d / 2) % d];
    const auto a = family_outputs(x, fam), b = family_outputs(shifted, fam);
    for (std::size_t e = 0; e < a.size(); ++e)
        for (std::size_t k = 0; k < a[e].data.size(); ++k) EXPECT_NEAR(a[e].data[k], b[e].data[k], 1e-12);
    try {
        reconstruct(a, fam);
        FAIL() << "expected an ambiguity";
    } catch (const ReconstructionError& e) {
        EXPECT_EQ(e.kind(), ReconstructionError::Kind::Ambiguous);
    }
}

TEST(Reconstruct, BinaryInputsRecoverOrReportAmbiguity) {
    Rng rng(5);
    const auto fam = standard_interlaced_family(16, 3);
    for (int trial = 0; trial < 20; ++trial) {
        Signal x(16);
        for (auto& v : x) v = static_cast<double>(rng.below(2));
        try {
            const auto back = reconstruct(family_outputs(x, fam), fam);
            EXPECT_LT(max_abs_diff(back, x), 1e-9);
        } catch (const ReconstructionError& e) {
            EXPECT_EQ(e.kind(), ReconstructionError::Kind::Ambiguous);
        }
    }
}

TEST(Reconstruct, WrongOutputCount) {
    const auto fam = standard_interlaced_family(8, 2);
    EXPECT_THROW(reconstruct(std::vector<ScatteringTensor>(3), fam), Error);
}

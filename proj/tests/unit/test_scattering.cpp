#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <filesystem>

#include "haarscat/scattering.hpp"
#include "helpers.hpp"

using namespace haar;
using haar::testing::gaussian_signal;
using haar::testing::random_multires;
using haar::testing::uniform_signal;

namespace {

MultiresApprox four_point() { return build_from_pairings(4, {Pairing({{0, 1}, {2, 3}}), Pairing({{0, 1}})}); }

double norm2(std::span<const double> v) {
    double s = 0;
    for (const double x : v) s += x * x;
    return s;
}

}  // namespace

TEST(HaarPair, Values) {
    EXPECT_EQ(haar_pair(3, 1), std::make_pair(4.0, 2.0));
    EXPECT_EQ(haar_pair(1, 3), std::make_pair(4.0, 2.0));
    EXPECT_EQ(haar_pair(2.5, 2.5), std::make_pair(5.0, 0.0));
}

TEST(InvertPair, Values) {
    EXPECT_EQ(invert_pair(4, 2), std::make_pair(3.0, 1.0));
    EXPECT_EQ(invert_pair(5, 0), std::make_pair(2.5, 2.5));
    EXPECT_THROW(invert_pair(1, -1), Error);
}

TEST(InvertPair, RoundTrip) {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(), s = a + 2 * rng.uniform();
        const auto [hi, lo] = invert_pair(s, a);
        const auto [s2, a2] = haar_pair(hi, lo);
        EXPECT_NEAR(s2, s, 1e-14);
        EXPECT_NEAR(a2, a, 1e-14);
    }
}

TEST(Transform, HandCascade) {
    const Signal x{1, 2, 3, 4};
    const auto layers = transform(x, four_point(), 2);
    ASSERT_EQ(layers.size(), 3u);
    EXPECT_EQ(layers[1].data, (std::vector<double>{3, 1, 7, 1}));
    EXPECT_EQ(layers[2].data, (std::vector<double>{10, 4, 2, 0}));
    EXPECT_EQ(layers[2].rows, 1u);
    EXPECT_EQ(layers[2].cols, 4u);
}

TEST(Transform, ConstantSignal) {
    Rng rng(2);
    const auto m = random_multires(rng, 32, 5);
    const Signal x(32, 1.5);
    const auto top = transform_top(x, m, 5);
    for (std::size_t n = 0; n < top.rows; ++n) {
        EXPECT_EQ(top(n, 0), 32 * 1.5);
        for (std::size_t q = 1; q < top.cols; ++q) EXPECT_EQ(top(n, q), 0.0);
    }
}

TEST(Transform, Errors) {
    EXPECT_THROW(transform(Signal(3, 0.0), four_point(), 1), Error);
    EXPECT_THROW(transform(Signal(4, 0.0), four_point(), 3), Error);
}

TEST(Transform, EnergyIdentityEveryLayer) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = std::size_t{1} << (1 + rng.below(7));
        const int J = log2_exact(d);
        const auto m = random_multires(rng, d, J);
        const auto x = gaussian_signal(rng, d);
        const auto layers = transform(x, m, J);
        for (int j = 0; j <= J; ++j)
            EXPECT_TRUE(nearly_equal(layers[j].norm_squared(), std::ldexp(norm2(x), j), 1e-10));
    }
}

TEST(Transform, Contraction) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = random_multires(rng, 32, 5);
        const auto x = gaussian_signal(rng, 32), y = gaussian_signal(rng, 32);
        const auto sx = transform_top(x, m, 5), sy = transform_top(y, m, 5);
        double lhs = 0, rhs = 0;
        for (std::size_t i = 0; i < sx.data.size(); ++i) lhs += std::pow(sx.data[i] - sy.data[i], 2);
        for (std::size_t i = 0; i < 32; ++i) rhs += std::pow(x[i] - y[i], 2);
        EXPECT_LE(std::sqrt(lhs), std::sqrt(32.0 * rhs) + 1e-12);
    }
}

TEST(Transform, DifferenceChannelsNonnegative) {
    Rng rng(5);
    const auto m = random_multires(rng, 64, 6);
    const auto layers = transform(gaussian_signal(rng, 64), m, 6);
    for (int j = 1; j <= 6; ++j)
        for (std::size_t n = 0; n < layers[j].rows; ++n)
            for (std::size_t q = 1; q < layers[j].cols; ++q) EXPECT_GE(layers[j](n, q), 0.0);
}

TEST(Transform, NonnegativeInputsGiveNonnegativeLayers) {
    Rng rng(6);
    const auto m = random_multires(rng, 64, 6);
    const auto layers = transform(uniform_signal(rng, 64), m, 6);
    for (int j = 1; j <= 6; ++j)
        for (const double v : layers[j].data) EXPECT_GE(v, 0.0);
}

TEST(Transform, SwappingPairOrderLeavesOutputUnchanged) {
    Rng rng(7);
    const auto m = random_multires(rng, 16, 4);
    std::vector<Pairing> swapped;
    for (const auto& p : m.pairings()) {
        std::vector<VertexPair> pairs;
        for (const auto& [a, b] : p.pairs()) pairs.emplace_back(b, a);
        swapped.emplace_back(std::move(pairs));
    }
    const auto m2 = build_from_pairings(16, swapped);
    const auto x = gaussian_signal(rng, 16);
    EXPECT_EQ(transform_top(x, m, 4).data, transform_top(x, m2, 4).data);
}

TEST(Transform, SparsityIdentityOnNonnegativeLayers) {
    Rng rng(8);
    const auto m = random_multires(rng, 32, 5);
    const auto layers = transform(uniform_signal(rng, 32), m, 5);
    for (int j = 0; j < 5; ++j) {
        double tv = 0;
        for (const auto& [a, b] : m.pairing(j).pairs())
            for (std::size_t q = 0; q < layers[j].cols; ++q) tv += std::abs(layers[j](a, q) - layers[j](b, q));
        EXPECT_NEAR(layers[j + 1].norm_l1(), layers[j].norm_l1() + tv, 1e-10 * layers[j + 1].norm_l1());
    }
}

TEST(OrderIndex, Examples) {
    EXPECT_EQ(order_of(0, 3).order, 0);
    const auto a = order_of(4, 3);
    EXPECT_EQ(a.order, 1);
    EXPECT_EQ(a.scales, (std::vector<int>{1}));
    const auto b = order_of(6, 3);
    EXPECT_EQ(b.order, 2);
    EXPECT_EQ(b.scales, (std::vector<int>{1, 2}));
    EXPECT_THROW(order_of(8, 3), Error);
}

TEST(OrderIndex, ColumnOfInvertsOrderOf) {
    for (int J = 0; J <= 8; ++J)
        for (std::uint64_t q = 0; q < (std::uint64_t{1} << J); ++q) {
            const auto idx = order_of(q, J);
            EXPECT_EQ(column_of(idx.scales, J), q);
            EXPECT_EQ(idx.order == 0, q == 0);
        }
    const std::vector<int> bad{2, 1};
    EXPECT_THROW(column_of(bad, 3), Error);
}

TEST(CountOrder, Examples) {
    EXPECT_EQ(count_order(3, 1, 8), 3u);
    EXPECT_EQ(count_order(4, 0, 64), 4u);
    for (int J = 0; J <= 10; ++J) {
        std::uint64_t total = 0;
        for (int m = 0; m <= J; ++m) total += count_order(J, m, 1024);
        EXPECT_EQ(total, 1024u);
    }
}

TEST(CountOrder, MatchesEnumeration) {
    for (int J = 0; J <= 10; ++J) {
        std::vector<std::uint64_t> hist(J + 1, 0);
        for (std::uint64_t q = 0; q < (std::uint64_t{1} << J); ++q) ++hist[order_of(q, J).order];
        for (int m = 0; m <= J; ++m) EXPECT_EQ(hist[m] * (1024u >> J), count_order(J, m, 1024));
    }
}

TEST(Truncate, Counts) {
    ScatteringTensor t;
    t.level = 5;
    t.rows = 1;
    t.cols = 32;
    t.data.assign(32, 1.0);
    EXPECT_EQ(truncate_by_order(t, 5).size(), 32u);
    EXPECT_EQ(truncate_by_order(t, 4).size(), 31u);
    EXPECT_EQ(truncate_by_order(t, 0).size(), 1u);
}

TEST(Truncate, LexicographicOrder) {
    Rng rng(9);
    const auto m = random_multires(rng, 16, 2);
    const auto top = transform_top(gaussian_signal(rng, 16), m, 2);
    const auto flat = truncate_by_order(top, 1);
    ASSERT_EQ(flat.size(), 4u * 3u);
    std::size_t k = 0;
    for (std::size_t n = 0; n < 4; ++n)
        for (const std::size_t q : {0u, 1u, 2u}) EXPECT_EQ(flat[k++], top(n, q));
}

TEST(Boolean, TruthTable) {
    EXPECT_EQ(bool_pair(true, false), std::make_pair(true, true));
    EXPECT_EQ(bool_pair(true, true), std::make_pair(true, false));
    EXPECT_EQ(bool_pair(false, false), std::make_pair(false, false));
}

TEST(Boolean, ConstantTrueHasFalseXorChannels) {
    const std::vector<std::uint8_t> x(4, 1);
    const auto layers = boolean_transform(x, four_point(), 2);
    const auto& top = layers[2];
    EXPECT_TRUE(top(0, 0));
    for (std::size_t q = 1; q < 4; ++q) EXPECT_FALSE(top(0, q));
}

TEST(FeatureFile, RoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "haarscat_feature_test";
    std::filesystem::create_directories(dir);
    FeatureLayout layout{3, 2, "abc", 2, 3};
    const std::vector<double> v{1, -2.5, 3e-300, 4, 5, 6};
    write_feature_file(dir / "f.bin", layout, v);
    FeatureLayout back;
    EXPECT_EQ(read_feature_file(dir / "f.bin", back), v);
    EXPECT_EQ(back.multires_id, "abc");
    EXPECT_EQ(back.columns, 3u);
    EXPECT_EQ(std::filesystem::file_size(dir / "f.bin"), 48u);
    std::filesystem::remove_all(dir);
}

#include <gtest/gtest.h>

#include <cmath>

#include "haarscat/features.hpp"
#include "haarscat/scattering.hpp"
#include "helpers.hpp"

using namespace haar;

namespace {

FeatureMatrix random_features(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    FeatureMatrix f;
    f.values.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) f.values(i, c) = rng.normal();
    for (Eigen::Index c = 0; c < cols; ++c) f.columns.push_back({0, 0, static_cast<std::uint32_t>(c)});
    return f;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, int classes) {
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.below(classes));
    return y;
}

Eigen::VectorXd indicator(std::span<const int> labels, int c) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) y(i) = labels[i] == c ? 1.0 : 0.0;
    return y;
}

// Selected features on the training rows, column k = phi_k.
Eigen::MatrixXd selected_values(const PlsProblem& p, const ClassSelection& s) {
    const auto K = static_cast<Eigen::Index>(s.columns.size());
    Eigen::MatrixXd Z(p.transformed().rows(), K);
    for (Eigen::Index r = 0; r < K; ++r) Z.col(r) = p.transformed().col(s.columns[r]);
    return Z * s.coefficients.transpose();
}

}  // namespace

TEST(Pls, PerfectColumnSelectedFirst) {
    Rng rng(1);
    auto f = random_features(rng, 40, 6);
    const auto labels = random_labels(rng, 40, 2);
    for (Eigen::Index i = 0; i < 40; ++i) f.values(i, 4) = labels[i] == 1 ? 1.0 : 0.0;
    PlsOptions raw;
    raw.standardize = false;
    const auto s = pls_select(f, labels, 1, 3, raw);
    EXPECT_EQ(s.columns.front(), 4u);
    EXPECT_NEAR(s.mse.front(), 0.0, 1e-12);
}

TEST(Pls, DuplicateColumnNeverSelectedTwice) {
    Rng rng(2);
    auto f = random_features(rng, 30, 5);
    f.values.col(3) = f.values.col(1);
    const auto labels = random_labels(rng, 30, 3);
    const auto s = pls_select(f, labels, 0, 5);
    EXPECT_EQ(s.columns.size(), 4u);
    const bool has1 = std::find(s.columns.begin(), s.columns.end(), 1u) != s.columns.end();
    const bool has3 = std::find(s.columns.begin(), s.columns.end(), 3u) != s.columns.end();
    EXPECT_NE(has1, has3);
}

TEST(Pls, ConstantColumnsAreExcluded) {
    Rng rng(3);
    auto f = random_features(rng, 30, 4);
    f.values.col(2).setConstant(7.0);
    const auto labels = random_labels(rng, 30, 2);
    PlsProblem p(f, labels);
    EXPECT_EQ(p.standardization().scale[2], 0.0);
    const auto s = p.select(1, 4);
    EXPECT_EQ(s.columns.size(), 3u);
    for (const auto c : s.columns) EXPECT_NE(c, 2u);
}

TEST(Pls, OrthonormalOnTrainingRows) {
    Rng rng(4);
    const auto f = random_features(rng, 60, 25);
    const auto labels = random_labels(rng, 60, 4);
    for (const bool standardize : {true, false}) {
        PlsOptions o;
        o.standardize = standardize;
        PlsProblem p(f, labels, o);
        const auto s = p.select(2, 10);
        const Eigen::MatrixXd phi = selected_values(p, s);
        const Eigen::MatrixXd gram = phi.transpose() * phi;
        EXPECT_LT((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Pls, GreedyStepIsExhaustiveMaximum) {
    Rng rng(5);
    const auto f = random_features(rng, 50, 20);
    const auto labels = random_labels(rng, 50, 3);
    PlsProblem p(f, labels);
    const auto s = p.select(0, 8);
    const Eigen::VectorXd y = indicator(labels, 0);
    const Eigen::MatrixXd& Z = p.transformed();
    Eigen::MatrixXd Q(50, 0);
    for (std::size_t k = 0; k < s.columns.size(); ++k) {
        double best = -1;
        for (Eigen::Index c = 0; c < 20; ++c) {
            if (std::find(s.columns.begin(), s.columns.begin() + k, c) != s.columns.begin() + k) continue;
            Eigen::VectorXd r = Z.col(c) - Q * (Q.transpose() * Z.col(c));
            r -= Q * (Q.transpose() * r);
            best = std::max(best, std::abs(y.dot(r)) / r.norm());
        }
        EXPECT_NEAR(s.correlations[k], best, 1e-10);
        Eigen::VectorXd r = Z.col(s.columns[k]) - Q * (Q.transpose() * Z.col(s.columns[k]));
        r /= r.norm();
        EXPECT_NEAR(std::abs(y.dot(r)), best, 1e-10);
        Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
        Q.col(Q.cols() - 1) = r;
    }
}

TEST(Pls, MseMatchesLeastSquaresAndDecreases) {
    Rng rng(6);
    const auto f = random_features(rng, 50, 20);
    const auto labels = random_labels(rng, 50, 2);
    PlsOptions raw;
    raw.standardize = false;
    const auto s = pls_select(f, labels, 1, 5, raw);
    const Eigen::VectorXd y = indicator(labels, 1);
    for (std::size_t k = 1; k <= s.columns.size(); ++k) {
        Eigen::MatrixXd A(50, static_cast<Eigen::Index>(k));
        for (std::size_t r = 0; r < k; ++r) A.col(r) = f.values.col(s.columns[r]);
        const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);
        const double mse = (y - A * beta).squaredNorm() / 50.0;
        EXPECT_NEAR(s.mse[k - 1], mse, 1e-8);
        if (k > 1) EXPECT_LE(s.mse[k - 1], s.mse[k - 2] + 1e-15);
    }
}

TEST(Pls, TiesGoToLowestColumn) {
    FeatureMatrix f;
    f.values.resize(4, 3);
    f.values << 1, 1, 0, 0, 0, 1, 1, 1, 0, 0, 0, 1;
    f.columns = {{0, 0, 0}, {0, 0, 1}, {0, 0, 2}};
    const std::vector<int> labels{1, 0, 1, 0};
    PlsOptions raw;
    raw.standardize = false;
    EXPECT_EQ(pls_select(f, labels, 1, 1, raw).columns.front(), 0u);
}

TEST(Pls, MissingClass) {
    Rng rng(7);
    const auto f = random_features(rng, 10, 3);
    const std::vector<int> labels(10, 0);
    EXPECT_THROW(pls_select(f, labels, 5, 2), Error);
}

TEST(Dictionary, SizeAndProjectionConsistency) {
    Rng rng(8);
    const auto f = random_features(rng, 80, 30);
    const auto labels = random_labels(rng, 80, 4);
    const auto dict = select_dictionary(f, labels, 6, {}, 2);
    EXPECT_EQ(dict.size(), 24u);
    PlsProblem p(f, labels);
    const Eigen::MatrixXd proj = project_rows(dict, f.values);
    Eigen::Index at = 0;
    for (const auto& c : dict.classes) {
        const Eigen::MatrixXd phi = selected_values(p, c);
        EXPECT_LT((proj.middleCols(at, phi.cols()) - phi).cwiseAbs().maxCoeff(), 1e-10);
        at += phi.cols();
    }
}

TEST(Dictionary, SingleClassEqualsSelection) {
    Rng rng(9);
    const auto f = random_features(rng, 20, 8);
    const std::vector<int> labels(20, 3);
    const auto dict = select_dictionary(f, labels, 4);
    ASSERT_EQ(dict.classes.size(), 1u);
    EXPECT_EQ(dict.classes[0].columns, pls_select(f, labels, 3, 4).columns);
}

TEST(Dictionary, ProjectionIsLinearAfterCentering) {
    Rng rng(10);
    const auto f = random_features(rng, 40, 10);
    const auto labels = random_labels(rng, 40, 2);
    PlsOptions raw;
    raw.standardize = false;
    const auto dict = select_dictionary(f, labels, 3, raw);
    std::vector<double> zero(10, 0.0), u(10), v(10), w(10);
    for (int i = 0; i < 10; ++i) {
        u[i] = rng.normal();
        v[i] = rng.normal();
        w[i] = u[i] + v[i];
    }
    EXPECT_EQ(project(dict, zero).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT((project(dict, w) - project(dict, u) - project(dict, v)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(project(dict, std::vector<double>(3, 0.0)), Error);
}

TEST(Dictionary, JsonRoundTrip) {
    Rng rng(11);
    const auto f = random_features(rng, 30, 12);
    const auto labels = random_labels(rng, 30, 3);
    const auto dict = select_dictionary(f, labels, 4);
    const auto back = dictionary_from_json(nlohmann::json::parse(dictionary_to_json(dict).dump()));
    EXPECT_EQ(back.size(), dict.size());
    std::vector<double> row(12);
    for (auto& v : row) v = rng.normal();
    EXPECT_LT((project(back, row) - project(dict, row)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Features, CountsAndConstantSignals) {
    Rng rng(12);
    std::vector<MultiresApprox> ens{haar::testing::random_multires(rng, 32, 5), haar::testing::random_multires(rng, 32, 5)};
    const std::vector<Signal> xs{Signal(32, 1.0), haar::testing::gaussian_signal(rng, 32)};
    const auto f = compute_features(xs, ens, 3, 2);
    std::uint64_t per = 0;
    for (int m = 0; m <= 2; ++m) per += count_order(3, m, 32);
    EXPECT_EQ(static_cast<std::uint64_t>(f.values.cols()), 2 * per);
    for (Eigen::Index c = 0; c < f.values.cols(); ++c)
        if (f.columns[c].q != 0) EXPECT_EQ(f.values(0, c), 0.0);
    const auto full = compute_features(xs, std::span(ens).first(1), 5, 5);
    EXPECT_EQ(full.values.cols(), 32);
}

// Acceptance suite: one PASS/FAIL line per criterion.
//
//   haarscat_acceptance            run every criterion
//   haarscat_acceptance 3 9        run only the listed criteria
//
// Exit status is nonzero when any selected criterion fails. A criterion that
// passes its checks but overruns its time budget also fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "haarscat/blossom.hpp"
#include "haarscat/classify.hpp"
#include "haarscat/datasets.hpp"
#include "haarscat/features.hpp"
#include "haarscat/haar_wavelet.hpp"
#include "haarscat/multires.hpp"
#include "haarscat/pairing_learn.hpp"
#include "haarscat/parallel.hpp"
#include "haarscat/reconstruct.hpp"
#include "haarscat/rng.hpp"
#include "haarscat/scattering.hpp"

#include "../unit/helpers.hpp"

using namespace haar;
using namespace haar::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double norm2(std::span<const double> v) {
    double s = 0;
    for (const double x : v) s += x * x;
    return s;
}

std::size_t threads() { return resolve_threads(0); }

// 1 -----------------------------------------------------------------------
Outcome energy_preservation() {
    Rng rng(101);
    double worst = 0;
    std::size_t checked = 0;
    for (const std::size_t d : {8u, 16u, 32u, 64u}) {
        const int L = log2_exact(d);
        for (int i = 0; i < 1000; ++i) {
            const int J = 1 + static_cast<int>(rng.below(L));
            const auto m = random_multires(rng, d, L);
            const auto x = gaussian_signal(rng, d);
            const double lhs = transform_top(x, m, J).norm_squared();
            const double rhs = std::ldexp(norm2(x), J);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
            ++checked;
        }
    }
    return {worst <= 1e-10, fmt("%zu signals, worst relative deviation %.3g (tol 1e-10)", checked, worst)};
}

// 2 -----------------------------------------------------------------------
Outcome contraction() {
    Rng rng(202);
    std::size_t violations = 0;
    double worst_ratio = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = std::size_t{8} << rng.below(4);
        const int L = log2_exact(d);
        const int J = 1 + static_cast<int>(rng.below(L));
        const auto m = random_multires(rng, d, L);
        const auto x = gaussian_signal(rng, d);
        auto y = x;
        // Mix small and large perturbations so both regimes are exercised.
        const double scale = i % 2 ? 1.0 : 1e-3;
        for (auto& v : y) v += scale * rng.normal();
        const auto sx = transform_top(x, m, J), sy = transform_top(y, m, J);
        double lhs = 0;
        for (std::size_t k = 0; k < sx.data.size(); ++k) lhs += (sx.data[k] - sy.data[k]) * (sx.data[k] - sy.data[k]);
        double dxy = 0;
        for (std::size_t k = 0; k < d; ++k) dxy += (x[k] - y[k]) * (x[k] - y[k]);
        const double bound = std::sqrt(std::ldexp(dxy, J));
        lhs = std::sqrt(lhs);
        if (lhs > bound + 1e-12) ++violations;
        worst_ratio = std::max(worst_ratio, lhs / bound);
    }
    return {violations == 0, fmt("1000 pairs, %zu violations, max ratio to bound %.6f", violations, worst_ratio)};
}

// 3 -----------------------------------------------------------------------
Outcome cascade_equivalence() {
    Rng rng(303);
    double worst = 0;
    std::size_t coefficients = 0;
    for (const auto [d, J] : {std::pair<std::size_t, int>{16, 4}, std::pair<std::size_t, int>{32, 5}}) {
        std::vector<std::vector<int>> scale_sets;
        for (std::uint64_t q = 0; q < (std::uint64_t{1} << J); ++q) {
            const auto oi = order_of(q, J);
            if (oi.order <= 4) scale_sets.push_back(oi.scales);
        }
        for (int k = 0; k < 5; ++k) {
            const auto m = random_multires(rng, d, J);
            for (int s = 0; s < 100; ++s) {
                const auto x = gaussian_signal(rng, d);
                const auto top = transform_top(x, m, J);
                for (const auto& scales : scale_sets) {
                    const auto q = column_of(scales, J);
                    const auto oracle = cascade_oracle(x, m, J, scales);
                    for (std::size_t n = 0; n < top.rows; ++n) {
                        worst = std::max(worst, std::abs(top(n, q) - oracle[n]));
                        ++coefficients;
                    }
                }
            }
        }
    }
    return {worst <= 1e-10, fmt("%zu coefficients, max abs difference %.3g (tol 1e-10)", coefficients, worst)};
}

// 4 -----------------------------------------------------------------------
Outcome matching_optimality() {
    Rng rng(404);
    std::size_t mismatches = 0, instances = 0;
    for (const std::size_t n : {4u, 6u, 8u, 10u, 12u}) {
        for (int t = 0; t < 200; ++t) {
            // Alternate wide and narrow integer ranges; narrow ranges force ties.
            const std::uint64_t range = t % 2 ? 1000 : 4;
            std::vector<double> c(n * n, 0.0);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = a + 1; b < n; ++b) c[a * n + b] = c[b * n + a] = static_cast<double>(rng.below(range));
            const CostMatrix costs(n, std::move(c));
            const auto fast = blossom_matching(costs);
            const auto slow = brute_force_matching(costs);
            if (fast.total_cost != slow.total_cost || fast.quantized_total != slow.quantized_total) ++mismatches;
            ++instances;
        }
    }
    return {mismatches == 0, fmt("%zu instances, %zu cost mismatches", instances, mismatches)};
}

// 5 -----------------------------------------------------------------------
Outcome sparsity_identity() {
    Rng rng(505);
    double worst_excess = -1e300;
    std::size_t levels = 0;
    for (const std::size_t d : {16u, 64u, 256u}) {
        std::vector<Signal> training;
        for (int i = 0; i < 200; ++i) training.push_back(uniform_signal(rng, d));
        const int J = log2_exact(d);
        const auto learned = learn_multires(training, J, {threads(), false});
        for (const auto& lv : learned.levels) {
            const double nodes = static_cast<double>(d >> lv.level);
            const double bound = std::ldexp(1.0, -kCostScaleBits) * nodes / 2;
            const double change = lv.l1_after - lv.l1_before;
            // Floating-point slack for the two large sums being differenced.
            const double slack = 1e-12 * std::max(1.0, lv.l1_after);
            const double quantized = std::ldexp(static_cast<double>(lv.quantized_cost), -kCostScaleBits);
            worst_excess = std::max(worst_excess, std::abs(quantized - change) - (bound + slack));
            worst_excess = std::max(worst_excess, std::abs(lv.matching_cost - change) - slack);
            ++levels;
        }
    }
    return {worst_excess <= 0, fmt("%zu learned levels, worst excess over bound %.3g", levels, worst_excess)};
}

// 6 -----------------------------------------------------------------------
Outcome reconstruction_for(std::size_t d, int J, std::uint64_t seed) {
    Rng rng(seed);
    const auto family = standard_interlaced_family(d, J);
    std::vector<MultiresApprox> members;
    for (std::size_t k = 0; k < family.member_count(); ++k) members.push_back(family.member(k));
    double worst = 0;
    std::size_t ambiguous = 0, inconsistent = 0;
    for (int t = 0; t < 100; ++t) {
        const auto x = gaussian_signal(rng, d);
        std::vector<ScatteringTensor> outputs;
        for (const auto& m : members) outputs.push_back(transform_top(x, m, J));
        try {
            const auto back = reconstruct(outputs, family);
            for (std::size_t v = 0; v < d; ++v) worst = std::max(worst, std::abs(back[v] - x[v]));
        } catch (const ReconstructionError& e) {
            (e.kind() == ReconstructionError::Kind::Ambiguous ? ambiguous : inconsistent)++;
        }
    }
    return {ambiguous == 0 && inconsistent == 0 && worst < 1e-8,
            fmt("d=%zu J=%d, %zu multiresolutions: max abs error %.3g over recovered signals, %zu ambiguous, %zu "
                "inconsistent of 100",
                d, J, members.size(), worst, ambiguous, inconsistent)};
}

Outcome reconstruction() {
    auto main = reconstruction_for(16, 4, 606);
    if (!main.pass) {
        // Context for the failure: one level less is recoverable.
        const auto shallow = reconstruction_for(16, 3, 606);
        main.detail += fmt("; with J=3: %s", shallow.detail.c_str());
    }
    return main;
}

// 7 -----------------------------------------------------------------------
Outcome geometry_recovery() {
    const Graph g = grid_graph(16, 16);
    const int smoothing_steps = 4;
    const auto ds = synthetic_smooth(g, 2000, 707, smoothing_steps);
    const auto learned = learn_multires(ds.signals, 8, {threads(), false});
    const auto frac = connectivity_fraction(learned.multires, g, &ds.active);
    const bool pass = frac[1] >= 0.9 && frac[2] >= 0.9;
    return {pass, fmt("16x16 grid, 2000 signals, %d smoothing steps: connected fraction level1 %.4f level2 %.4f "
                      "level3 %.4f",
                      smoothing_steps, frac[1], frac[2], frac[3])};
}

// 8 -----------------------------------------------------------------------
std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

Outcome coefficient_counts() {
    Rng rng(808);
    std::size_t mismatches = 0, cases = 0;
    for (const std::size_t d : {1024u, 64u}) {
        const int L = log2_exact(d);
        const auto m = random_multires(rng, d, L);
        const auto x = gaussian_signal(rng, d);
        for (int J = 0; J <= std::min(L, 10); ++J) {
            const auto top = transform_top(x, m, J);
            std::vector<std::uint64_t> hist(J + 1, 0);
            for (std::size_t n = 0; n < top.rows; ++n)
                for (std::size_t q = 0; q < top.cols; ++q) ++hist[std::popcount(q)];
            for (int k = 0; k <= J; ++k) {
                const std::uint64_t expected = binomial(J, k) * d >> J;
                if (hist[k] != expected || count_order(J, k, d) != expected) ++mismatches;
                ++cases;
            }
        }
    }
    return {mismatches == 0, fmt("%zu (d, J, order) cases, %zu mismatches", cases, mismatches)};
}

// 9, 10 -------------------------------------------------------------------
struct MnistSplit {
    Dataset train, test;
};

std::filesystem::path data_dir() { return HAARSCAT_DATA_DIR; }

bool have_mnist() {
    return std::filesystem::exists(data_dir() / "mnist5k-images-idx3-ubyte") &&
           std::filesystem::exists(data_dir() / "mnist5k-labels-idx1-ubyte");
}

// First 200 of each digit for training and the next 100 for testing.
MnistSplit load_mnist_split() {
    const auto all = load_idx(data_dir() / "mnist5k-images-idx3-ubyte", data_dir() / "mnist5k-labels-idx1-ubyte");
    std::vector<std::uint32_t> tr, te;
    std::vector<int> seen(10, 0);
    for (std::uint32_t i = 0; i < all.signals.size(); ++i) {
        const int c = all.labels[i];
        if (seen[c] < 200) tr.push_back(i);
        else if (seen[c] < 300) te.push_back(i);
        ++seen[c];
    }
    return {all.subset(tr), all.subset(te)};
}

struct PipelineResult {
    std::vector<int> predictions;
    double error = 0;
    std::size_t raw_features = 0;
    std::size_t dictionary = 0;
};

PipelineResult classify_pipeline(const Dataset& tr, const Dataset& te, const std::vector<MultiresApprox>& ensemble,
                                 int J, int m_max, std::size_t K) {
    const auto t = threads();
    const auto ftr = compute_features(tr.signals, ensemble, J, m_max, t);
    const auto fte = compute_features(te.signals, ensemble, J, m_max, t);
    const auto dict = select_dictionary(ftr, tr.labels, K, {}, t);
    const Eigen::MatrixXd ztr = project_rows(dict, ftr.values), zte = project_rows(dict, fte.values);
    TrainOptions opt;
    opt.threads = t;
    const auto model = train(ztr, tr.labels, opt);
    PipelineResult r;
    r.predictions = predict_rows(model, zte, t);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < r.predictions.size(); ++i) wrong += r.predictions[i] != te.labels[i];
    r.error = static_cast<double>(wrong) / static_cast<double>(r.predictions.size());
    r.raw_features = ftr.columns.size();
    r.dictionary = dict.size();
    return r;
}

std::vector<MultiresApprox> grid_ensemble(std::size_t w, std::size_t h, int J, int N) {
    std::vector<MultiresApprox> out;
    // Stride 9 through the variant ids spreads members over shifts and rotations.
    for (int i = 0; i < N; ++i) out.push_back(grid_multires(w, h, J, (9 * i) % kGridVariantCount));
    return out;
}

Outcome mnist_classification() {
    if (!have_mnist()) return {false, "MNIST subset missing; run tools/fetch_mnist_subset.py"};
    const auto split = load_mnist_split();
    const auto ensemble = grid_ensemble(split.train.width, split.train.height, 10, 8);
    const auto r = classify_pipeline(split.train, split.test, ensemble, 10, 4, 50);
    return {r.error <= 0.10, fmt("%zu train / %zu test, N=8 J=10 m_max=4, %zu raw features, M=%zu: test error %.2f%%",
                                 split.train.signals.size(), split.test.signals.size(), r.raw_features, r.dictionary,
                                 100 * r.error)};
}

Outcome scramble_equivariance() {
    if (!have_mnist()) return {false, "MNIST subset missing; run tools/fetch_mnist_subset.py"};
    const auto split = load_mnist_split();
    const auto ensemble = grid_ensemble(split.train.width, split.train.height, 10, 8);
    const auto plain = classify_pipeline(split.train, split.test, ensemble, 10, 4, 50);

    const std::uint64_t seed = 1010;
    const auto strain = scramble(split.train, seed);
    const auto stest = scramble(split.test, seed);
    if (strain.permutation != stest.permutation) return {false, "train and test permutations differ"};
    std::vector<MultiresApprox> moved;
    for (const auto& m : ensemble) moved.push_back(m.relabeled(strain.permutation));
    const auto scrambled = classify_pipeline(strain, stest, moved, 10, 4, 50);

    const bool same = plain.predictions == scrambled.predictions && plain.error == scrambled.error;
    return {same, fmt("error %.4f%% unscrambled vs %.4f%% scrambled, predictions %s", 100 * plain.error,
                      100 * scrambled.error, plain.predictions == scrambled.predictions ? "identical" : "differ")};
}

// 11 ----------------------------------------------------------------------
Outcome pls_correctness() {
    Rng rng(1111);
    const Eigen::Index rows = 50, cols = 20;
    FeatureMatrix f;
    f.values.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) f.values(i, c) = rng.normal();
    for (Eigen::Index c = 0; c < cols; ++c) f.columns.push_back({0, 0, static_cast<std::uint32_t>(c)});
    std::vector<int> labels(rows);
    for (auto& l : labels) l = static_cast<int>(rng.below(3));

    const PlsProblem problem(f, labels);
    const Eigen::MatrixXd& Z = problem.transformed();
    double worst_step = 0, worst_ortho = 0;
    std::size_t pick_mismatches = 0, steps = 0;
    for (int label = 0; label < 3; ++label) {
        const auto sel = problem.select(label, 12);
        Eigen::VectorXd y(rows);
        for (Eigen::Index i = 0; i < rows; ++i) y(i) = labels[i] == label ? 1.0 : 0.0;
        // Independent reference: at each step score every unused column
        // against the span of the previous picks, orthogonalized explicitly.
        Eigen::MatrixXd Q(rows, 0);
        for (std::size_t k = 0; k < sel.columns.size(); ++k) {
            double best = -1;
            Eigen::Index best_col = -1;
            for (Eigen::Index c = 0; c < cols; ++c) {
                if (std::find(sel.columns.begin(), sel.columns.begin() + k, c) != sel.columns.begin() + k) continue;
                Eigen::VectorXd r = Z.col(c) - Q * (Q.transpose() * Z.col(c));
                r -= Q * (Q.transpose() * r);
                const double score = std::abs(y.dot(r)) / r.norm();
                if (score > best) best = score, best_col = c;
            }
            worst_step = std::max(worst_step, std::abs(sel.correlations[k] - best));
            if (best_col != static_cast<Eigen::Index>(sel.columns[k])) ++pick_mismatches;
            Eigen::VectorXd r = Z.col(sel.columns[k]) - Q * (Q.transpose() * Z.col(sel.columns[k]));
            r -= Q * (Q.transpose() * r);
            Q.conservativeResize(Eigen::NoChange, Q.cols() + 1);
            Q.col(Q.cols() - 1) = r / r.norm();
            ++steps;
        }
        // The library's own selected features must be orthonormal.
        const auto K = static_cast<Eigen::Index>(sel.columns.size());
        Eigen::MatrixXd picked(rows, K);
        for (Eigen::Index r = 0; r < K; ++r) picked.col(r) = Z.col(sel.columns[r]);
        const Eigen::MatrixXd phi = picked * sel.coefficients.transpose();
        const Eigen::MatrixXd gram = phi.transpose() * phi;
        worst_ortho = std::max(worst_ortho, (gram - Eigen::MatrixXd::Identity(K, K)).cwiseAbs().maxCoeff());
    }
    const bool pass = pick_mismatches == 0 && worst_step < 1e-10 && worst_ortho < 1e-8;
    return {pass, fmt("%zu steps, %zu pick mismatches, max score gap %.3g, orthonormality residual %.3g", steps,
                      pick_mismatches, worst_step, worst_ortho)};
}

// 12 ----------------------------------------------------------------------
Outcome boolean_variant() {
    std::size_t mismatches = 0, cases = 0;
    // All three pairings of four vertices at level 0.
    const std::vector<std::vector<VertexPair>> firsts{{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}, {{0, 3}, {1, 2}}};
    for (const auto& first : firsts) {
        const auto m = build_from_pairings(4, {Pairing(first), Pairing({{0, 1}})});
        for (unsigned bits = 0; bits < 16; ++bits) {
            std::vector<std::uint8_t> x(4);
            for (int v = 0; v < 4; ++v) x[v] = (bits >> v) & 1;
            const auto top = boolean_transform(x, m, 2).back();
            const bool a = x[first[0].first], b = x[first[0].second], c = x[first[1].first], d = x[first[1].second];
            const bool lo = a || b, ld = a != b, ro = c || d, rd = c != d;
            const bool expect[4] = {lo || ro, lo != ro, ld || rd, ld != rd};
            for (int q = 0; q < 4; ++q) mismatches += top(0, q) != expect[q];
            ++cases;
        }
    }
    return {mismatches == 0, fmt("%zu inputs over 3 pairings, %zu mismatched channels", cases, mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "energy preservation", 10, energy_preservation},
        {2, "contraction", 10, contraction},
        {3, "wavelet cascade equivalence", 60, cascade_equivalence},
        {4, "matching optimality", 120, matching_optimality},
        {5, "sparsity identity", 30, sparsity_identity},
        {6, "reconstruction", 30, reconstruction},
        {7, "geometry recovery", 300, geometry_recovery},
        {8, "coefficient counts", 1, coefficient_counts},
        {9, "MNIST classification", 900, mnist_classification},
        {10, "scramble equivariance", 300, scramble_equivariance},
        {11, "PLS correctness", 5, pls_correctness},
        {12, "boolean variant", 1, boolean_variant},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s [%2d] %s: %s (%.2f s of %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, c.budget_s, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "haarscat/classify.hpp"
#include "haarscat/features.hpp"
#include "haarscat/io.hpp"
#include "haarscat/multires.hpp"
#include "haarscat/pairing_learn.hpp"
#include "haarscat/reconstruct.hpp"
#include "haarscat/rng.hpp"
#include "haarscat/scattering.hpp"
#include "log.hpp"

namespace haarcli {

namespace fs = std::filesystem;
using haar::Error;
using nlohmann::json;

const LoadedData& Context::data() {
    if (!data_) {
        log_info("loading dataset (%s)", cfg.dataset.kind.c_str());
        data_ = load_data(cfg.dataset, threads);
        log_info("dataset ready: %zu train / %zu test rows, dimension %zu", data_->train.signals.size(),
                 data_->test.signals.size(), data_->train.dimension());
    }
    return *data_;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Stage {
    std::string name;
    std::string hash;
    fs::path dir;
};

struct StageOutput {
    json results = json::object();
    json artifacts = json::object();
    json timings = json::object();
};

// Config fields each stage's output depends on. Every stage includes the
// fields of the stages it reads from.
json stage_key(const Context& ctx, const std::string& name) {
    const json& c = ctx.canonical;
    if (name == "reconstruct-demo") return {{"stage", name}, {"reconstruct", c["reconstruct"]}};
    if (name == "bool-demo") return {{"stage", name}, {"bool", c["bool"]}};
    json k{{"stage", name}, {"dataset", c["dataset"]}, {"geometry", c["geometry"]},
           {"J", c["J"]},    {"N", c["N"]},             {"seed", c["seed"]}};
    if (name == "learn" || name == "connectivity") return k;
    k["m_max"] = c["m_max"];
    if (name == "features") return k;
    for (const char* f : {"K", "M", "standardize", "residual_tol"}) k[f] = c[f];
    if (name == "select") return k;
    k["sigma"] = c["sigma"];
    k["lambda"] = c["lambda"];
    return k;
}

Stage stage_of(const Context& ctx, const std::string& name) {
    const std::string h = hash_of(stage_key(ctx, name));
    return {name, h, ctx.out / (name + "-" + h)};
}

json seeds_of(const Context& ctx, const std::string& name) {
    const auto& c = ctx.cfg;
    if (name == "reconstruct-demo") return {{"reconstruct", c.reconstruct.seed}};
    if (name == "bool-demo") return {{"bool", c.boolean.seed}};
    json s{{"seed", c.seed}, {"dataset", c.dataset.seed}};
    s["scramble"] = c.dataset.scramble_seed ? json(*c.dataset.scramble_seed) : json(nullptr);
    s["shuffle_labels"] = c.dataset.shuffle_labels_seed ? json(*c.dataset.shuffle_labels_seed) : json(nullptr);
    return s;
}

fs::path ensure(Context& ctx, const std::string& name, bool force, bool requested = false);

json read_report(Context& ctx, const std::string& name) { return haar::read_json(ensure(ctx, name, false)); }

int resolved_J(Context& ctx) {
    const std::size_t d = ctx.data().train.dimension();
    const int L = haar::log2_exact(d);
    const int J = ctx.cfg.J.value_or(L);
    if (J > L) throw Error("config: J=" + std::to_string(J) + " exceeds log2(d)=" + std::to_string(L));
    return J;
}

// learn ----------------------------------------------------------------------

StageOutput learn(Context& ctx, const Stage& st) {
    const auto& data = ctx.data();
    const auto& train = data.train;
    const std::size_t d = train.dimension();
    const int J = resolved_J(ctx);
    const auto& cfg = ctx.cfg;

    haar::EnsembleOutcome ens;
    json extra{{"J", J}, {"d", d}, {"geometry", cfg.geometry}};
    if (cfg.geometry == "grid") {
        if (train.width == 0 || train.width * train.height != d)
            throw Error("geometry 'grid' needs an image dataset whose frame covers all vertices");
        json variants = json::array();
        for (int i = 0; i < cfg.N; ++i) {
            // Stride 9 through the variant ids spreads members over shifts and rotations.
            const int v = (9 * i) % haar::kGridVariantCount;
            auto m = haar::grid_multires(train.width, train.height, J, v);
            if (!train.permutation.empty()) m = m.relabeled(train.permutation);
            ens.members.push_back({std::move(m), {}});
            ens.subsets.emplace_back();
            variants.push_back(v);
        }
        ens.seed = cfg.seed;
        extra["variants"] = variants;
        log_info("built %d grid multiresolutions (J=%d, %zux%zu)", cfg.N, J, train.width, train.height);
    } else {
        log_info("learning %d multiresolution(s) from %zu signals, d=%zu, J=%d", cfg.N, train.signals.size(), d, J);
        ens = haar::learn_ensemble(train.signals, J, cfg.N, cfg.seed, {ctx.threads, cfg.recompute_layers});
    }
    haar::save_ensemble(st.dir / "ensemble", ens, extra);

    StageOutput out;
    json members = json::array();
    // Grid members are not learned and carry no level costs.
    std::vector<double> level_costs(cfg.geometry == "learned" ? static_cast<std::size_t>(J) : 0, 0.0);
    double worst_identity = 0;
    for (std::size_t k = 0; k < ens.members.size(); ++k) {
        json levels = json::array();
        for (const auto& t : ens.members[k].levels) {
            levels.push_back(haar::level_trace_json(t));
            level_costs[static_cast<std::size_t>(t.level)] += t.matching_cost;
            worst_identity = std::max(worst_identity, std::abs(t.matching_cost - (t.l1_after - t.l1_before)));
            log_debug("member %zu level %d: matching cost %.6g, l1 %.6g -> %.6g", k, t.level, t.matching_cost,
                      t.l1_before, t.l1_after);
        }
        members.push_back({{"training_rows", ens.subsets[k].size()}, {"levels", levels}});
    }
    for (std::size_t j = 0; j < level_costs.size(); ++j) log_info("level %zu: total matching cost %.6g", j, level_costs[j]);
    // The matching cost equals the growth of the l1 norm only when every
    // input is nonnegative (then |a + b| = |a| + |b| in the sum channel).
    bool nonnegative = true;
    for (const auto& x : train.signals)
        nonnegative = nonnegative && std::all_of(x.begin(), x.end(), [](double v) { return v >= 0; });
    out.results = {{"d", d},
                   {"J", J},
                   {"N", ens.members.size()},
                   {"geometry", cfg.geometry},
                   {"members", members},
                   {"level_total_costs", level_costs},
                   {"inputs_nonnegative", nonnegative},
                   {"max_cost_l1_gap", worst_identity}};
    if (extra.contains("variants")) out.results["variants"] = extra["variants"];
    out.artifacts = {{"ensemble", "ensemble/manifest.json"}};
    return out;
}

struct EnsembleInfo {
    std::vector<haar::MultiresApprox> members;
    int J = 0;
    std::size_t d = 0;
    std::string id;
};

EnsembleInfo load_learned(Context& ctx) {
    const fs::path dir = ensure(ctx, "learn", false).parent_path();
    const auto manifest = haar::read_json(dir / "ensemble" / "manifest.json");
    EnsembleInfo e;
    e.members = haar::load_ensemble(dir / "ensemble");
    e.J = manifest.at("J").get<int>();
    e.d = manifest.at("d").get<std::size_t>();
    e.id = stage_of(ctx, "learn").hash;
    return e;
}

// features -------------------------------------------------------------------

std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

void write_features(const fs::path& path, const haar::FeatureMatrix& f, const EnsembleInfo& e, int m_max) {
    const RowMajor rm = f.values;
    haar::FeatureLayout layout{e.J, m_max, e.id, static_cast<std::size_t>(rm.rows()), static_cast<std::size_t>(rm.cols())};
    haar::write_feature_file(path, layout, std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
}

StageOutput features(Context& ctx, const Stage& st) {
    const auto e = load_learned(ctx);
    const int m_max = ctx.cfg.m_max;
    if (m_max > e.J) throw Error("config: m_max=" + std::to_string(m_max) + " exceeds J=" + std::to_string(e.J));
    const auto& data = ctx.data();
    log_info("computing features for %zu train rows", data.train.signals.size());
    const auto ftr = haar::compute_features(data.train.signals, e.members, e.J, m_max, ctx.threads);
    write_features(st.dir / "train.f64", ftr, e, m_max);
    StageOutput out;
    out.artifacts["train_features"] = "train.f64";
    if (!data.test.signals.empty()) {
        log_info("computing features for %zu test rows", data.test.signals.size());
        const auto fte = haar::compute_features(data.test.signals, e.members, e.J, m_max, ctx.threads);
        write_features(st.dir / "test.f64", fte, e, m_max);
        out.artifacts["test_features"] = "test.f64";
    }
    haar::write_json(st.dir / "labels.json", {{"train", data.train.labels}, {"test", data.test.labels}});
    out.artifacts["labels"] = "labels.json";

    std::uint64_t expected = 0;
    for (int m = 0; m <= m_max; ++m) expected += binomial(e.J, m) * e.d >> e.J;
    expected *= e.members.size();
    std::size_t nonzero = 0;
    for (Eigen::Index c = 0; c < ftr.values.cols(); ++c) nonzero += ftr.values.col(c).cwiseAbs().maxCoeff() > 0;
    out.results = {{"N", e.members.size()},
                   {"d", e.d},
                   {"J", e.J},
                   {"m_max", m_max},
                   {"feature_count", ftr.columns.size()},
                   {"expected_feature_count", expected},
                   {"nonzero_train_columns", nonzero},
                   {"train_rows", data.train.signals.size()},
                   {"test_rows", data.test.signals.size()}};
    return out;
}

struct FeatureSet {
    haar::FeatureMatrix train, test;
    std::vector<int> train_labels, test_labels;
};

haar::FeatureMatrix read_features(const fs::path& path, const std::vector<haar::ColumnMeta>& columns) {
    haar::FeatureLayout layout;
    const auto values = haar::read_feature_file(path, layout);
    if (layout.columns != columns.size()) throw Error(path.string() + ": column count does not match the ensemble");
    haar::FeatureMatrix f;
    f.values = Eigen::Map<const RowMajor>(values.data(), static_cast<Eigen::Index>(layout.rows),
                                          static_cast<Eigen::Index>(layout.columns));
    f.columns = columns;
    return f;
}

FeatureSet load_features(Context& ctx, bool need_test) {
    const fs::path report = ensure(ctx, "features", false);
    const fs::path dir = report.parent_path();
    const auto r = haar::read_json(report).at("results");
    const auto columns = haar::feature_columns(r.at("N").get<std::size_t>(), r.at("d").get<std::size_t>(),
                                               r.at("J").get<int>(), r.at("m_max").get<int>());
    FeatureSet fs_;
    fs_.train = read_features(dir / "train.f64", columns);
    const auto labels = haar::read_json(dir / "labels.json");
    fs_.train_labels = labels.at("train").get<std::vector<int>>();
    fs_.test_labels = labels.at("test").get<std::vector<int>>();
    if (fs_.train_labels.empty()) throw Error("dataset has no labels; select/train/evaluate need labelled data");
    if (need_test) {
        if (!fs::exists(dir / "test.f64")) throw Error("dataset split has no test rows");
        fs_.test = read_features(dir / "test.f64", columns);
    }
    return fs_;
}

// select ---------------------------------------------------------------------

std::size_t per_class_K(const ExperimentConfig& cfg, std::size_t classes) {
    if (cfg.K) return *cfg.K;
    const std::size_t K = cfg.M / classes;
    if (K == 0) throw Error("config: M is smaller than the number of classes");
    if (K * classes != cfg.M) log_warn("M=%zu is not a multiple of %zu classes; using K=%zu", cfg.M, classes, K);
    return K;
}

StageOutput select(Context& ctx, const Stage& st) {
    const auto f = load_features(ctx, false);
    const auto classes = classes_of(f.train_labels);
    const std::size_t K = per_class_K(ctx.cfg, classes.size());
    haar::PlsOptions opt;
    opt.standardize = ctx.cfg.standardize;
    opt.residual_tol = ctx.cfg.residual_tol;
    log_info("selecting K=%zu features for each of %zu classes from %zu", K, classes.size(), f.train.columns.size());
    const auto dict = haar::select_dictionary(f.train, f.train_labels, K, opt, ctx.threads);
    haar::write_json(st.dir / "dictionary.json", haar::dictionary_to_json(dict));

    StageOutput out;
    json per_class = json::array();
    for (const auto& c : dict.classes)
        per_class.push_back({{"label", c.label},
                             {"selected", c.columns.size()},
                             {"final_mse", c.mse.empty() ? json(nullptr) : json(c.mse.back())},
                             {"first_correlation", c.correlations.empty() ? json(nullptr) : json(c.correlations[0])}});
    out.results = {{"K", K}, {"M", dict.size()}, {"classes", classes.size()}, {"per_class", per_class}};
    out.artifacts = {{"dictionary", "dictionary.json"}};
    return out;
}

haar::FeatureDictionary load_dictionary(Context& ctx) {
    const fs::path dir = ensure(ctx, "select", false).parent_path();
    return haar::dictionary_from_json(haar::read_json(dir / "dictionary.json"));
}

// train / evaluate -------------------------------------------------------------

StageOutput train_stage(Context& ctx, const Stage& st) {
    const auto f = load_features(ctx, false);
    const auto dict = load_dictionary(ctx);
    const Eigen::MatrixXd z = haar::project_rows(dict, f.train.values);
    haar::TrainOptions opt;
    opt.sigma = ctx.cfg.sigma.value_or(0.0);
    opt.lambda = ctx.cfg.lambda;
    opt.seed = ctx.cfg.seed;
    opt.threads = ctx.threads;
    log_info("training kernel classifier on %lld rows x %lld features", static_cast<long long>(z.rows()),
             static_cast<long long>(z.cols()));
    const auto model = haar::train(z, f.train_labels, opt);
    haar::save_model(st.dir / "model.bin", model);
    const double err = haar::error_rate(model, z, f.train_labels, ctx.threads);
    StageOutput out;
    out.results = {{"sigma", model.sigma},
                   {"sigma_from_median", !ctx.cfg.sigma.has_value()},
                   {"lambda", model.lambda},
                   {"lambda_used", model.lambda_used},
                   {"support_rows", model.support.rows()},
                   {"train_error_rate", err}};
    out.artifacts = {{"model", "model.bin"}};
    return out;
}

StageOutput evaluate(Context& ctx, const Stage& st) {
    const auto f = load_features(ctx, true);
    const auto dict = load_dictionary(ctx);
    const fs::path model_dir = ensure(ctx, "train", false).parent_path();
    const auto model = haar::load_model(model_dir / "model.bin");
    const Eigen::MatrixXd z = haar::project_rows(dict, f.test.values);
    const auto pred = haar::predict_rows(model, z, ctx.threads);

    const auto classes = classes_of(f.train_labels);
    std::map<int, std::size_t> total, wrong;
    std::map<int, std::map<int, std::size_t>> confusion;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const int truth = f.test_labels[i];
        ++total[truth];
        ++confusion[truth][pred[i]];
        if (pred[i] != truth) ++wrong[truth], ++errors;
    }
    json per_class = json::object(), conf = json::object();
    for (const auto& [label, n] : total) {
        per_class[std::to_string(label)] = static_cast<double>(wrong[label]) / static_cast<double>(n);
        json row = json::object();
        for (const auto& [p, cnt] : confusion[label]) row[std::to_string(p)] = cnt;
        conf[std::to_string(label)] = row;
    }
    const double rate = pred.empty() ? 0.0 : static_cast<double>(errors) / static_cast<double>(pred.size());
    log_info("test error %.2f%% (%zu of %zu)", 100 * rate, errors, pred.size());

    const auto sel = read_report(ctx, "select").at("results");
    StageOutput out;
    out.results = {{"error_rate", rate},
                   {"errors", errors},
                   {"test_rows", pred.size()},
                   {"per_class_error", per_class},
                   {"confusion", conf},
                   {"M", sel.at("M")},
                   {"K", sel.at("K")},
                   {"chance_error", classes.empty() ? 0.0 : 1.0 - 1.0 / static_cast<double>(classes.size())}};
    haar::write_json(st.dir / "predictions.json", pred);
    out.artifacts = {{"predictions", "predictions.json"}};
    json pipeline = json::object();
    for (const char* s : {"learn", "features", "select", "train"})
        pipeline[s] = read_report(ctx, s).at("timings").at("stage_s");
    out.timings["pipeline_s"] = pipeline;
    return out;
}

// connectivity -------------------------------------------------------------------

StageOutput connectivity(Context& ctx, const Stage&) {
    const auto e = load_learned(ctx);
    const auto& train = ctx.data().train;
    if (!train.geometry) throw Error("dataset has no ground-truth geometry");
    json members = json::array();
    std::vector<double> mean(static_cast<std::size_t>(e.J) + 1, 0.0);
    for (const auto& m : e.members) {
        const auto f = haar::connectivity_fraction(m, *train.geometry, &train.active);
        for (std::size_t j = 0; j < f.size(); ++j) mean[j] += f[j] / static_cast<double>(e.members.size());
        members.push_back(f);
    }
    for (std::size_t j = 1; j < mean.size(); ++j) log_info("level %zu: mean connected fraction %.4f", j, mean[j]);
    StageOutput out;
    out.results = {{"J", e.J},
                   {"active_vertices", train.active.size()},
                   {"members", members},
                   {"mean", mean}};
    return out;
}

// demos --------------------------------------------------------------------------

StageOutput reconstruct_demo(Context& ctx, const Stage&) {
    const auto& c = ctx.cfg.reconstruct;
    const auto family = haar::standard_interlaced_family(c.d, c.J);
    std::vector<haar::MultiresApprox> members;
    for (std::size_t k = 0; k < family.member_count(); ++k) members.push_back(family.member(k));
    haar::Rng rng(c.seed);
    double worst = 0;
    std::size_t ambiguous = 0, inconsistent = 0, recovered = 0;
    std::vector<std::size_t> candidates(static_cast<std::size_t>(c.J), 0);
    for (int t = 0; t < c.trials; ++t) {
        haar::Signal x(c.d);
        for (auto& v : x) v = c.binary ? static_cast<double>(rng.below(2)) : rng.normal();
        std::vector<haar::ScatteringTensor> outputs;
        for (const auto& m : members) outputs.push_back(haar::transform_top(x, m, c.J));
        haar::ReconstructionTrace trace;
        try {
            const auto back = haar::reconstruct(outputs, family, &trace);
            for (std::size_t v = 0; v < c.d; ++v) worst = std::max(worst, std::abs(back[v] - x[v]));
            ++recovered;
        } catch (const haar::ReconstructionError& err) {
            ++(err.kind() == haar::ReconstructionError::Kind::Ambiguous ? ambiguous : inconsistent);
        }
        for (std::size_t j = 0; j < trace.max_candidates.size() && j < candidates.size(); ++j)
            candidates[j] = std::max(candidates[j], trace.max_candidates[j]);
    }
    log_info("%zu of %d recovered, %zu ambiguous, %zu inconsistent, max error %.3g", recovered, c.trials, ambiguous,
             inconsistent, worst);
    StageOutput out;
    out.results = {{"d", c.d},
                   {"J", c.J},
                   {"multiresolutions", members.size()},
                   {"trials", c.trials},
                   {"inputs", c.binary ? "binary" : "gaussian"},
                   {"recovered_count", recovered},
                   {"ambiguous_count", ambiguous},
                   {"inconsistent_count", inconsistent},
                   {"max_abs_error", worst},
                   {"max_candidates_per_level", candidates}};
    return out;
}

StageOutput bool_demo(Context& ctx, const Stage&) {
    const auto& c = ctx.cfg.boolean;
    haar::Rng rng(c.seed);
    std::vector<haar::Pairing> ps;
    for (int j = 0; j < c.J; ++j) {
        const std::size_t nodes = c.d >> j;
        auto order = rng.permutation(nodes);
        std::vector<haar::VertexPair> pairs;
        for (std::size_t k = 0; k < nodes; k += 2) pairs.emplace_back(order[k], order[k + 1]);
        std::sort(pairs.begin(), pairs.end(),
                  [](const auto& a, const auto& b) { return std::min(a.first, a.second) < std::min(b.first, b.second); });
        ps.emplace_back(std::move(pairs));
    }
    const auto m = haar::build_from_pairings(c.d, std::move(ps));
    const std::uint64_t inputs = std::uint64_t{1} << c.d;
    std::set<std::vector<std::uint8_t>> distinct;
    std::size_t or_mismatch = 0;
    json table = json::array();
    for (std::uint64_t bits = 0; bits < inputs; ++bits) {
        std::vector<std::uint8_t> x(c.d);
        for (std::size_t v = 0; v < c.d; ++v) x[v] = static_cast<std::uint8_t>((bits >> v) & 1);
        const auto top = haar::boolean_transform(x, m, c.J).back();
        distinct.insert(top.data);
        // Channel 0 of node n is the OR over its vertex set.
        for (std::size_t n = 0; n < top.rows; ++n) {
            bool any = false;
            for (const auto v : m.vertex_sets(c.J)[n]) any = any || x[v];
            or_mismatch += top(n, 0) != any;
        }
        if (c.d <= 4) {
            std::string in, outbits;
            for (const auto b : x) in += b ? '1' : '0';
            for (const auto b : top.data) outbits += b ? '1' : '0';
            table.push_back({{"input", in}, {"output", outbits}});
        }
    }
    log_info("%llu inputs, %zu distinct outputs", static_cast<unsigned long long>(inputs), distinct.size());
    StageOutput out;
    out.results = {{"d", c.d},
                   {"J", c.J},
                   {"multires", m.to_json()},
                   {"inputs", inputs},
                   {"distinct_outputs", distinct.size()},
                   {"or_channel_mismatches", or_mismatch}};
    if (c.d <= 4) out.results["truth_table"] = table;
    return out;
}

const std::map<std::string, std::function<StageOutput(Context&, const Stage&)>>& stages() {
    static const std::map<std::string, std::function<StageOutput(Context&, const Stage&)>> s{
        {"learn", learn},
        {"features", features},
        {"select", select},
        {"train", train_stage},
        {"evaluate", evaluate},
        {"connectivity", connectivity},
        {"reconstruct-demo", reconstruct_demo},
        {"bool-demo", bool_demo},
    };
    return s;
}

fs::path ensure(Context& ctx, const std::string& name, bool force, bool requested) {
    const auto it = stages().find(name);
    if (it == stages().end()) throw Error("unknown command '" + name + "'");
    const Stage st = stage_of(ctx, name);
    const fs::path report = st.dir / "report.json";
    if (!force && fs::exists(report)) {
        if (requested) log_info("%s: reusing %s", name.c_str(), st.dir.string().c_str());
        else log_debug("%s: reusing %s", name.c_str(), st.dir.string().c_str());
        return report;
    }
    log_info("%s: writing to %s", name.c_str(), st.dir.string().c_str());
    fs::create_directories(st.dir);
    const auto start = std::chrono::steady_clock::now();
    StageOutput o = it->second(ctx, st);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.timings["stage_s"] = secs;

    json doc{{"schema_version", 1},
             {"tool", "haarscat"},
             {"command", name},
             {"config_hash", hash_of(ctx.canonical)},
             {"stage_hash", st.hash},
             {"config", ctx.canonical},
             {"seeds", seeds_of(ctx, name)},
             {"timings", o.timings},
             {"results", o.results},
             {"artifacts", o.artifacts}};
    // The report is written last and marks the stage as complete.
    haar::write_json(report, doc);
    log_info("%s: done in %.2f s", name.c_str(), secs);
    return report;
}

}  // namespace

fs::path run_command(const std::string& name, Context& ctx) { return ensure(ctx, name, ctx.force, true); }

}  // namespace haarcli

#include "config.hpp"

#include <set>

#include "haarscat/common.hpp"
#include "haarscat/io.hpp"

namespace haarcli {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and remembers which keys were used.
class Reader {
public:
    Reader(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
        if (!doc_.is_object()) throw haar::Error(where_ + ": expected an object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        used_.insert(key);
        if (!doc_.contains(key)) return;
        try {
            out = doc_.at(key).get<T>();
        } catch (const json::exception&) {
            throw haar::Error(where_ + "." + key + ": wrong type");
        }
    }

    template <typename T>
    void get(const char* key, std::optional<T>& out) {
        used_.insert(key);
        if (!doc_.contains(key) || doc_.at(key).is_null()) return;
        T v{};
        get(key, v);
        out = v;
    }

    const json* child(const char* key) {
        used_.insert(key);
        return doc_.contains(key) ? &doc_.at(key) : nullptr;
    }

    void finish() const {
        for (const auto& [k, _] : doc_.items())
            if (!used_.count(k)) throw haar::Error(where_ + ": unknown key '" + k + "'");
    }

private:
    const json& doc_;
    std::string where_;
    std::set<std::string> used_;
};

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw haar::Error("config: " + what);
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig c;
    Reader r(doc, "config");
    if (const json* d = r.child("dataset")) {
        Reader rd(*d, "config.dataset");
        auto& ds = c.dataset;
        rd.get("kind", ds.kind);
        rd.get("images", ds.images);
        rd.get("labels", ds.labels);
        rd.get("limit", ds.limit);
        rd.get("path", ds.path);
        rd.get("test_path", ds.test_path);
        rd.get("label_last", ds.label_last);
        rd.get("width", ds.width);
        rd.get("height", ds.height);
        rd.get("d", ds.d);
        rd.get("count", ds.count);
        rd.get("smoothing_steps", ds.smoothing_steps);
        rd.get("classes", ds.classes);
        rd.get("separation", ds.separation);
        rd.get("points", ds.points);
        rd.get("threshold", ds.threshold);
        rd.get("rotation", ds.rotation);
        rd.get("rotation_sigma", ds.rotation_sigma);
        rd.get("half_extent", ds.half_extent);
        rd.get("seed", ds.seed);
        rd.get("train_per_class", ds.train_per_class);
        rd.get("test_per_class", ds.test_per_class);
        rd.get("train_count", ds.train_count);
        rd.get("test_count", ds.test_count);
        rd.get("scramble_seed", ds.scramble_seed);
        rd.get("shuffle_labels_seed", ds.shuffle_labels_seed);
        rd.finish();
    }
    r.get("geometry", c.geometry);
    r.get("J", c.J);
    r.get("m_max", c.m_max);
    r.get("N", c.N);
    r.get("K", c.K);
    r.get("M", c.M);
    r.get("sigma", c.sigma);
    r.get("lambda", c.lambda);
    r.get("seed", c.seed);
    r.get("standardize", c.standardize);
    r.get("residual_tol", c.residual_tol);
    r.get("recompute_layers", c.recompute_layers);
    if (const json* d = r.child("reconstruct")) {
        Reader rr(*d, "config.reconstruct");
        rr.get("d", c.reconstruct.d);
        rr.get("J", c.reconstruct.J);
        rr.get("trials", c.reconstruct.trials);
        rr.get("seed", c.reconstruct.seed);
        rr.get("binary", c.reconstruct.binary);
        rr.finish();
    }
    if (const json* d = r.child("bool")) {
        Reader rb(*d, "config.bool");
        rb.get("d", c.boolean.d);
        rb.get("J", c.boolean.J);
        rb.get("seed", c.boolean.seed);
        rb.finish();
    }
    r.finish();

    const auto& ds = c.dataset;
    static const std::set<std::string> kinds{"idx", "csv", "grid-smooth", "cycle-smooth", "sphere", "blobs"};
    require(kinds.count(ds.kind) > 0, "unknown dataset.kind '" + ds.kind + "'");
    require(ds.rotation == "none" || ds.rotation == "uniform" || ds.rotation == "small",
            "dataset.rotation must be none, uniform or small");
    require(ds.smoothing_steps >= 0, "dataset.smoothing_steps must be nonnegative");
    require(ds.threshold > 0 && ds.threshold < 3.141592653589793, "dataset.threshold must lie in (0, pi)");
    require(ds.classes >= 2, "dataset.classes must be at least 2");
    require(c.geometry == "learned" || c.geometry == "grid", "geometry must be 'learned' or 'grid'");
    require(!c.J || *c.J >= 0, "J must be nonnegative");
    require(c.m_max >= 0, "m_max must be nonnegative");
    require(c.N >= 1, "N must be at least 1");
    require(!c.K || *c.K >= 1, "K must be positive");
    require(c.M >= 1, "M must be positive");
    require(!c.sigma || *c.sigma > 0, "sigma must be positive");
    require(c.lambda > 0, "lambda must be positive");
    require(c.residual_tol >= 0 && c.residual_tol < 1, "residual_tol must lie in [0, 1)");
    require(haar::is_power_of_two(c.reconstruct.d), "reconstruct.d must be a power of two");
    require(c.reconstruct.J >= 0 && (std::size_t{1} << c.reconstruct.J) <= c.reconstruct.d,
            "reconstruct.J must satisfy 2^J <= d");
    require(c.reconstruct.trials >= 0, "reconstruct.trials must be nonnegative");
    require(haar::is_power_of_two(c.boolean.d) && c.boolean.d <= 16, "bool.d must be a power of two up to 16");
    require(c.boolean.J >= 0 && (std::size_t{1} << c.boolean.J) <= c.boolean.d, "bool.J must satisfy 2^J <= d");
    return c;
}

json to_json(const DatasetConfig& ds) {
    json j{{"kind", ds.kind},
           {"train_per_class", ds.train_per_class},
           {"test_per_class", ds.test_per_class},
           {"train_count", ds.train_count},
           {"test_count", ds.test_count},
           {"scramble_seed", opt(ds.scramble_seed)},
           {"shuffle_labels_seed", opt(ds.shuffle_labels_seed)}};
    // Only the fields the kind reads, so unrelated edits keep the hash.
    if (ds.kind == "idx" || ds.kind == "sphere") {
        j["images"] = ds.images;
        j["labels"] = ds.labels;
        j["limit"] = ds.limit;
    }
    if (ds.kind == "csv") {
        j["path"] = ds.path;
        j["test_path"] = ds.test_path;
        j["label_last"] = ds.label_last;
        j["width"] = ds.width;
        j["height"] = ds.height;
    }
    if (ds.kind == "grid-smooth") {
        j["width"] = ds.width;
        j["height"] = ds.height;
    }
    if (ds.kind == "cycle-smooth" || ds.kind == "blobs") j["d"] = ds.d;
    if (ds.kind == "grid-smooth" || ds.kind == "cycle-smooth") j["smoothing_steps"] = ds.smoothing_steps;
    if (ds.kind == "grid-smooth" || ds.kind == "cycle-smooth" || ds.kind == "blobs") j["count"] = ds.count;
    if (ds.kind == "blobs") {
        j["classes"] = ds.classes;
        j["separation"] = ds.separation;
    }
    if (ds.kind == "sphere") {
        j["points"] = ds.points;
        j["threshold"] = ds.threshold;
        j["rotation"] = ds.rotation;
        if (ds.rotation == "small") j["rotation_sigma"] = ds.rotation_sigma;
        j["half_extent"] = ds.half_extent;
    }
    if (ds.kind != "idx" && ds.kind != "csv") j["seed"] = ds.seed;
    return j;
}

json to_json(const ExperimentConfig& c) {
    return {
        {"dataset", to_json(c.dataset)},
        {"geometry", c.geometry},
        {"J", opt(c.J)},
        {"m_max", c.m_max},
        {"N", c.N},
        {"K", opt(c.K)},
        {"M", c.M},
        {"sigma", opt(c.sigma)},
        {"lambda", c.lambda},
        {"seed", c.seed},
        {"standardize", c.standardize},
        {"residual_tol", c.residual_tol},
        {"recompute_layers", c.recompute_layers},
        {"reconstruct",
         {{"d", c.reconstruct.d},
          {"J", c.reconstruct.J},
          {"trials", c.reconstruct.trials},
          {"seed", c.reconstruct.seed},
          {"binary", c.reconstruct.binary}}},
        {"bool", {{"d", c.boolean.d}, {"J", c.boolean.J}, {"seed", c.boolean.seed}}},
    };
}

void merge_into(json& base, const json& patch) {
    if (!patch.is_object() || !base.is_object()) {
        base = patch;
        return;
    }
    for (const auto& [k, v] : patch.items()) {
        if (base.contains(k) && base[k].is_object() && v.is_object()) merge_into(base[k], v);
        else base[k] = v;
    }
}

void set_path(json& doc, const std::string& dotted, const std::string& value) {
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    json* at = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw haar::Error("--set: malformed key '" + dotted + "'");
        if (!at->is_object()) *at = json::object();
        if (dot == std::string::npos) {
            (*at)[key] = parsed;
            return;
        }
        at = &(*at)[key];
        start = dot + 1;
    }
}

std::string hash_of(const json& doc) { return haar::hex64(haar::fnv1a64(doc.dump())); }

}  // namespace haarcli

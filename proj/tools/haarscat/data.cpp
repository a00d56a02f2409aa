#include "data.hpp"

#include <algorithm>
#include <map>

#include "haarscat/parallel.hpp"
#include "haarscat/rng.hpp"
#include "log.hpp"

namespace haarcli {

using haar::Dataset;
using haar::Error;

namespace {

Dataset cycle_smooth(const DatasetConfig& c) {
    if (c.d < 3) throw Error("cycle-smooth: d must be at least 3");
    std::vector<haar::VertexPair> edges;
    for (std::uint32_t v = 0; v < c.d; ++v) edges.emplace_back(v, static_cast<std::uint32_t>((v + 1) % c.d));
    return haar::synthetic_smooth(haar::Graph(c.d, std::move(edges)), c.count, c.seed, c.smoothing_steps);
}

Dataset grid_smooth(const DatasetConfig& c) {
    Dataset ds = haar::synthetic_smooth(haar::grid_graph(c.width, c.height), c.count, c.seed, c.smoothing_steps);
    ds.width = c.width;
    ds.height = c.height;
    return ds;
}

// Class c has a fixed random mean; rows cycle through the classes.
Dataset blobs(const DatasetConfig& c) {
    haar::Rng rng(c.seed);
    std::vector<haar::Signal> means(static_cast<std::size_t>(c.classes), haar::Signal(c.d));
    for (auto& m : means)
        for (auto& v : m) v = c.separation * rng.normal();
    Dataset ds;
    for (std::size_t i = 0; i < c.count; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(c.classes));
        haar::Signal x = means[static_cast<std::size_t>(label)];
        for (auto& v : x) v += rng.normal();
        ds.signals.push_back(std::move(x));
        ds.labels.push_back(label);
    }
    return ds;
}

Dataset csv(const DatasetConfig& c, const std::string& path) {
    Dataset ds = haar::load_csv(path, c.label_last);
    if (c.width > 0 && c.height > 0 && c.width * c.height == ds.dimension()) {
        ds.geometry = haar::grid_graph(c.width, c.height);
        ds.width = c.width;
        ds.height = c.height;
    }
    return ds;
}

Dataset sphere(const DatasetConfig& c, std::size_t threads) {
    const auto images = haar::read_idx(c.images, 0x00000803u);
    const auto labels = haar::read_idx(c.labels, 0x00000801u);
    if (images.dims.size() != 3 || labels.dims.size() != 1 || images.dims[0] != labels.dims[0])
        throw Error("sphere: image and label files do not match");
    std::size_t count = images.dims[0];
    if (c.limit > 0) count = std::min(count, c.limit);
    const std::size_t h = images.dims[1], w = images.dims[2];

    log_info("sampling %zu sphere points (threshold %.3f)", c.points, c.threshold);
    const auto cloud = haar::sphere_sample(c.points, c.threshold, c.seed);
    Dataset ds;
    ds.geometry = cloud.graph;
    ds.signals.resize(count);
    ds.labels.assign(labels.data.begin(), labels.data.begin() + static_cast<std::ptrdiff_t>(count));
    const haar::Rng root(c.seed);
    haar::ProjectionOptions opt;
    opt.half_extent = c.half_extent;
    haar::parallel_for(count, threads, [&](std::size_t i) {
        haar::Rng rng = root.split(i + 1);
        haar::Rotation r = haar::identity_rotation();
        if (c.rotation == "uniform") r = haar::random_rotation(rng);
        if (c.rotation == "small") r = haar::random_rotation(rng, c.rotation_sigma);
        std::vector<double> img(w * h);
        for (std::size_t k = 0; k < img.size(); ++k) img[k] = images.data[i * w * h + k] / 255.0;
        ds.signals[i] = haar::project_to_sphere(img, w, h, cloud, r, opt);
    });
    return ds;
}

Dataset load_raw(const DatasetConfig& c, const std::string& csv_path, std::size_t threads) {
    if (c.kind == "idx") {
        haar::IdxOptions o;
        o.limit = c.limit;
        return haar::load_idx(c.images, c.labels, o);
    }
    if (c.kind == "csv") return csv(c, csv_path);
    if (c.kind == "grid-smooth") return grid_smooth(c);
    if (c.kind == "cycle-smooth") return cycle_smooth(c);
    if (c.kind == "blobs") return blobs(c);
    return sphere(c, threads);
}

LoadedData split(const Dataset& ds, const DatasetConfig& c) {
    std::vector<std::uint32_t> tr, te;
    if (!ds.labels.empty() && c.train_per_class > 0) {
        std::map<int, std::size_t> seen;
        for (std::uint32_t i = 0; i < ds.signals.size(); ++i) {
            const std::size_t k = seen[ds.labels[i]]++;
            if (k < c.train_per_class) tr.push_back(i);
            else if (k < c.train_per_class + c.test_per_class) te.push_back(i);
        }
        for (const auto& [label, n] : seen)
            if (n < c.train_per_class + c.test_per_class)
                log_warn("class %d has only %zu rows for the requested split", label, n);
    } else {
        const std::size_t n = ds.signals.size();
        if (c.test_count > n) throw Error("dataset has fewer rows than test_count");
        const std::size_t ntr = c.train_count > 0 ? std::min(c.train_count, n - c.test_count) : n - c.test_count;
        for (std::uint32_t i = 0; i < ntr; ++i) tr.push_back(i);
        for (std::size_t i = ntr; i < ntr + c.test_count; ++i) te.push_back(static_cast<std::uint32_t>(i));
    }
    return {ds.subset(tr), ds.subset(te)};
}

}  // namespace

LoadedData load_data(const DatasetConfig& c, std::size_t threads) {
    Dataset all = haar::pad_to_power_of_two(load_raw(c, c.path, threads));
    LoadedData out;
    if (c.kind == "csv" && !c.test_path.empty()) {
        out.train = std::move(all);
        out.test = haar::pad_to_power_of_two(csv(c, c.test_path));
        if (out.test.dimension() != out.train.dimension()) throw Error("csv: train and test dimensions differ");
    } else {
        out = split(all, c);
    }
    if (out.train.signals.empty()) throw Error("dataset: no training rows");
    out.train.active = haar::active_vertices(out.train.signals);
    if (c.scramble_seed) {
        out.train = haar::scramble(out.train, *c.scramble_seed);
        if (!out.test.signals.empty()) out.test = haar::scramble(out.test, *c.scramble_seed);
    }
    if (c.shuffle_labels_seed && !out.train.labels.empty()) {
        haar::Rng rng(*c.shuffle_labels_seed);
        rng.shuffle(std::span<int>(out.train.labels));
    }
    return out;
}

std::vector<int> classes_of(std::span<const int> labels) {
    std::vector<int> c(labels.begin(), labels.end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

}  // namespace haarcli

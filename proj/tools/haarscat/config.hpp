#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace haarcli {

struct DatasetConfig {
    // idx | csv | grid-smooth | cycle-smooth | sphere | blobs
    std::string kind = "idx";
    std::string images = "data/mnist5k-images-idx3-ubyte";
    std::string labels = "data/mnist5k-labels-idx1-ubyte";
    std::size_t limit = 0;
    std::string path;       // csv
    std::string test_path;  // csv, optional
    bool label_last = true;
    std::size_t width = 16, height = 16;  // grid-smooth; csv frame when both set
    std::size_t d = 64;                   // cycle-smooth, blobs
    std::size_t count = 1000;             // synthetic kinds
    int smoothing_steps = 4;
    int classes = 2;  // blobs
    double separation = 4.0;
    std::size_t points = 4096;  // sphere
    double threshold = 0.1;
    std::string rotation = "none";  // none | uniform | small
    double rotation_sigma = 0.3;
    double half_extent = 0.7;
    std::uint64_t seed = 1;
    // Split: per-class counts when labelled and train_per_class > 0,
    // otherwise the first train_count rows (0 = all but the test rows)
    // followed by test_count rows.
    std::size_t train_per_class = 200, test_per_class = 100;
    std::size_t train_count = 0, test_count = 0;
    std::optional<std::uint64_t> scramble_seed;
    std::optional<std::uint64_t> shuffle_labels_seed;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    std::string geometry = "learned";  // learned | grid
    std::optional<int> J;              // unset: log2(d)
    int m_max = 4;
    int N = 1;
    std::optional<std::size_t> K;  // per class; unset: M / classes
    std::size_t M = 500;
    std::optional<double> sigma;  // unset: median pairwise distance
    double lambda = 1e-3;
    std::uint64_t seed = 1;
    bool standardize = true;
    double residual_tol = 1e-6;
    bool recompute_layers = false;

    struct Reconstruct {
        std::size_t d = 16;
        int J = 3;
        int trials = 100;
        std::uint64_t seed = 1;
        bool binary = false;
    } reconstruct;

    struct Bool {
        std::size_t d = 4;
        int J = 2;
        std::uint64_t seed = 1;
    } boolean;
};

/// Typed view of a merged config document. Unknown keys are rejected so
/// that typos fail loudly.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Canonical document: every field spelled out with its final type.
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const DatasetConfig& ds);

/// Recursively overlays `patch` onto `base`.
void merge_into(nlohmann::json& base, const nlohmann::json& patch);

/// Sets a dotted path ("dataset.kind") to a value given on the command line.
/// The value is parsed as JSON when possible and kept as a string otherwise.
void set_path(nlohmann::json& doc, const std::string& dotted, const std::string& value);

std::string hash_of(const nlohmann::json& doc);

}  // namespace haarcli

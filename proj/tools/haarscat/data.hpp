#pragma once

#include "config.hpp"
#include "haarscat/datasets.hpp"

namespace haarcli {

struct LoadedData {
    haar::Dataset train;
    haar::Dataset test;  // may have no signals
};

/// Builds or loads the configured dataset, pads it to a power-of-two
/// dimension, splits it, then applies the optional scramble and label shuffle.
LoadedData load_data(const DatasetConfig& cfg, std::size_t threads);

/// Class ids present in the labels, ascending.
std::vector<int> classes_of(std::span<const int> labels);

}  // namespace haarcli

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "haarscat/common.hpp"
#include "haarscat/multires.hpp"

namespace haar {

/// Permutation invariant pair operator: (alpha, beta) -> (alpha + beta, |alpha - beta|).
inline std::pair<double, double> haar_pair(double alpha, double beta) {
    const double diff = alpha - beta;
    return {alpha + beta, diff < 0 ? -diff : diff};
}

/// Inverse of haar_pair up to order: (sum, absdiff) -> (max, min).
/// Throws when absdiff is negative.
std::pair<double, double> invert_pair(double sum, double absdiff);

/// Layer j of a scattering network: rows are the 2^-j d nodes, columns the
/// 2^j feature types q. Stored row-major.
struct ScatteringTensor {
    int level = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double operator()(std::size_t n, std::size_t q) const { return data[n * cols + q]; }
    double& operator()(std::size_t n, std::size_t q) { return data[n * cols + q]; }
    std::span<const double> row(std::size_t n) const { return {data.data() + n * cols, cols}; }

    /// Column q as a vector over nodes.
    std::vector<double> column(std::size_t q) const;

    double norm_squared() const;
    double norm_l1() const;
};

/// S_0 x(n, 0) = x(n).
ScatteringTensor input_layer(std::span<const double> x);

/// One cascade step: regroups the nodes of `layer` with `pairing` and applies
/// haar_pair column-wise, writing sums to column 2q and differences to 2q+1.
ScatteringTensor scatter_step(const ScatteringTensor& layer, const Pairing& pairing);

/// All layers S_0 x ... S_J x.
std::vector<ScatteringTensor> transform(std::span<const double> x, const MultiresApprox& m, int J);

/// Only the final layer S_J x.
ScatteringTensor transform_top(std::span<const double> x, const MultiresApprox& m, int J);

/// Scattering order of column q: q = sum_k 2^(J - j_k) with 0 < j_1 < ... < j_m <= J.
struct OrderIndex {
    std::uint64_t q = 0;
    int order = 0;
    std::vector<int> scales;  // ascending j_1 < ... < j_m
};

OrderIndex order_of(std::uint64_t q, int J);

/// Column index for an ascending scale sequence; inverse of order_of.
std::uint64_t column_of(std::span<const int> scales, int J);

/// Number of order-m coefficients in S_J x: C(J, m) 2^-J d.
std::uint64_t count_order(int J, int m, std::uint64_t d);

/// Entries (n, q) of S_J x with order(q) <= m_max, in (n, q) lexicographic
/// order. This flattening order is what feature indices refer to.
std::vector<double> truncate_by_order(const ScatteringTensor& top, int m_max);

/// Columns kept by truncate_by_order, ascending.
std::vector<std::uint32_t> kept_columns(int J, int m_max);

// Boolean variant: (alpha, beta) -> (alpha or beta, alpha xor beta).

struct BoolTensor {
    int level = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> data;

    bool operator()(std::size_t n, std::size_t q) const { return data[n * cols + q] != 0; }
};

inline std::pair<bool, bool> bool_pair(bool alpha, bool beta) { return {alpha || beta, alpha != beta}; }

std::vector<BoolTensor> boolean_transform(std::span<const std::uint8_t> x, const MultiresApprox& m, int J);

// Feature export: flat little-endian float64 payload plus a JSON sidecar.

struct FeatureLayout {
    int J = 0;
    int m_max = 0;
    std::string multires_id;
    std::size_t rows = 0;     // signals
    std::size_t columns = 0;  // features per signal
};

nlohmann::json feature_sidecar(const FeatureLayout& layout);

/// Writes `values` (rows x columns, row-major) to `path` and the sidecar to `path` + ".json".
void write_feature_file(const std::filesystem::path& path, const FeatureLayout& layout,
                        std::span<const double> values);

/// Reads a payload written by write_feature_file; `layout` receives the sidecar.
std::vector<double> read_feature_file(const std::filesystem::path& path, FeatureLayout& layout);

}  // namespace haar

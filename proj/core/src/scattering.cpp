#include "haarscat/scattering.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "haarscat/io.hpp"

namespace haar {

std::pair<double, double> invert_pair(double sum, double absdiff) {
    if (absdiff < 0) throw Error("invert_pair: negative absolute difference");
    return {0.5 * (sum + absdiff), 0.5 * (sum - absdiff)};
}

std::vector<double> ScatteringTensor::column(std::size_t q) const {
    std::vector<double> out(rows);
    for (std::size_t n = 0; n < rows; ++n) out[n] = (*this)(n, q);
    return out;
}

double ScatteringTensor::norm_squared() const {
    double s = 0.0;
    for (const double v : data) s += v * v;
    return s;
}

double ScatteringTensor::norm_l1() const {
    double s = 0.0;
    for (const double v : data) s += std::abs(v);
    return s;
}

ScatteringTensor input_layer(std::span<const double> x) {
    ScatteringTensor t;
    t.level = 0;
    t.rows = x.size();
    t.cols = 1;
    t.data.assign(x.begin(), x.end());
    return t;
}

ScatteringTensor scatter_step(const ScatteringTensor& layer, const Pairing& pairing) {
    if (pairing.node_count() != layer.rows)
        throw Error("scatter_step: pairing covers " + std::to_string(pairing.node_count()) +
                    " nodes but the layer has " + std::to_string(layer.rows));
    ScatteringTensor out;
    out.level = layer.level + 1;
    out.rows = layer.rows / 2;
    out.cols = layer.cols * 2;
    out.data.resize(out.rows * out.cols);
    for (std::size_t n = 0; n < out.rows; ++n) {
        const auto [a, b] = pairing[n];
        const double* ra = layer.data.data() + a * layer.cols;
        const double* rb = layer.data.data() + b * layer.cols;
        double* dst = out.data.data() + n * out.cols;
        for (std::size_t q = 0; q < layer.cols; ++q) {
            const auto [s, d] = haar_pair(ra[q], rb[q]);
            dst[2 * q] = s;
            dst[2 * q + 1] = d;
        }
    }
    return out;
}

namespace {

void check_transform_args(std::span<const double> x, const MultiresApprox& m, int J) {
    if (x.size() != m.dimension())
        throw Error("transform: signal has length " + std::to_string(x.size()) +
                    ", multiresolution has d = " + std::to_string(m.dimension()));
    if (J < 0 || J > m.depth())
        throw Error("transform: J = " + std::to_string(J) + " outside 0.." + std::to_string(m.depth()));
}

}  // namespace

std::vector<ScatteringTensor> transform(std::span<const double> x, const MultiresApprox& m, int J) {
    check_transform_args(x, m, J);
    std::vector<ScatteringTensor> layers;
    layers.reserve(J + 1);
    layers.push_back(input_layer(x));
    for (int j = 0; j < J; ++j) layers.push_back(scatter_step(layers.back(), m.pairing(j)));
    return layers;
}

ScatteringTensor transform_top(std::span<const double> x, const MultiresApprox& m, int J) {
    check_transform_args(x, m, J);
    ScatteringTensor layer = input_layer(x);
    for (int j = 0; j < J; ++j) layer = scatter_step(layer, m.pairing(j));
    return layer;
}

OrderIndex order_of(std::uint64_t q, int J) {
    if (J < 0 || J > 62 || q >= (std::uint64_t{1} << J))
        throw Error("order_of: q = " + std::to_string(q) + " out of range for J = " + std::to_string(J));
    OrderIndex idx;
    idx.q = q;
    idx.order = std::popcount(q);
    // Bit b carries 2^(J - j), so higher bits belong to finer scales.
    for (int b = J - 1; b >= 0; --b)
        if (q & (std::uint64_t{1} << b)) idx.scales.push_back(J - b);
    return idx;
}

std::uint64_t column_of(std::span<const int> scales, int J) {
    std::uint64_t q = 0;
    int previous = 0;
    for (const int j : scales) {
        if (j <= previous || j > J) throw Error("column_of: scales must be strictly increasing in 1..J");
        q |= std::uint64_t{1} << (J - j);
        previous = j;
    }
    return q;
}

std::uint64_t count_order(int J, int m, std::uint64_t d) {
    if (J < 0 || m < 0 || m > J) throw Error("count_order: need 0 <= m <= J");
    std::uint64_t binom = 1;
    for (int i = 1; i <= m; ++i) binom = binom * static_cast<std::uint64_t>(J - m + i) / static_cast<std::uint64_t>(i);
    return binom * (d >> J);
}

std::vector<std::uint32_t> kept_columns(int J, int m_max) {
    if (m_max < 0) throw Error("kept_columns: m_max must be nonnegative");
    std::vector<std::uint32_t> cols;
    for (std::uint32_t q = 0; q < (1u << J); ++q)
        if (std::popcount(q) <= m_max) cols.push_back(q);
    return cols;
}

std::vector<double> truncate_by_order(const ScatteringTensor& top, int m_max) {
    const auto cols = kept_columns(top.level, m_max);
    std::vector<double> out;
    out.reserve(top.rows * cols.size());
    for (std::size_t n = 0; n < top.rows; ++n)
        for (const auto q : cols) out.push_back(top(n, q));
    return out;
}

std::vector<BoolTensor> boolean_transform(std::span<const std::uint8_t> x, const MultiresApprox& m, int J) {
    if (x.size() != m.dimension())
        throw Error("boolean_transform: signal has length " + std::to_string(x.size()) +
                    ", multiresolution has d = " + std::to_string(m.dimension()));
    if (J < 0 || J > m.depth()) throw Error("boolean_transform: J out of range");
    std::vector<BoolTensor> layers;
    BoolTensor base;
    base.rows = x.size();
    base.cols = 1;
    for (const auto v : x) base.data.push_back(v ? 1 : 0);
    layers.push_back(std::move(base));
    for (int j = 0; j < J; ++j) {
        const BoolTensor& prev = layers.back();
        const Pairing& p = m.pairing(j);
        BoolTensor next;
        next.level = j + 1;
        next.rows = prev.rows / 2;
        next.cols = prev.cols * 2;
        next.data.resize(next.rows * next.cols);
        for (std::size_t n = 0; n < next.rows; ++n) {
            const auto [a, b] = p[n];
            for (std::size_t q = 0; q < prev.cols; ++q) {
                const auto [o, x2] = bool_pair(prev(a, q), prev(b, q));
                next.data[n * next.cols + 2 * q] = o;
                next.data[n * next.cols + 2 * q + 1] = x2;
            }
        }
        layers.push_back(std::move(next));
    }
    return layers;
}

nlohmann::json feature_sidecar(const FeatureLayout& layout) {
    return {
        {"format", "float64-le"},
        {"J", layout.J},
        {"m_max", layout.m_max},
        {"multires_id", layout.multires_id},
        {"rows", layout.rows},
        {"columns", layout.columns},
        {"order", "per signal: for each multiresolution in id order, entries (n, q) of S_J with "
                  "popcount(q) <= m_max, n ascending then q ascending"},
    };
}

void write_feature_file(const std::filesystem::path& path, const FeatureLayout& layout,
                        std::span<const double> values) {
    if (values.size() != layout.rows * layout.columns)
        throw Error("write_feature_file: payload size does not match rows x columns");
    write_f64_le(path, values);
    write_json(std::filesystem::path(path.string() + ".json"), feature_sidecar(layout));
}

std::vector<double> read_feature_file(const std::filesystem::path& path, FeatureLayout& layout) {
    const auto side = read_json(std::filesystem::path(path.string() + ".json"));
    try {
        layout.J = side.at("J").get<int>();
        layout.m_max = side.at("m_max").get<int>();
        layout.multires_id = side.at("multires_id").get<std::string>();
        layout.rows = side.at("rows").get<std::size_t>();
        layout.columns = side.at("columns").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("feature sidecar: ") + e.what());
    }
    auto values = read_f64_le(path);
    if (values.size() != layout.rows * layout.columns)
        throw Error("read_feature_file: payload size does not match sidecar");
    return values;
}

}  // namespace haar

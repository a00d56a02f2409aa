#include "haarscat/datasets.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <algorithm>
#include <string>

#include "haarscat/io.hpp"

namespace haar {

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > signals.size()) throw Error("Dataset::slice: range out of bounds");
    std::vector<std::uint32_t> rows;
    for (std::size_t i = begin; i < end; ++i) rows.push_back(static_cast<std::uint32_t>(i));
    return subset(rows);
}

Dataset Dataset::subset(std::span<const std::uint32_t> rows) const {
    Dataset out;
    out.geometry = geometry;
    out.permutation = permutation;
    out.active = active;
    out.width = width;
    out.height = height;
    for (const auto i : rows) {
        if (i >= signals.size()) throw Error("Dataset::subset: row out of range");
        out.signals.push_back(signals[i]);
        if (!labels.empty()) out.labels.push_back(labels[i]);
    }
    return out;
}

std::vector<std::uint32_t> active_vertices(std::span<const Signal> signals) {
    if (signals.empty()) return {};
    std::vector<char> on(signals.front().size(), 0);
    for (const auto& x : signals)
        for (std::size_t v = 0; v < x.size(); ++v) on[v] = on[v] || x[v] != 0.0;
    std::vector<std::uint32_t> out;
    for (std::size_t v = 0; v < on.size(); ++v)
        if (on[v]) out.push_back(static_cast<std::uint32_t>(v));
    return out;
}

namespace {

std::uint32_t be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xff));
}

}  // namespace

IdxArray read_idx(const std::filesystem::path& path, std::uint32_t expected_magic) {
    const auto bytes = read_bytes(path);
    if (bytes.size() < 4) throw Error(path.string() + ": file too short for an IDX header");
    const std::uint32_t magic = be32(bytes.data());
    if (magic != expected_magic) {
        std::ostringstream os;
        os << path.string() << ": bad IDX magic 0x" << std::hex << std::setw(8) << std::setfill('0') << magic
           << ", expected 0x" << std::setw(8) << expected_magic;
        throw Error(os.str());
    }
    const std::size_t ndims = magic & 0xff;
    if (bytes.size() < 4 + 4 * ndims) throw Error(path.string() + ": truncated IDX header");
    IdxArray out;
    std::size_t count = 1;
    for (std::size_t k = 0; k < ndims; ++k) {
        out.dims.push_back(be32(bytes.data() + 4 + 4 * k));
        count *= out.dims.back();
    }
    const std::size_t offset = 4 + 4 * ndims;
    if (bytes.size() - offset != count)
        throw Error(path.string() + ": IDX payload has " + std::to_string(bytes.size() - offset) +
                    " bytes, header declares " + std::to_string(count));
    out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
    return out;
}

void write_idx(const std::filesystem::path& path, const IdxArray& array) {
    std::vector<std::uint8_t> bytes;
    put_be32(bytes, 0x00000800u | static_cast<std::uint32_t>(array.dims.size()));
    std::size_t count = 1;
    for (const auto d : array.dims) {
        put_be32(bytes, d);
        count *= d;
    }
    if (count != array.data.size()) throw Error("write_idx: payload size does not match dims");
    bytes.insert(bytes.end(), array.data.begin(), array.data.end());
    write_bytes(path, bytes);
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, IdxOptions options) {
    const auto img = read_idx(images, 0x00000803u);
    const auto lab = read_idx(labels, 0x00000801u);
    if (img.dims.size() != 3) throw Error(images.string() + ": expected a 3-dimensional image array");
    if (lab.dims.size() != 1) throw Error(labels.string() + ": expected a 1-dimensional label array");
    if (img.dims[0] != lab.dims[0])
        throw Error("load_idx: " + std::to_string(img.dims[0]) + " images but " + std::to_string(lab.dims[0]) +
                    " labels");
    const std::size_t rows = img.dims[1], cols = img.dims[2];
    std::size_t count = img.dims[0];
    if (options.limit > 0) count = std::min(count, options.limit);
    const std::size_t side = next_power_of_two(std::max(rows, cols));

    Dataset ds;
    ds.width = side;
    ds.height = side;
    ds.signals.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Signal x(side * side, 0.0);
        const std::uint8_t* px = img.data.data() + i * rows * cols;
        for (std::size_t y = 0; y < rows; ++y)
            for (std::size_t c = 0; c < cols; ++c) x[y * side + c] = px[y * cols + c] / 255.0;
        ds.signals.push_back(std::move(x));
        ds.labels.push_back(lab.data[i]);
    }
    ds.geometry = grid_graph(side, side);
    ds.active = active_vertices(ds.signals);
    return ds;
}

std::vector<std::uint32_t> inverse_permutation(std::span<const std::uint32_t> perm) {
    std::vector<std::uint32_t> inv(perm.size());
    std::vector<char> seen(perm.size(), 0);
    for (std::uint32_t v = 0; v < perm.size(); ++v) {
        if (perm[v] >= perm.size() || seen[perm[v]]) throw Error("inverse_permutation: not a bijection");
        seen[perm[v]] = 1;
        inv[perm[v]] = v;
    }
    return inv;
}

Dataset scramble(const Dataset& ds, std::uint64_t seed) {
    const std::size_t d = ds.dimension();
    Rng rng(seed);
    const auto perm = rng.permutation(d);
    Dataset out;
    out.labels = ds.labels;
    out.width = ds.width;
    out.height = ds.height;
    out.permutation = perm;
    out.signals.reserve(ds.signals.size());
    for (const auto& x : ds.signals) {
        Signal y(d);
        for (std::size_t v = 0; v < d; ++v) y[perm[v]] = x[v];
        out.signals.push_back(std::move(y));
    }
    if (ds.geometry) out.geometry = ds.geometry->relabeled(perm);
    for (const auto v : ds.active) out.active.push_back(perm[v]);
    std::sort(out.active.begin(), out.active.end());
    return out;
}

Signal unscramble(std::span<const double> y, std::span<const std::uint32_t> perm) {
    if (y.size() != perm.size()) throw Error("unscramble: length mismatch");
    Signal x(y.size());
    for (std::size_t v = 0; v < perm.size(); ++v) x[v] = y[perm[v]];
    return x;
}

Graph grid_graph(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) throw Error("grid_graph: dimensions must be positive");
    std::vector<VertexPair> edges;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const auto v = static_cast<std::uint32_t>(y * width + x);
            if (x + 1 < width) edges.emplace_back(v, v + 1);
            if (y + 1 < height) {
                edges.emplace_back(v, static_cast<std::uint32_t>(v + width));
                if (x + 1 < width) edges.emplace_back(v, static_cast<std::uint32_t>(v + width + 1));
                if (x > 0) edges.emplace_back(v, static_cast<std::uint32_t>(v + width - 1));
            }
        }
    return Graph(width * height, std::move(edges));
}

SpherePointCloud sphere_sample(std::size_t d, double threshold, std::uint64_t seed) {
    if (d < 1) throw Error("sphere_sample: need at least one point");
    if (!(threshold > 0) || threshold > std::numbers::pi) throw Error("sphere_sample: threshold must lie in (0, pi]");
    SpherePointCloud cloud;
    cloud.threshold = threshold;
    Rng rng(seed);
    while (cloud.points.size() < d) {
        const double a = rng.normal(), b = rng.normal(), c = rng.normal();
        const double r = std::sqrt(a * a + b * b + c * c);
        if (r < 1e-12) continue;
        cloud.points.push_back({a / r, b / r, c / r});
    }
    std::vector<VertexPair> edges;
    for (std::uint32_t u = 0; u < d; ++u)
        for (std::uint32_t v = u + 1; v < d; ++v) {
            const auto& p = cloud.points[u];
            const auto& q = cloud.points[v];
            const double dot = std::clamp(p[0] * q[0] + p[1] * q[1] + p[2] * q[2], -1.0, 1.0);
            if (std::acos(dot) < threshold || (threshold >= std::numbers::pi)) edges.emplace_back(u, v);
        }
    cloud.graph = Graph(d, std::move(edges));
    return cloud;
}

Dataset synthetic_smooth(const Graph& g, std::size_t count, std::uint64_t seed, int smoothing_steps) {
    if (smoothing_steps < 0) throw Error("synthetic_smooth: smoothing_steps must be nonnegative");
    const std::size_t d = g.vertex_count();
    Dataset ds;
    ds.geometry = g;
    Rng root(seed);
    ds.signals.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = root.split(i);
        Signal x(d);
        for (auto& v : x) v = rng.uniform();
        Signal next(d);
        for (int s = 0; s < smoothing_steps; ++s) {
            for (std::size_t v = 0; v < d; ++v) {
                double sum = x[v];
                for (const auto u : g.adjacency()[v]) sum += x[u];
                next[v] = sum / static_cast<double>(1 + g.adjacency()[v].size());
            }
            x.swap(next);
        }
        ds.signals.push_back(std::move(x));
    }
    ds.active = active_vertices(ds.signals);
    return ds;
}

double edge_total_variation(const Graph& g, std::span<const double> x) {
    if (x.size() != g.vertex_count()) throw Error("edge_total_variation: dimension mismatch");
    double tv = 0.0;
    for (const auto& [u, v] : g.edges()) tv += std::abs(x[u] - x[v]);
    return tv;
}

Rotation identity_rotation() { return {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

namespace {

Rotation from_quaternion(double w, double x, double y, double z) {
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    w /= n, x /= n, y /= n, z /= n;
    return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
             {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
             {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

void check_orthogonal(const Rotation& r) {
    double err = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += r[k][i] * r[k][j];
            err += (s - (i == j ? 1.0 : 0.0)) * (s - (i == j ? 1.0 : 0.0));
        }
    if (std::sqrt(err) >= 1e-8) throw Error("project_to_sphere: rotation is not orthogonal");
}

}  // namespace

Rotation random_rotation(Rng& rng, double angle_sigma) {
    if (angle_sigma <= 0) {
        double q[4];
        double n = 0;
        do {
            n = 0;
            for (double& v : q) {
                v = rng.normal();
                n += v * v;
            }
        } while (n < 1e-12);
        return from_quaternion(q[0], q[1], q[2], q[3]);
    }
    double a[3], n = 0;
    do {
        n = 0;
        for (double& v : a) {
            v = rng.normal();
            n += v * v;
        }
    } while (n < 1e-12);
    n = std::sqrt(n);
    const double half = 0.5 * angle_sigma * rng.normal();
    const double s = std::sin(half) / n;
    return from_quaternion(std::cos(half), a[0] * s, a[1] * s, a[2] * s);
}

Signal project_to_sphere(std::span<const double> image, std::size_t width, std::size_t height,
                         const SpherePointCloud& cloud, const Rotation& rotation, ProjectionOptions options) {
    if (image.size() != width * height) throw Error("project_to_sphere: image size does not match width x height");
    if (!(options.half_extent > 0)) throw Error("project_to_sphere: half_extent must be positive");
    check_orthogonal(rotation);
    Signal out(cloud.points.size(), 0.0);
    const double w = static_cast<double>(width), h = static_cast<double>(height);
    auto pixel = [&](long x, long y) -> double {
        if (x < 0 || y < 0 || x >= static_cast<long>(width) || y >= static_cast<long>(height)) return 0.0;
        return image[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
    };
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto& p = cloud.points[i];
        // Undo the rotation: u = R^T p.
        double u[3];
        for (int k = 0; k < 3; ++k) u[k] = rotation[0][k] * p[0] + rotation[1][k] * p[1] + rotation[2][k] * p[2];
        if (u[2] <= 0) continue;
        const double X = u[0] / u[2], Y = u[1] / u[2];
        if (std::abs(X) >= options.half_extent || std::abs(Y) >= options.half_extent) continue;
        // Pixel centres sit at (k + 0.5) in image units.
        const double fx = (X / options.half_extent + 1) * 0.5 * w - 0.5;
        const double fy = (1 - Y / options.half_extent) * 0.5 * h - 0.5;
        const long x0 = static_cast<long>(std::floor(fx)), y0 = static_cast<long>(std::floor(fy));
        const double tx = fx - static_cast<double>(x0), ty = fy - static_cast<double>(y0);
        out[i] = (1 - tx) * (1 - ty) * pixel(x0, y0) + tx * (1 - ty) * pixel(x0 + 1, y0) +
                 (1 - tx) * ty * pixel(x0, y0 + 1) + tx * ty * pixel(x0 + 1, y0 + 1);
    }
    return out;
}

Dataset pad_to_power_of_two(const Dataset& ds) {
    const std::size_t d = ds.dimension();
    const std::size_t target = next_power_of_two(d);
    if (target == d) return ds;
    Dataset out = ds;
    for (auto& x : out.signals) x.resize(target, 0.0);
    if (ds.geometry) {
        auto edges = ds.geometry->edges();
        out.geometry = Graph(target, std::move(edges));
    }
    out.permutation.clear();
    // Padded vertices are identically zero, so they never become active.
    out.active = active_vertices(out.signals);
    return out;
}

Dataset load_csv(const std::filesystem::path& path, bool label_last) {
    auto rows = read_csv_rows(path);
    Dataset ds;
    for (auto& row : rows) {
        if (label_last) {
            if (row.empty()) throw Error(path.string() + ": row without label");
            const double l = row.back();
            if (l != std::floor(l)) throw Error(path.string() + ": non-integer label");
            ds.labels.push_back(static_cast<int>(l));
            row.pop_back();
        }
        ds.signals.push_back(std::move(row));
    }
    ds.active = active_vertices(ds.signals);
    return ds;
}

void save_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ds.signals.size());
    for (std::size_t i = 0; i < ds.signals.size(); ++i) {
        rows.push_back(ds.signals[i]);
        if (!ds.labels.empty()) rows.back().push_back(ds.labels[i]);
    }
    write_csv_rows(path, rows);
}

void save_points_csv(const std::filesystem::path& path, const SpherePointCloud& cloud) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : cloud.points) rows.push_back({p[0], p[1], p[2]});
    write_csv_rows(path, rows);
}

}  // namespace haar

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "haarscat/common.hpp"
#include "haarscat/multires.hpp"
#include "haarscat/rng.hpp"

namespace haar {

struct Dataset {
    std::vector<Signal> signals;
    std::vector<int> labels;        // empty when unlabeled
    std::optional<Graph> geometry;  // ground truth, for evaluation only
    std::vector<std::uint32_t> permutation;  // applied scramble, empty if none
    std::vector<std::uint32_t> active;       // vertices nonzero in some signal
    std::size_t width = 0;  // image frame, 0 for non-image data
    std::size_t height = 0;

    std::size_t dimension() const { return signals.empty() ? 0 : signals.front().size(); }
    /// Rows [begin, end) with their labels; geometry and permutation are shared.
    Dataset slice(std::size_t begin, std::size_t end) const;
    /// Selected rows in the given order.
    Dataset subset(std::span<const std::uint32_t> rows) const;
};

/// Vertices where at least one signal is nonzero, ascending.
std::vector<std::uint32_t> active_vertices(std::span<const Signal> signals);

// IDX files (big-endian header: magic 0x00000803 images, 0x00000801 labels).

struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;
};

IdxArray read_idx(const std::filesystem::path& path, std::uint32_t expected_magic);
void write_idx(const std::filesystem::path& path, const IdxArray& array);

struct IdxOptions {
    std::size_t limit = 0;  // read at most this many items, 0 for all
};

/// Loads images scaled to [0, 1], zero-padded into the top-left corner of
/// the next power-of-two square frame (28 x 28 becomes 32 x 32). Geometry is
/// the 8-neighbour grid of the padded frame.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, IdxOptions options = {});

/// Applies one seeded permutation to every signal: y[perm[v]] = x[v]. The
/// geometry and active set are relabeled the same way.
Dataset scramble(const Dataset& ds, std::uint64_t seed);

/// Undoes a permutation applied by scramble.
Signal unscramble(std::span<const double> y, std::span<const std::uint32_t> perm);
std::vector<std::uint32_t> inverse_permutation(std::span<const std::uint32_t> perm);

/// 8-neighbour pixel grid, vertex y * width + x.
Graph grid_graph(std::size_t width, std::size_t height);

struct SpherePointCloud {
    std::vector<std::array<double, 3>> points;
    Graph graph;  // edge iff geodesic distance < threshold
    double threshold = 0;
};

SpherePointCloud sphere_sample(std::size_t d, double threshold, std::uint64_t seed);

/// Uniform noise in [0, 1) smoothed `smoothing_steps` times by averaging
/// each vertex with its neighbours.
Dataset synthetic_smooth(const Graph& g, std::size_t count, std::uint64_t seed, int smoothing_steps);

/// Sum over edges of |x(u) - x(v)|.
double edge_total_variation(const Graph& g, std::span<const double> x);

using Rotation = std::array<std::array<double, 3>, 3>;

/// Uniform random rotation, or with angle_sigma > 0 a rotation about a
/// random axis by a normal angle of that standard deviation.
Rotation random_rotation(Rng& rng, double angle_sigma = 0.0);
Rotation identity_rotation();

struct ProjectionOptions {
    double half_extent = 0.7;  // tangent-plane half width covered by the image
};

/// Places the image on the tangent plane at the north pole (gnomonic
/// coordinates), rotates it by `rotation`, and samples each cloud point by
/// bilinear interpolation. Points outside the patch read 0.
Signal project_to_sphere(std::span<const double> image, std::size_t width, std::size_t height,
                         const SpherePointCloud& cloud, const Rotation& rotation,
                         ProjectionOptions options = {});

/// Zero-pads signals to the next power of two; padded vertices are never active.
Dataset pad_to_power_of_two(const Dataset& ds);

/// Signals as CSV rows; with label_last the final field of each row is the class.
Dataset load_csv(const std::filesystem::path& path, bool label_last = false);
void save_csv(const std::filesystem::path& path, const Dataset& ds);

void save_points_csv(const std::filesystem::path& path, const SpherePointCloud& cloud);

}  // namespace haar

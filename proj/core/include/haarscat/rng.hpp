#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace haar {

/// Seeded generator with platform-independent output.
///
/// Wraps std::mt19937_64, whose sequence is fixed by the standard, and
/// implements its own distributions because the std:: distributions are
/// implementation defined. Child streams are derived with SplitMix64 so that
/// independent components can draw from disjoint, reproducible streams.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal deviate (Marsaglia polar method).
    double normal();

    /// Independent generator for a named sub-stream.
    Rng split(std::uint64_t stream) const;

    std::uint64_t seed() const { return seed_; }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

    /// Uniformly random permutation of 0..n-1.
    std::vector<std::uint32_t> permutation(std::size_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace haar

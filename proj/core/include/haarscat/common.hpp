#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace haar {

/// Base exception for all precondition and I/O failures raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A real-valued signal on the vertices 0..d-1.
using Signal = std::vector<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Exact base-2 logarithm; throws if n is not a power of two.
int log2_exact(std::size_t n);

std::size_t next_power_of_two(std::size_t n);

/// Relative comparison used for real-valued equality tests.
inline bool nearly_equal(double a, double b, double rel_tol) {
    const double scale = std::max({1.0, a < 0 ? -a : a, b < 0 ? -b : b});
    const double diff = a > b ? a - b : b - a;
    return diff <= rel_tol * scale;
}

}  // namespace haar

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "haarscat/common.hpp"
#include "haarscat/multires.hpp"
#include "haarscat/scattering.hpp"

namespace haar {

/// psi_{j,n} = 1_{V_{j-1,a_n}} - 1_{V_{j-1,b_n}}, kept as its two supports.
struct SparseWavelet {
    int level = 0;
    std::uint32_t node = 0;
    std::vector<std::uint32_t> positive;
    std::vector<std::uint32_t> negative;

    double inner(std::span<const double> x) const;
    double norm_squared() const { return static_cast<double>(positive.size() + negative.size()); }
};

/// Non-normalized orthogonal Haar basis of a multiresolution truncated at J:
/// the indicators of V_{J,n} plus the wavelets psi_{j,n} for j = 1..J.
struct HaarBasis {
    std::size_t d = 0;
    int J = 0;
    std::vector<std::vector<std::uint32_t>> indicators;  // V_{J,n}
    std::vector<std::vector<SparseWavelet>> wavelets;    // wavelets[j-1][n]
    std::vector<std::uint32_t> top_node;                 // top_node[v] = n with v in V_{J,n}

    std::size_t size() const;

    /// All basis vectors as dense signals: indicators first, then wavelets by
    /// ascending level and node.
    std::vector<Signal> dense() const;
};

HaarBasis build_basis(const MultiresApprox& m, int J);

/// Gram matrix of the dense basis, row-major size() x size().
std::vector<double> gram_matrix(const HaarBasis& basis);

/// Inner products of x with every basis vector, in dense() order.
std::vector<double> analyze(const HaarBasis& basis, std::span<const double> x);

/// Inverse of analyze: sum_k c_k v_k / ||v_k||^2.
Signal synthesize(const HaarBasis& basis, std::span<const double> coefficients);

/// <x, 1_{V_{J,n}}> for each n.
std::vector<double> order0_oracle(std::span<const double> x, const HaarBasis& basis);

/// sum over p with V_{j1,p} in V_{J,n} of |<x, psi_{j1,p}>|, for each n.
std::vector<double> order1_oracle(std::span<const double> x, const HaarBasis& basis, int j1);

/// Piecewise-constant extension of a layer to the vertices:
/// out[v * cols + q] = layer(n, q) for v in V_{j,n}.
std::vector<double> extended_map(const ScatteringTensor& layer, const MultiresApprox& m);

/// Coefficient of S_J x with scales j_1 < ... < j_k, computed from wavelet
/// inner products alone. The order k-1 coefficients at level j_{k-1} are
/// extended to the vertices, analysed with psi_{j_k,p}, and the absolute
/// values are summed over the V_{j_k,p} inside each V_{J,n}. Because the
/// extended map repeats each value on 2^{j_{k-1}} vertices, the inner product
/// is divided by that size. The empty scale list gives the order 0 sums.
std::vector<double> cascade_oracle(std::span<const double> x, const MultiresApprox& m, int J,
                                   std::span<const int> scales);

}  // namespace haar

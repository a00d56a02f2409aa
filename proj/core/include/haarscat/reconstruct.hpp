#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "haarscat/common.hpp"
#include "haarscat/multires.hpp"
#include "haarscat/scattering.hpp"

namespace haar {

class ReconstructionError : public Error {
public:
    enum class Kind { Ambiguous, Inconsistent };

    ReconstructionError(Kind kind, int level, const std::string& what) : Error(what), kind_(kind), level_(level) {}

    Kind kind() const { return kind_; }
    /// Level of the layer that could not be recovered.
    int level() const { return level_; }

private:
    Kind kind_;
    int level_;
};

/// True iff no proper nonempty node subset is closed under both pairings,
/// i.e. the alternating walk p0, p1, p0, ... from node 0 visits every node
/// before returning.
bool is_interlaced(const Pairing& p0, const Pairing& p1);

/// 2^J multiresolutions built from two interlaced pairings per level. Member
/// index bit j selects which of the two pairings is used at level j.
class InterlacedFamily {
public:
    InterlacedFamily(std::size_t d, std::vector<std::pair<Pairing, Pairing>> levels);

    std::size_t dimension() const { return d_; }
    int depth() const { return static_cast<int>(levels_.size()); }
    std::size_t member_count() const { return std::size_t{1} << levels_.size(); }
    const std::pair<Pairing, Pairing>& level(int j) const { return levels_.at(j); }
    const Pairing& pairing(int j, int choice) const { return choice ? levels_.at(j).second : levels_.at(j).first; }

    MultiresApprox member(std::size_t index) const;

private:
    std::size_t d_;
    std::vector<std::pair<Pairing, Pairing>> levels_;
};

/// On d' nodes, the first pairing joins (2n, 2n+1) and the second joins
/// (2n+1, 2n+2 mod d'); their union is one Hamiltonian cycle.
InterlacedFamily standard_interlaced_family(std::size_t d, int J);

/// Recovers layer j from the two layers j+1 obtained with p0 and p1. Throws
/// ReconstructionError when a channel has several consistent solutions
/// (the alternating two-value pattern) or none.
ScatteringTensor invert_layer(const ScatteringTensor& s0, const ScatteringTensor& s1, const Pairing& p0,
                              const Pairing& p1);

struct ReconstructionTrace {
    /// Largest number of candidate vectors kept for a single channel, per
    /// recovered level (index j = 0..J-1).
    std::vector<std::size_t> max_candidates;
};

/// Inverts the scattering transform from the top layers of all family
/// members (indexed as in InterlacedFamily::member). Works top-down and keeps
/// every channel solution consistent with the layer above, so locally
/// ambiguous channels can still be resolved by coarser levels.
Signal reconstruct(std::span<const ScatteringTensor> outputs, const InterlacedFamily& family,
                   ReconstructionTrace* trace = nullptr);

}  // namespace haar

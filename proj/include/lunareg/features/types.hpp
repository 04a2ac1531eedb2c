#pragma once

#include <cstdint>
#include <vector>

#include "lunareg/core/error.hpp"

namespace lunareg {

/// A detected feature point in sub-pixel image coordinates.
struct KeyPoint {
    double x = 0.0;
    double y = 0.0;
    double scale = 1.0;        ///< detection sigma in original-image pixels
    double orientation = 0.0;  ///< radians in [0, 2pi)
    double response = 0.0;     ///< detector strength
};

using KeyPointSet = std::vector<KeyPoint>;

enum class DescriptorKind { FloatL2, BinaryHamming, Mim };

/// One descriptor row per keypoint. FloatL2 and Mim rows are floats (unit L2
/// norm); BinaryHamming rows are packed bits, `dim` counting bits.
struct DescriptorSet {
    DescriptorKind kind = DescriptorKind::FloatL2;
    int dim = 0;
    std::vector<float> floats;        ///< row-major rows() x dim
    std::vector<std::uint64_t> bits;  ///< row-major rows() x words_per_row()

    bool is_binary() const { return kind == DescriptorKind::BinaryHamming; }
    int words_per_row() const { return (dim + 63) / 64; }

    int rows() const {
        if (dim == 0)
            return 0;
        return is_binary() ? static_cast<int>(bits.size()) / words_per_row()
                           : static_cast<int>(floats.size()) / dim;
    }

    const float* float_row(int i) const {
        return floats.data() + static_cast<std::size_t>(i) * dim;
    }
    float* float_row(int i) { return floats.data() + static_cast<std::size_t>(i) * dim; }

    const std::uint64_t* bit_row(int i) const {
        return bits.data() + static_cast<std::size_t>(i) * words_per_row();
    }
    std::uint64_t* bit_row(int i) {
        return bits.data() + static_cast<std::size_t>(i) * words_per_row();
    }

    bool bit(int row, int b) const {
        return (bit_row(row)[b >> 6] >> (b & 63)) & 1u;
    }
    void set_bit(int row, int b) { bit_row(row)[b >> 6] |= std::uint64_t{1} << (b & 63); }

    /// Checks structural invariants (row shape, unit norm for float kinds).
    void validate() const;
};

/// Scales every float row to unit L2 norm (zero rows are left zero).
void l2_normalize_rows(DescriptorSet& set);

}  // namespace lunareg

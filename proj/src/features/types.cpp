#include "lunareg/features/types.hpp"

#include <cmath>

namespace lunareg {

void DescriptorSet::validate() const {
    if (dim < 0)
        throw DimensionMismatch("descriptor dim must be non-negative");
    if (is_binary()) {
        if (dim > 0 && bits.size() % words_per_row() != 0)
            throw DimensionMismatch("binary descriptor storage is not a whole number of rows");
    } else {
        if (dim > 0 && floats.size() % dim != 0)
            throw DimensionMismatch("float descriptor storage is not a whole number of rows");
        for (int r = 0; r < rows(); ++r) {
            double norm2 = 0.0;
            const float* row = float_row(r);
            for (int i = 0; i < dim; ++i)
                norm2 += static_cast<double>(row[i]) * row[i];
            if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
                throw DimensionMismatch("float descriptor row is not unit-normalized");
        }
    }
}

void l2_normalize_rows(DescriptorSet& set) {
    if (set.is_binary())
        return;
    for (int r = 0; r < set.rows(); ++r) {
        float* row = set.float_row(r);
        double norm2 = 0.0;
        for (int i = 0; i < set.dim; ++i)
            norm2 += static_cast<double>(row[i]) * row[i];
        if (norm2 <= 0.0)
            continue;
        const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
        for (int i = 0; i < set.dim; ++i)
            row[i] *= inv;
    }
}

}  // namespace lunareg

#include "lunareg/matching/matching.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace lunareg {

namespace {

struct TwoBest {
    double d1 = std::numeric_limits<double>::max();  ///< best distance
    double d2 = std::numeric_limits<double>::max();  ///< second best
    int j1 = -1;                                     ///< best index (lowest on ties)

    void offer(double d, int j) {
        if (d < d1) {
            d2 = d1;
            d1 = d;
            j1 = j;
        } else if (d < d2) {
            d2 = d;
        }
    }
};

/// Best and second-best Euclidean neighbour of every row of `a` in `b`,
/// via blocked Gram products: |x-y|^2 = |x|^2 + |y|^2 - 2 x.y.
std::vector<TwoBest> nearest_float(const DescriptorSet& a, const DescriptorSet& b) {
    const int na = a.rows(), nb = b.rows(), dim = a.dim;
    using MatrixRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const MatrixRM> ma(a.floats.data(), na, dim);
    Eigen::Map<const MatrixRM> mb(b.floats.data(), nb, dim);

    const Eigen::VectorXf norm_a = ma.rowwise().squaredNorm();
    const Eigen::VectorXf norm_b = mb.rowwise().squaredNorm();

    std::vector<TwoBest> best(na);
    constexpr int kBlock = 256;
    MatrixRM gram;
    for (int i0 = 0; i0 < na; i0 += kBlock) {
        const int rows = std::min(kBlock, na - i0);
        gram.noalias() = ma.middleRows(i0, rows) * mb.transpose();
        for (int r = 0; r < rows; ++r) {
            TwoBest& tb = best[i0 + r];
            for (int j = 0; j < nb; ++j) {
                const double d2 = std::max(
                    0.0, static_cast<double>(norm_a[i0 + r] + norm_b[j] - 2.0f * gram(r, j)));
                tb.offer(d2, j);
            }
        }
    }
    // Squared distances were compared; report Euclidean.
    for (TwoBest& tb : best) {
        if (tb.d1 != std::numeric_limits<double>::max())
            tb.d1 = std::sqrt(tb.d1);
        if (tb.d2 != std::numeric_limits<double>::max())
            tb.d2 = std::sqrt(tb.d2);
    }
    return best;
}

std::vector<TwoBest> nearest_binary(const DescriptorSet& a, const DescriptorSet& b) {
    const int na = a.rows(), nb = b.rows(), words = a.words_per_row();
    std::vector<TwoBest> best(na);
    for (int i = 0; i < na; ++i) {
        const std::uint64_t* ra = a.bit_row(i);
        for (int j = 0; j < nb; ++j) {
            const std::uint64_t* rb = b.bit_row(j);
            int d = 0;
            for (int w = 0; w < words; ++w)
                d += std::popcount(ra[w] ^ rb[w]);
            best[i].offer(static_cast<double>(d), j);
        }
    }
    return best;
}

}  // namespace

MatchSet match_descriptors(const KeyPointSet& kp_a, const DescriptorSet& a,
                           const KeyPointSet& kp_b, const DescriptorSet& b,
                           double ratio, bool cross_check) {
    if (a.kind != b.kind || a.dim != b.dim)
        throw DescriptorKindMismatch();
    if (ratio <= 0.0 || ratio > 1.0)
        throw ConfigInvalid("ratio", "must be in (0, 1]");

    MatchSet out;
    out.keypoints_a = kp_a;
    out.keypoints_b = kp_b;
    if (a.rows() == 0 || b.rows() == 0)
        return out;

    const bool binary = a.is_binary();
    const std::vector<TwoBest> fwd = binary ? nearest_binary(a, b) : nearest_float(a, b);
    std::vector<int> best_of_b;
    if (cross_check) {
        const std::vector<TwoBest> bwd = binary ? nearest_binary(b, a) : nearest_float(b, a);
        best_of_b.resize(bwd.size());
        for (std::size_t j = 0; j < bwd.size(); ++j)
            best_of_b[j] = bwd[j].j1;
    }

    for (int i = 0; i < a.rows(); ++i) {
        const TwoBest& tb = fwd[i];
        if (tb.j1 < 0)
            continue;
        // Ratio test only applies when a second neighbour exists.
        if (b.rows() > 1 && !(tb.d1 < ratio * tb.d2))
            continue;
        if (cross_check && best_of_b[tb.j1] != i)
            continue;
        out.pairs.push_back({i, tb.j1, tb.d1});
    }

    std::sort(out.pairs.begin(), out.pairs.end(), [](const Match& l, const Match& r) {
        if (l.distance != r.distance)
            return l.distance < r.distance;
        if (l.index_a != r.index_a)
            return l.index_a < r.index_a;
        return l.index_b < r.index_b;
    });
    return out;
}

}  // namespace lunareg

#pragma once

#include <Eigen/Core>

#include "lunareg/features/types.hpp"

namespace lunareg {

struct Match {
    int index_a = 0;
    int index_b = 0;
    double distance = 0.0;
};

/// Correspondences between two keypoint sets, sorted by ascending distance.
struct MatchSet {
    KeyPointSet keypoints_a;
    KeyPointSet keypoints_b;
    std::vector<Match> pairs;

    int size() const { return static_cast<int>(pairs.size()); }
    bool empty() const { return pairs.empty(); }

    Eigen::Vector2d point_a(int i) const {
        const KeyPoint& k = keypoints_a[pairs[i].index_a];
        return {k.x, k.y};
    }
    Eigen::Vector2d point_b(int i) const {
        const KeyPoint& k = keypoints_b[pairs[i].index_b];
        return {k.x, k.y};
    }
};

/// Nearest-neighbour matching with Lowe ratio test (d1/d2 < ratio, strict)
/// and optional mutual-best cross check. Metric follows the descriptor kind:
/// Euclidean for float kinds, Hamming for binary.
MatchSet match_descriptors(const KeyPointSet& kp_a, const DescriptorSet& a,
                           const KeyPointSet& kp_b, const DescriptorSet& b,
                           double ratio, bool cross_check);

}  // namespace lunareg

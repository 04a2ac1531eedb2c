#pragma once

#include <cstdint>
#include <vector>

#include "lunareg/matching/homography.hpp"
#include "lunareg/matching/matching.hpp"

namespace lunareg {

struct RansacParams {
    double threshold_px = 3.0;
    int max_iters = 2000;
    double confidence = 0.995;
    std::uint64_t seed = 0;
};

struct RansacResult {
    Homography h;
    std::vector<std::uint8_t> inlier_mask;  ///< one flag per input match
    int iterations_used = 0;

    int inlier_count() const;
};

/// Seeded 4-sample RANSAC over the matched point pairs, symmetric transfer
/// error inlier test, adaptive early exit, final least-squares refit on the
/// inlier set. Sampling is a pure function of (seed, iteration index) over a
/// canonical ordering of the matches, so the result does not depend on the
/// order matches are supplied in or on how iterations are scheduled.
RansacResult ransac_homography(const MatchSet& matches, const RansacParams& params);

}  // namespace lunareg

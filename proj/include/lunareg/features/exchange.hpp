#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lunareg/matching/matching.hpp"

namespace lunareg {

struct ImageDims {
    int width = 0;
    int height = 0;
};

/// Reads a correspondence CSV (header `x1,y1,x2,y2,score`, optionally with a
/// trailing `inlier` 0/1 column). Keypoint sets are synthesized from the
/// listed coordinates; scores land in Match::distance. When image dimensions
/// are supplied, coordinates outside [0, dim) raise CoordinateOutOfBounds.
/// A header-only file yields an empty MatchSet. When the file carries an
/// inlier column and `inlier_mask` is non-null, the mask is written there.
MatchSet import_external_matches(const std::filesystem::path& path,
                                 std::optional<ImageDims> dims_a = std::nullopt,
                                 std::optional<ImageDims> dims_b = std::nullopt,
                                 std::vector<std::uint8_t>* inlier_mask = nullptr);

/// Writes a MatchSet in the exchange CSV format. Floats use the shortest
/// representation that parses back to the identical value, so
/// write_matches -> import_external_matches is an exact round trip. Passing
/// an inlier mask (one 0/1 entry per match) appends the `inlier` column.
void write_matches(const std::filesystem::path& path, const MatchSet& matches,
                   const std::vector<std::uint8_t>* inlier_mask = nullptr);

/// Dumps keypoints as JSON lines (one object per line with x, y, scale,
/// orientation, response; plus the descriptor row when a set is supplied).
void write_keypoints(const std::filesystem::path& path, const KeyPointSet& keypoints,
                     const DescriptorSet* descriptors = nullptr);

}  // namespace lunareg

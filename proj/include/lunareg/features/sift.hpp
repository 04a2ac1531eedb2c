#pragma once

#include "lunareg/features/types.hpp"
#include "lunareg/raster/georaster.hpp"

namespace lunareg {

struct SiftParams {
    int octaves = 4;
    int scales_per_octave = 3;
    double contrast_threshold = 0.03;  ///< on [0,1] intensity
    double edge_ratio = 10.0;
    int max_features = 5000;           ///< keep this many top responses
    double sigma = 1.6;                ///< base blur of each octave

    void validate() const;  ///< throws ConfigInvalid
};

struct DetectionResult {
    KeyPointSet keypoints;
    DescriptorSet descriptors;
};

/// Difference-of-Gaussians keypoints with 128-d gradient-orientation
/// descriptors (unit L2 norm, 0.2 clip + renormalize). Deterministic.
/// Requires min(width, height) >= 32; throws ImageTooSmall.
DetectionResult detect_sift(const GeoRaster& img, const SiftParams& params = {});
DetectionResult detect_sift(const ImageF& gray, const SiftParams& params = {});

/// Band 0 rescaled to [0,1] by the raster's depth range.
ImageF gray_unit(const GeoRaster& img);

}  // namespace lunareg

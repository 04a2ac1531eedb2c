#pragma once

#include "lunareg/features/phase_congruency.hpp"
#include "lunareg/features/sift.hpp"  // DetectionResult

namespace lunareg {

struct Rift2Params {
    PhaseCongruencyParams pc;
    int max_keypoints = 5000;
    int patch_radius = 48;     ///< descriptor support half-width, in pixels
    int descriptor_rings = 3;  ///< log-polar rings (each split into 6 sectors)

    void validate() const;  ///< throws ConfigInvalid
};

/// Radiation-variation insensitive features: keypoints are local maxima of
/// the phase congruency map; descriptors are log-polar histograms of the
/// maximum index map (dominant filter orientation per pixel). A cyclic shift
/// of both the sector origin and the histogram channels by the patch's
/// dominant orientation makes the descriptor rotation-invariant.
/// Descriptor dimension = descriptor_rings * 6 * n_orientations.
DetectionResult detect_rift2(const GeoRaster& img, const Rift2Params& params = {});
DetectionResult detect_rift2(const ImageF& gray, const Rift2Params& params = {});

}  // namespace lunareg

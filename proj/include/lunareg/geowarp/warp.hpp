#pragma once

#include <optional>

#include "lunareg/matching/homography.hpp"
#include "lunareg/raster/georaster.hpp"

namespace lunareg {

/// A source raster warped into the reference pixel frame. The canvas covers
/// the bounding box of the source corners under H; origin_offset places the
/// canvas top-left relative to the reference top-left (fractional pixels).
struct WarpResult {
    GeoRaster image;  ///< mask marks pixels with a source preimage
    double offset_x = 0.0;
    double offset_y = 0.0;
};

/// Inverse-mapping perspective warp of src by H (source -> reference frame).
WarpResult warp_perspective(const GeoRaster& src, const Homography& h, InterpKernel interp);

enum class CompositeMode { Overlay, Blend, Checker };

/// Places the reference at offset (0,0) and the warped result at its
/// origin_offset on one canvas. Overlapping pixels resolve per mode: overlay
/// lets valid warped pixels win, blend averages 50/50, checker alternates in
/// 64-px squares. A warped input with no valid pixels returns the reference.
GeoRaster composite(const WarpResult& warped, const GeoRaster& reference,
                    CompositeMode mode);

/// Attaches reference-frame geography to a warped raster: origin = reference
/// origin displaced by origin_offset pixels, everything else copied from
/// ref_meta. With restore_source_crs the padded canvas is then reprojected
/// into the source's own projection and gsd (source_meta required).
GeoRaster integrate_coordinates(const WarpResult& warped, const GeoMeta& ref_meta,
                                bool restore_source_crs = false,
                                const std::optional<GeoMeta>& source_meta = std::nullopt);

}  // namespace lunareg

#pragma once

#include "lunareg/raster/georaster.hpp"

namespace lunareg {

/// Reprojects a georeferenced raster into target_projection at target_gsd.
///
/// The output grid is north-up with pixel sizes (+gsd, -gsd) and covers the
/// bounding box of the source footprint in the target projection. Each output
/// pixel center is inverse-projected to lon/lat on the sphere, forward
/// projected into the source frame and interpolated there. Pixels with no
/// source preimage receive fill_value and a zero mask entry.
///
/// Throws MissingGeoMeta when src has no metadata.
GeoRaster reproject(const GeoRaster& src, Projection target_projection,
                    double target_gsd, InterpKernel kernel,
                    double fill_value = 0.0);

}  // namespace lunareg

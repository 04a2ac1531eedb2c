#pragma once

#include <string>

#include "lunareg/raster/georaster.hpp"

namespace lunareg {

/// Reads an 8/16-bit grayscale PNG or an uncompressed grayscale TIFF
/// (8/16-bit unsigned or 32-bit float). If `<path>.geo.json` exists next to
/// the image it is loaded as the raster's GeoMeta; otherwise the raster is
/// meta-less. Throws InputUnreadable on missing or malformed files.
GeoRaster read_raster(const std::string& path);

/// Writes band 0 of the raster. Format follows the extension: .png for
/// PNG (U8/U16 only), .tif/.tiff for uncompressed single-strip TIFF.
/// When the raster carries meta, `<path>.geo.json` is written alongside.
void write_raster(const std::string& path, const GeoRaster& raster);

GeoMeta read_geo_sidecar(const std::string& sidecar_path);
void write_geo_sidecar(const std::string& sidecar_path, const GeoMeta& meta);

/// Sidecar path for an image path: `<image>.geo.json`.
std::string sidecar_path_for(const std::string& image_path);

}  // namespace lunareg

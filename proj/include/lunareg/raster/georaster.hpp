#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lunareg/core/error.hpp"
#include "lunareg/core/image.hpp"

namespace lunareg {

enum class Projection { Equirectangular, PolarStereoNorth, PolarStereoSouth, Geographic };

std::string projection_name(Projection p);
Projection projection_from_name(const std::string& name);

/// IAU mean lunar radius, meters. The default datum; overridable per raster.
inline constexpr double kLunarRadiusM = 1'737'400.0;

/// Geographic metadata for a raster. The geotransform maps pixel (col, row)
/// to projected coordinates:
///   x = gt[0] + col * gt[1] + row * gt[2]
///   y = gt[3] + col * gt[4] + row * gt[5]
/// For Projection::Geographic the "projected" coordinates are lon/lat degrees.
struct GeoMeta {
    Projection projection = Projection::Equirectangular;
    double sphere_radius_m = kLunarRadiusM;
    std::array<double, 6> geotransform = {0.0, 1.0, 0.0, 0.0, 0.0, -1.0};
    double gsd_m = 1.0;
    /// Standard parallel for the equirectangular projection, degrees.
    /// Polar stereographic is always true-scale at the pole.
    double std_parallel_deg = 0.0;

    double origin_x() const { return geotransform[0]; }
    double origin_y() const { return geotransform[3]; }
    double pixel_size_x() const { return geotransform[1]; }
    double pixel_size_y() const { return geotransform[5]; }

    /// Checks the type invariants; throws ConfigInvalid on violation.
    void validate() const;
};

std::pair<double, double> pixel_to_world(const GeoMeta& meta, double col, double row);
std::pair<double, double> world_to_pixel(const GeoMeta& meta, double x, double y);

enum class SampleDepth { U8, U16, F32 };

int depth_bits(SampleDepth d);
double depth_max_value(SampleDepth d);

/// Georeferenced raster: one or more equally sized bands plus optional meta
/// and an optional validity mask (0 = fill pixel, nonzero = valid).
/// Samples are stored as float; U8/U16 rasters hold exact integer values.
struct GeoRaster {
    std::vector<ImageF> bands;
    SampleDepth depth = SampleDepth::U8;
    std::optional<GeoMeta> meta;
    std::optional<ImageU8> mask;
    double fill_value = 0.0;

    GeoRaster() = default;
    GeoRaster(int width, int height, SampleDepth depth_, int n_bands = 1)
        : bands(n_bands, ImageF(width, height)), depth(depth_) {}

    static GeoRaster from_u8(ImageU8 img);

    int width() const { return bands.empty() ? 0 : bands[0].width(); }
    int height() const { return bands.empty() ? 0 : bands[0].height(); }
    int band_count() const { return static_cast<int>(bands.size()); }

    ImageF& band(int i) { return bands.at(i); }
    const ImageF& band(int i) const { return bands.at(i); }

    bool is_valid_at(int x, int y) const { return !mask || mask->at(x, y) != 0; }
    bool is_u8() const { return depth == SampleDepth::U8; }

    /// First band rendered as 8-bit (values clamped; U8 rasters are exact).
    ImageU8 band_u8(int i = 0) const;

    /// Checks structural invariants (dimensions, depth range); throws on violation.
    void validate() const;
};

}  // namespace lunareg

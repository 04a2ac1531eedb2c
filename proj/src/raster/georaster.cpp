#include "lunareg/raster/georaster.hpp"

#include <cmath>

namespace lunareg {

std::string projection_name(Projection p) {
    switch (p) {
        case Projection::Equirectangular: return "equirectangular";
        case Projection::PolarStereoNorth: return "polar-stereographic-north";
        case Projection::PolarStereoSouth: return "polar-stereographic-south";
        case Projection::Geographic: return "geographic";
    }
    return "unknown";
}

Projection projection_from_name(const std::string& name) {
    if (name == "equirectangular")
        return Projection::Equirectangular;
    if (name == "polar-stereographic-north")
        return Projection::PolarStereoNorth;
    if (name == "polar-stereographic-south")
        return Projection::PolarStereoSouth;
    if (name == "geographic")
        return Projection::Geographic;
    throw UnsupportedProjectionPair("unknown projection name: " + name);
}

void GeoMeta::validate() const {
    if (geotransform[1] == 0.0)
        throw ConfigInvalid("geotransform", "pixel_size_x must be nonzero");
    if (geotransform[5] == 0.0)
        throw ConfigInvalid("geotransform", "pixel_size_y must be nonzero");
    if (sphere_radius_m <= 0.0)
        throw ConfigInvalid("sphere_radius_m", "must be positive");
    const double px = std::abs(geotransform[1]);
    if (std::abs(gsd_m - px) > 1e-6 * std::max(gsd_m, px))
        throw ConfigInvalid("gsd_m", "inconsistent with |pixel_size_x|");
}

std::pair<double, double> pixel_to_world(const GeoMeta& meta, double col, double row) {
    const auto& gt = meta.geotransform;
    return {gt[0] + col * gt[1] + row * gt[2], gt[3] + col * gt[4] + row * gt[5]};
}

std::pair<double, double> world_to_pixel(const GeoMeta& meta, double x, double y) {
    const auto& gt = meta.geotransform;
    const double det = gt[1] * gt[5] - gt[2] * gt[4];
    if (det == 0.0)
        throw SingularGeotransform();
    const double dx = x - gt[0];
    const double dy = y - gt[3];
    return {(gt[5] * dx - gt[2] * dy) / det, (-gt[4] * dx + gt[1] * dy) / det};
}

int depth_bits(SampleDepth d) {
    switch (d) {
        case SampleDepth::U8: return 8;
        case SampleDepth::U16: return 16;
        case SampleDepth::F32: return 32;
    }
    return 0;
}

double depth_max_value(SampleDepth d) {
    switch (d) {
        case SampleDepth::U8: return 255.0;
        case SampleDepth::U16: return 65535.0;
        case SampleDepth::F32: return std::numeric_limits<float>::max();
    }
    return 0.0;
}

GeoRaster GeoRaster::from_u8(ImageU8 img) {
    GeoRaster r(img.width(), img.height(), SampleDepth::U8);
    for (std::size_t i = 0; i < img.size(); ++i)
        r.bands[0].pixels()[i] = static_cast<float>(img.pixels()[i]);
    return r;
}

ImageU8 GeoRaster::band_u8(int i) const {
    const ImageF& b = band(i);
    ImageU8 out(b.width(), b.height());
    for (std::size_t k = 0; k < b.size(); ++k)
        out.pixels()[k] = quantize_u8(b.pixels()[k]);
    return out;
}

void GeoRaster::validate() const {
    if (bands.empty())
        throw ConfigInvalid("bands", "raster needs at least one band");
    if (width() < 1 || height() < 1)
        throw ConfigInvalid("bands", "raster dimensions must be at least 1x1");
    for (const ImageF& b : bands)
        if (b.width() != width() || b.height() != height())
            throw DimensionMismatch("bands have differing dimensions");
    if (mask && (mask->width() != width() || mask->height() != height()))
        throw DimensionMismatch("mask dimensions differ from raster");
    if (depth != SampleDepth::F32) {
        const double hi = depth_max_value(depth);
        for (const ImageF& b : bands)
            for (float v : b.pixels())
                if (v < 0.0f || v > hi)
                    throw ConfigInvalid("samples", "value outside storage depth range");
    }
    if (meta)
        meta->validate();
}

}  // namespace lunareg

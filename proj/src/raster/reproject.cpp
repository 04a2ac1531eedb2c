#include "lunareg/raster/reproject.hpp"

#include <cmath>
#include <limits>

#include "lunareg/raster/projection.hpp"

namespace lunareg {

namespace {

struct Bounds {
    double xmin = std::numeric_limits<double>::max();
    double xmax = std::numeric_limits<double>::lowest();
    double ymin = std::numeric_limits<double>::max();
    double ymax = std::numeric_limits<double>::lowest();

    void expand(double x, double y) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
};

}  // namespace

GeoRaster reproject(const GeoRaster& src, Projection target_projection,
                    double target_gsd, InterpKernel kernel, double fill_value) {
    if (!src.meta)
        throw MissingGeoMeta();
    if (target_gsd <= 0.0)
        throw ConfigInvalid("target_gsd", "must be positive");

    const GeoMeta& sm = *src.meta;
    const int w = src.width(), h = src.height();

    // Footprint of the source in the target projection: push every border
    // pixel corner through src -> lon/lat -> target. Edges can bulge under
    // curved projections, so corners alone are not enough.
    Bounds bb;
    auto push = [&](double col, double row) {
        const auto [sx, sy] = pixel_to_world(sm, col, row);
        const LonLat ll =
            project_inverse(sm.projection, sm.sphere_radius_m, sm.std_parallel_deg, sx, sy);
        const auto [tx, ty] =
            project_forward(target_projection, sm.sphere_radius_m, sm.std_parallel_deg, ll);
        bb.expand(tx, ty);
    };
    for (int c = 0; c <= w; ++c) {
        push(c, 0);
        push(c, h);
    }
    for (int r = 0; r <= h; ++r) {
        push(0, r);
        push(w, r);
    }

    const int out_w =
        std::max(1, static_cast<int>(round_half_up((bb.xmax - bb.xmin) / target_gsd)));
    const int out_h =
        std::max(1, static_cast<int>(round_half_up((bb.ymax - bb.ymin) / target_gsd)));

    GeoMeta out_meta;
    out_meta.projection = target_projection;
    out_meta.sphere_radius_m = sm.sphere_radius_m;
    out_meta.std_parallel_deg = sm.std_parallel_deg;
    out_meta.geotransform = {bb.xmin, target_gsd, 0.0, bb.ymax, 0.0, -target_gsd};
    out_meta.gsd_m = target_gsd;

    GeoRaster out(out_w, out_h, src.depth, src.band_count());
    out.meta = out_meta;
    out.mask = ImageU8(out_w, out_h, 0);
    out.fill_value = fill_value;

    const double hi = depth_max_value(src.depth);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const auto [tx, ty] = pixel_to_world(out_meta, x + 0.5, y + 0.5);
            const LonLat ll = project_inverse(target_projection, sm.sphere_radius_m,
                                              sm.std_parallel_deg, tx, ty);
            const auto [sx, sy] =
                project_forward(sm.projection, sm.sphere_radius_m, sm.std_parallel_deg, ll);
            const auto [col, row] = world_to_pixel(sm, sx, sy);
            // Pixel-center sample position in image coordinates.
            const double ix = col - 0.5, iy = row - 0.5;
            const bool inside = col >= 0.0 && col <= w && row >= 0.0 && row <= h;
            const int nx = std::clamp(static_cast<int>(round_half_up(ix)), 0, w - 1);
            const int ny = std::clamp(static_cast<int>(round_half_up(iy)), 0, h - 1);
            if (!inside || !src.is_valid_at(nx, ny)) {
                for (int b = 0; b < src.band_count(); ++b)
                    out.band(b).at(x, y) = static_cast<float>(fill_value);
                continue;
            }
            out.mask->at(x, y) = 1;
            for (int b = 0; b < src.band_count(); ++b) {
                double v = sample(src.band(b), ix, iy, kernel);
                if (src.depth != SampleDepth::F32)
                    v = std::clamp(round_half_up(v), 0.0, hi);
                out.band(b).at(x, y) = static_cast<float>(v);
            }
        }
    }
    return out;
}

}  // namespace lunareg

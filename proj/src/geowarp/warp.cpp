#include "lunareg/geowarp/warp.hpp"

#include <algorithm>
#include <cmath>

#include "lunareg/raster/reproject.hpp"

namespace lunareg {

WarpResult warp_perspective(const GeoRaster& src, const Homography& h, InterpKernel interp) {
    const Homography inv = h.inverse();  // throws NonInvertibleHomography
    const int w = src.width(), hgt = src.height();

    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    const Eigen::Vector2d corners[4] = {
        {0.0, 0.0}, {static_cast<double>(w), 0.0},
        {0.0, static_cast<double>(hgt)}, {static_cast<double>(w), static_cast<double>(hgt)}};
    for (const Eigen::Vector2d& c : corners) {
        const Eigen::Vector2d m = h.apply(c);
        xmin = std::min(xmin, m.x());
        xmax = std::max(xmax, m.x());
        ymin = std::min(ymin, m.y());
        ymax = std::max(ymax, m.y());
    }

    const int out_w = std::max(1, static_cast<int>(std::ceil(xmax - xmin - 1e-9)));
    const int out_h = std::max(1, static_cast<int>(std::ceil(ymax - ymin - 1e-9)));

    WarpResult result;
    result.offset_x = xmin;
    result.offset_y = ymin;
    result.image = GeoRaster(out_w, out_h, src.depth, src.band_count());
    result.image.mask = ImageU8(out_w, out_h, 0);
    result.image.fill_value = src.fill_value;

    const double hi = depth_max_value(src.depth);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            // Canvas pixel (x, y) sits at reference coordinate (xmin+x, ymin+y).
            Eigen::Vector2d s;
            try {
                s = inv.apply({xmin + x, ymin + y});
            } catch (const NonInvertibleHomography&) {
                continue;  // maps to the line at infinity
            }
            const bool inside = s.x() >= -0.5 && s.x() <= w - 0.5 && s.y() >= -0.5 &&
                                s.y() <= hgt - 0.5;
            if (!inside)
                continue;
            const int nx = std::clamp(static_cast<int>(round_half_up(s.x())), 0, w - 1);
            const int ny = std::clamp(static_cast<int>(round_half_up(s.y())), 0, hgt - 1);
            if (!src.is_valid_at(nx, ny))
                continue;
            result.image.mask->at(x, y) = 1;
            for (int b = 0; b < src.band_count(); ++b) {
                double v = sample(src.band(b), s.x(), s.y(), interp);
                if (src.depth != SampleDepth::F32)
                    v = std::clamp(round_half_up(v), 0.0, hi);
                result.image.band(b).at(x, y) = static_cast<float>(v);
            }
        }
    }
    return result;
}

GeoRaster composite(const WarpResult& warped, const GeoRaster& reference,
                    CompositeMode mode) {
    const GeoRaster& wr = warped.image;
    const bool any_warped =
        wr.mask ? std::any_of(wr.mask->pixels().begin(), wr.mask->pixels().end(),
                              [](std::uint8_t m) { return m != 0; })
                : wr.width() > 0;

    int x0 = 0, y0 = 0, x1 = reference.width(), y1 = reference.height();
    if (any_warped) {
        x0 = std::min(x0, static_cast<int>(std::floor(warped.offset_x)));
        y0 = std::min(y0, static_cast<int>(std::floor(warped.offset_y)));
        x1 = std::max(x1, static_cast<int>(std::ceil(warped.offset_x + wr.width())));
        y1 = std::max(y1, static_cast<int>(std::ceil(warped.offset_y + wr.height())));
    }

    GeoRaster out(x1 - x0, y1 - y0, reference.depth);
    out.mask = ImageU8(x1 - x0, y1 - y0, 0);
    const double hi = depth_max_value(reference.depth);

    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            // Reference-frame coordinates of this canvas pixel.
            double ref_v = 0.0, warp_v = 0.0;
            bool has_ref = false, has_warp = false;
            if (x >= 0 && x < reference.width() && y >= 0 && y < reference.height() &&
                reference.is_valid_at(x, y)) {
                has_ref = true;
                ref_v = reference.band(0).at(x, y);
            }
            if (any_warped) {
                const int wx = static_cast<int>(round_half_up(x - warped.offset_x));
                const int wy = static_cast<int>(round_half_up(y - warped.offset_y));
                if (wx >= 0 && wx < wr.width() && wy >= 0 && wy < wr.height() &&
                    wr.is_valid_at(wx, wy)) {
                    has_warp = true;
                    warp_v = wr.band(0).at(wx, wy);
                }
            }
            if (!has_ref && !has_warp)
                continue;

            double v = has_warp ? warp_v : ref_v;
            if (has_ref && has_warp) {
                switch (mode) {
                    case CompositeMode::Overlay:
                        v = warp_v;
                        break;
                    case CompositeMode::Blend:
                        v = 0.5 * (ref_v + warp_v);
                        break;
                    case CompositeMode::Checker: {
                        const bool ref_cell =
                            ((static_cast<int>(std::floor(x / 64.0)) +
                              static_cast<int>(std::floor(y / 64.0))) % 2 + 2) % 2 == 0;
                        v = ref_cell ? ref_v : warp_v;
                        break;
                    }
                }
            }
            if (reference.depth != SampleDepth::F32)
                v = std::clamp(round_half_up(v), 0.0, hi);
            out.band(0).at(x - x0, y - y0) = static_cast<float>(v);
            out.mask->at(x - x0, y - y0) = 1;
        }
    }
    return out;
}

GeoRaster integrate_coordinates(const WarpResult& warped, const GeoMeta& ref_meta,
                                bool restore_source_crs,
                                const std::optional<GeoMeta>& source_meta) {
    ref_meta.validate();

    GeoRaster out = warped.image;
    GeoMeta meta = ref_meta;
    const auto [ox, oy] = pixel_to_world(ref_meta, warped.offset_x, warped.offset_y);
    meta.geotransform[0] = ox;
    meta.geotransform[3] = oy;
    out.meta = meta;

    if (restore_source_crs) {
        if (!source_meta)
            throw MissingGeoMeta();
        return reproject(out, source_meta->projection, source_meta->gsd_m,
                         InterpKernel::Bilinear, out.fill_value);
    }
    return out;
}

}  // namespace lunareg

#pragma once

// Shared fixtures for the test binaries.

#include <filesystem>
#include <functional>
#include <string>

#include "lunareg/core/rng.hpp"
#include "lunareg/raster/georaster.hpp"

namespace lunareg::testsupport {

/// Unique scratch directory for a test binary; created on first use.
inline std::filesystem::path scratch_dir(const std::string& suite) {
    const auto dir = std::filesystem::temp_directory_path() / ("lunareg_" + suite);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string scratch_file(const std::string& suite, const std::string& name) {
    return (scratch_dir(suite) / name).string();
}

/// 8-bit raster with per-pixel values from f(x, y) (clamped to [0,255]).
inline GeoRaster make_u8(int w, int h, const std::function<int(int, int)>& f) {
    GeoRaster r(w, h, SampleDepth::U8);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            r.band(0).at(x, y) = static_cast<float>(std::clamp(f(x, y), 0, 255));
    return r;
}

inline GeoRaster constant_u8(int w, int h, int value) {
    return make_u8(w, h, [&](int, int) { return value; });
}

/// Random 8-bit raster, deterministic in seed.
inline GeoRaster random_u8(int w, int h, std::uint64_t seed) {
    CounterRng rng(seed);
    return make_u8(w, h, [&](int, int) { return static_cast<int>(rng.next_below(256)); });
}

/// North-up metadata: origin (x0, y0), square pixels of size gsd.
inline GeoMeta north_up_meta(Projection proj, double x0, double y0, double gsd,
                             double std_parallel_deg = 0.0) {
    GeoMeta m;
    m.projection = proj;
    m.geotransform = {x0, gsd, 0.0, y0, 0.0, -gsd};
    m.gsd_m = gsd;
    m.std_parallel_deg = std_parallel_deg;
    return m;
}

}  // namespace lunareg::testsupport

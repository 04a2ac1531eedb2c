#include "lunareg/eval/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "lunareg/core/rng.hpp"

namespace lunareg {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Crater {
    double cx, cy, radius, amplitude;
};

/// Continuous shaded scene: smooth textured background plus crater shading.
/// Evaluated analytically so the source image can sample exact sub-pixel
/// positions without interpolation error.
class Scene {
public:
    Scene(std::vector<Crater> craters, double azimuth_deg, double elevation_deg)
        : craters_(std::move(craters)),
          light_x_(std::cos(azimuth_deg * kPi / 180.0)),
          light_y_(std::sin(azimuth_deg * kPi / 180.0)),
          strength_(0.4 + 0.6 * std::cos(elevation_deg * kPi / 180.0)) {}

    double operator()(double x, double y) const {
        double v = 105.0 + 25.0 * std::sin(x * 0.013) * std::sin(y * 0.011) +
                   12.0 * std::sin(x * 0.031 + 1.7) + 9.0 * std::cos(y * 0.027 - 0.4);
        for (const Crater& c : craters_) {
            const double ux = (x - c.cx) / c.radius;
            const double uy = (y - c.cy) / c.radius;
            const double d = std::hypot(ux, uy);
            if (d > 1.35)
                continue;
            const double toward_light =
                d > 1e-9 ? (ux * light_x_ + uy * light_y_) / d : 0.0;
            const double rim = std::exp(-std::pow((d - 1.02) / 0.09, 2.0));
            const double bowl = d < 1.0 ? 1.0 - d * d : 0.0;
            const double lit_rim = 0.35 + 0.65 * std::max(0.0, toward_light);
            const double lit_floor = 0.75 - 0.35 * std::max(0.0, -toward_light);
            v += strength_ * c.amplitude * (rim * lit_rim - bowl * lit_floor);
        }
        return v;
    }

private:
    std::vector<Crater> craters_;
    double light_x_, light_y_, strength_;
};

double apply_radiometry(double v, RadiometricMode mode, double gamma) {
    v = std::clamp(v, 0.0, 255.0);
    switch (mode) {
        case RadiometricMode::None:
            return v;
        case RadiometricMode::Gamma:
            return 255.0 * std::pow(v / 255.0, gamma);
        case RadiometricMode::Invert:
            return 255.0 - v;
        case RadiometricMode::GammaInvert:
            return 255.0 - 255.0 * std::pow(v / 255.0, gamma);
    }
    return v;
}

}  // namespace

void SceneParams::validate() const {
    if (size < 64)
        throw ConfigInvalid("size", "synthetic scenes need at least 64 px");
    if (crater_count < 1)
        throw ConfigInvalid("crater_count", "must be >= 1");
    if (min_radius <= 0.0 || max_radius < min_radius)
        throw ConfigInvalid("radius", "need 0 < min_radius <= max_radius");
    if (2.0 * (max_radius + 4.0) > size)
        throw ConfigInvalid("radius", "largest crater does not fit the canvas");
    if (gamma <= 0.0)
        throw ConfigInvalid("gamma", "must be positive");
    if (noise_sigma < 0.0)
        throw ConfigInvalid("noise_sigma", "must be non-negative");
    if (!h_true.is_invertible())
        throw ConfigInvalid("h_true", "must be invertible");
}

Homography similarity_about_center(double size, double rotation_deg, double scale,
                                   double tx, double ty) {
    const double a = rotation_deg * kPi / 180.0;
    const double c = scale * std::cos(a), s = scale * std::sin(a);
    const double half = size / 2.0;
    Eigen::Matrix3d m;
    // Rotate/scale about the canvas center, then translate.
    m << c, -s, half - c * half + s * half + tx,
         s, c, half - s * half - c * half + ty,
         0.0, 0.0, 1.0;
    return Homography::from_matrix(m);
}

ControlPointSet SyntheticPair::truth_control_points(const Homography& h_registered) const {
    ControlPointSet points;
    for (std::size_t i = 0; i < ref_points.size(); ++i)
        points.add(ref_points[i], h_registered.apply(src_points[i]));
    return points;
}

SyntheticPair generate_synthetic_pair(std::uint64_t seed, const SceneParams& params) {
    params.validate();
    const int n = params.size;

    // Crater layout: rejection-spread centers, deterministic in the seed.
    CounterRng layout(seed, 0);
    std::vector<Crater> craters;
    const double margin = params.max_radius + 2.0;
    while (static_cast<int>(craters.size()) < params.crater_count) {
        Crater c;
        c.radius = layout.next_uniform(params.min_radius, params.max_radius);
        c.amplitude = layout.next_uniform(35.0, 80.0);
        bool placed = false;
        for (int attempt = 0; attempt < 30 && !placed; ++attempt) {
            c.cx = layout.next_uniform(margin, n - margin);
            c.cy = layout.next_uniform(margin, n - margin);
            placed = true;
            for (const Crater& other : craters)
                if (std::hypot(c.cx - other.cx, c.cy - other.cy) <
                    0.8 * (c.radius + other.radius))
                    placed = false;
        }
        if (!placed) {  // dense field: accept the last attempt anyway
            c.cx = layout.next_uniform(margin, n - margin);
            c.cy = layout.next_uniform(margin, n - margin);
        }
        craters.push_back(c);
    }

    const Scene scene(craters, params.illumination_azimuth_deg,
                      params.illumination_elevation_deg);

    SyntheticPair pair;
    pair.h_true = params.h_true;

    pair.reference = GeoRaster(n, n, SampleDepth::U8);
    GeoMeta meta;
    meta.projection = Projection::Equirectangular;
    meta.geotransform = {1.0e6, 50.0, 0.0, 5.0e5, 0.0, -50.0};
    meta.gsd_m = 50.0;
    pair.reference.meta = meta;

    CounterRng ref_noise(seed, 1);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            double v = scene(x, y);
            if (params.noise_sigma > 0.0)
                v += params.noise_sigma * ref_noise.next_gaussian();
            pair.reference.band(0).at(x, y) = quantize_u8(v);
        }

    // Source pixel (x, y) shows the scene at h_true(x, y) in reference frame.
    pair.source = GeoRaster(n, n, SampleDepth::U8);
    CounterRng src_noise(seed, 2);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const Eigen::Vector2d q =
                params.h_true.apply({static_cast<double>(x), static_cast<double>(y)});
            double v = scene(q.x(), q.y());
            if (params.noise_sigma > 0.0)
                v += params.noise_sigma * src_noise.next_gaussian();
            pair.source.band(0).at(x, y) =
                quantize_u8(apply_radiometry(v, params.radiometric_mode, params.gamma));
        }

    const Homography h_inv = params.h_true.inverse();
    for (const Crater& c : craters) {
        pair.ref_points.emplace_back(c.cx, c.cy);
        pair.src_points.push_back(h_inv.apply({c.cx, c.cy}));
    }
    return pair;
}

}  // namespace lunareg

#pragma once

#include <cstdint>
#include <vector>

#include "lunareg/eval/rmse.hpp"
#include "lunareg/matching/homography.hpp"
#include "lunareg/raster/georaster.hpp"

namespace lunareg {

enum class RadiometricMode { None, Gamma, Invert, GammaInvert };

/// Parameters of a synthetic crater-field registration pair.
struct SceneParams {
    int size = 512;                      ///< square canvas, pixels
    int crater_count = 40;
    double min_radius = 6.0;             ///< pixels
    double max_radius = 40.0;
    double illumination_azimuth_deg = 135.0;
    double illumination_elevation_deg = 30.0;
    double noise_sigma = 2.0;            ///< gray levels
    RadiometricMode radiometric_mode = RadiometricMode::None;
    double gamma = 1.0;
    Homography h_true;                   ///< maps source pixels to reference pixels

    void validate() const;  ///< throws ConfigInvalid
};

/// A generated pair with ground truth.
struct SyntheticPair {
    GeoRaster reference;  ///< carries GeoMeta
    GeoRaster source;
    Homography h_true;
    std::vector<Eigen::Vector2d> ref_points;  ///< crater centers, reference frame
    std::vector<Eigen::Vector2d> src_points;  ///< the same centers in the source frame

    /// Truth control points for a recovered transform: each crater center
    /// paired with its source-frame position pushed through h_registered.
    ControlPointSet truth_control_points(const Homography& h_registered) const;
};

/// Renders a deterministic shaded crater field and its warped counterpart.
/// Both images sample one analytic scene, so corresponding sub-pixel
/// positions carry identical shading before noise and radiometry.
SyntheticPair generate_synthetic_pair(std::uint64_t seed, const SceneParams& params);

/// Convenience: rotation (degrees, about the image center) + uniform scale +
/// translation as a source->reference homography.
Homography similarity_about_center(double size, double rotation_deg, double scale,
                                   double tx, double ty);

}  // namespace lunareg

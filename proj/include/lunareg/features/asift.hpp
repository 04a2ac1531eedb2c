#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "lunareg/features/sift.hpp"
#include "lunareg/matching/matching.hpp"

namespace lunareg {

/// One simulated camera view: the image as seen under tilt `t` applied after
/// an in-plane rotation. `view_to_original` maps view pixel coordinates back
/// to the original image (always invertible; its determinant equals `tilt`).
struct AffineView {
    double tilt = 1.0;
    double rotation = 0.0;  ///< radians
    Eigen::Matrix<double, 2, 3> view_to_original =
        Eigen::Matrix<double, 2, 3>::Identity();

    Eigen::Vector2d to_original(const Eigen::Vector2d& p) const {
        return view_to_original * Eigen::Vector3d(p.x(), p.y(), 1.0);
    }
};

struct AsiftParams {
    int tilt_levels = 2;  ///< tilts sqrt(2)^k for k = 0..tilt_levels-1, max 6
    SiftParams sift;
    double ratio = 0.75;

    void validate() const;  ///< throws ConfigInvalid
};

/// Simulates the affine view set: tilt t = sqrt(2)^k for k = 0..tilt_levels-1;
/// for each t > 1, in-plane rotations sampled at a step of 72/t degrees over
/// [0, 360). Each view rotates the image, applies an anti-alias blur of
/// sigma = 0.8 * sqrt(t^2 - 1) along x, then subsamples x by 1/t.
/// tilt_levels = 1 yields exactly the identity view.
std::vector<std::pair<ImageF, AffineView>> simulate_affine_views(const ImageF& img,
                                                                 int tilt_levels);

/// SIFT detections across all simulated views of one image (views too small
/// for SIFT stay empty). Keeps only geometry, not the view images.
struct AsiftDetection {
    std::vector<AffineView> views;
    std::vector<DetectionResult> detections;  ///< parallel to `views`
    int width = 0;                            ///< original image size
    int height = 0;

    int total_keypoints() const {
        int n = 0;
        for (const DetectionResult& d : detections)
            n += static_cast<int>(d.keypoints.size());
        return n;
    }
};

AsiftDetection asift_detect(const GeoRaster& img, const AsiftParams& params = {});
AsiftDetection asift_detect(const ImageF& img, const AsiftParams& params = {});

/// Matches every pair of views (ratio test + cross-check per pair), maps
/// correspondences back to the original frames, and deduplicates matches
/// that agree within 1 px on both sides, keeping the lowest descriptor
/// distance. With a single view on both sides the result is exactly the
/// plain SIFT matching of the two images.
MatchSet asift_match_views(const AsiftDetection& a, const AsiftDetection& b,
                           const AsiftParams& params = {});

/// asift_detect on both images followed by asift_match_views.
MatchSet asift_match(const GeoRaster& a, const GeoRaster& b,
                     const AsiftParams& params = {});
MatchSet asift_match(const ImageF& a, const ImageF& b, const AsiftParams& params = {});

}  // namespace lunareg

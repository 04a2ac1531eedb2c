#pragma once

#include <vector>

#include "lunareg/features/sift.hpp"  // DetectionResult, gray_unit
#include "lunareg/features/types.hpp"
#include "lunareg/raster/georaster.hpp"

namespace lunareg {

struct AkazeParams {
    int octaves = 4;
    int sublevels = 4;
    double detector_threshold = 3e-4;   ///< on the scale-normalized Hessian det
    double contrast_percentile = 0.7;   ///< gradient quantile defining k
    int max_features = 5000;
    double sigma0 = 1.6;                ///< blur of the first evolution level

    void validate() const;  ///< throws ConfigInvalid
};

/// Keypoints from the determinant of the Hessian over a Perona-Malik
/// nonlinear scale space (FED time stepping, g2 conductivity), described
/// with 486-bit M-LDB binary strings. Deterministic.
/// Requires min(width, height) >= 32; throws ImageTooSmall.
DetectionResult detect_akaze(const GeoRaster& img, const AkazeParams& params = {});
DetectionResult detect_akaze(const ImageF& gray, const AkazeParams& params = {});

// --- building blocks, separable for direct verification ---

/// FED cycle step sizes: n = smallest step count whose cycle reaches
/// total_time at stability limit tau_max, rescaled to sum to total_time.
std::vector<double> fed_tau_sequence(double total_time, double tau_max = 0.25);

/// Contrast factor k: the given quantile of nonzero Scharr gradient
/// magnitudes of the sigma=1 smoothed image.
double contrast_factor(const ImageF& gray, double percentile);

/// Perona-Malik g2 conductivity 1 / (1 + |grad|^2 / k^2) from Scharr
/// derivatives of L.
ImageF pm_g2_conductivity(const ImageF& l, double k);

/// One explicit diffusion step dL = tau * div(g grad L) in flux form with
/// zero-flux (Neumann) borders: the image sum is conserved exactly.
void pm_diffusion_step(ImageF& l, const ImageF& g, double tau);

}  // namespace lunareg

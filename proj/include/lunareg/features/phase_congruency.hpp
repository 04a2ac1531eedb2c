#pragma once

#include <vector>

#include "lunareg/core/image.hpp"
#include "lunareg/raster/georaster.hpp"

namespace lunareg {

struct PhaseCongruencyParams {
    int n_scales = 4;
    int n_orientations = 6;
    double min_wavelength = 3.0;
    double mult = 2.1;        ///< wavelength multiplier between scales
    double sigma_onf = 0.55;  ///< log-Gabor bandwidth (sigma / center freq)
    double noise_k = 2.0;     ///< noise threshold in noise-sigma units

    void validate() const;  ///< throws ConfigInvalid
};

struct PhaseCongruencyResult {
    ImageF pc_map;    ///< phase congruency per pixel, in [0, 1]
    ImageU8 mim;      ///< 1-based index of the dominant orientation
    std::vector<ImageF> orientation_energy;  ///< noise-compensated, weighted
};

/// Frequency-domain log-Gabor filter bank phase congruency (local-energy
/// model with noise compensation and frequency-spread weighting). The
/// maximum index map picks, per pixel, the orientation with the largest
/// summed filter amplitude; ties resolve to the lowest index.
/// Requires min(width, height) >= 16; throws ImageTooSmall.
PhaseCongruencyResult phase_congruency(const GeoRaster& img,
                                       const PhaseCongruencyParams& params = {});
PhaseCongruencyResult phase_congruency(const ImageF& gray,
                                       const PhaseCongruencyParams& params = {});

}  // namespace lunareg

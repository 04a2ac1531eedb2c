#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lunareg/raster/georaster.hpp"

namespace lunareg {

GeoRaster resample(const GeoRaster& src, double target_gsd, InterpKernel kernel,
                   std::optional<double> source_gsd_override = std::nullopt);

/// Per-band linear min-max stretch to [0, 255]; a constant band maps to 0.
GeoRaster normalize_u8(const GeoRaster& src);

/// Contrast-limited adaptive histogram equalization on an 8-bit raster.
/// clip_limit is a multiple of the uniform bin height tile_pixels/256.
GeoRaster clahe(const GeoRaster& src, int tiles_x, int tiles_y, double clip_limit);

/// 255 - v per pixel; input must be 8-bit.
GeoRaster invert(const GeoRaster& src);

enum class StructuringElement { Square, Disk };

/// Grayscale dilation with edge-replicated borders.
GeoRaster dilate(const GeoRaster& src, int radius, StructuringElement shape);

struct PcaResult {
    std::vector<GeoRaster> components;          ///< top-`keep`, each 8-bit normalized
    std::vector<double> explained_variance;     ///< all input bands, sums to 1
};

/// Principal components of a stack of aligned single-band rasters.
/// Eigenvector signs are fixed so each vector's largest-magnitude entry is
/// positive; components are ordered by descending eigenvalue.
PcaResult pca_stack(const std::vector<GeoRaster>& inputs, int keep);

/// CDF-inversion histogram matching: out(v) = min{u : CDF_ref(u) >= CDF_src(v)}.
GeoRaster histogram_match(const GeoRaster& src, const GeoRaster& reference);

/// Gain-boosts pixels darker than (shadow_percentile/100)*255 toward the
/// global median, gain capped at target_gain_cap, feathered over a
/// 2-gray-level band above the threshold.
GeoRaster shadow_normalize(const GeoRaster& src, double shadow_percentile,
                           double target_gain_cap);

/// out = round(c * ln(1 + v)) with c = 255/ln(256).
GeoRaster log_transform(const GeoRaster& src);

enum class BandSelectStrategy { MaxEntropy, MaxStddev, Index };

/// Index of the band maximizing the strategy statistic; ties break low.
int select_reference_band(const GeoRaster& stack, BandSelectStrategy strategy,
                          int fixed_index = 0);

// ---------------------------------------------------------------- plans

struct ResampleStep {
    double gsd = 0.0;
    InterpKernel kernel = InterpKernel::Bilinear;
};
struct NormalizeU8Step {};
struct ClaheStep {
    int tiles_x = 8;
    int tiles_y = 8;
    double clip_limit = 2.0;
};
struct InvertStep {};
struct DilateStep {
    int radius = 1;
    StructuringElement shape = StructuringElement::Square;
};
struct PcaStackStep {
    std::vector<std::string> inputs;  ///< paths of extra aligned bands
    int keep_components = 1;
};
struct HistogramMatchStep {
    std::string reference_id;  ///< path of the reference raster
};
struct ShadowNormalizeStep {
    double shadow_percentile = 25.0;
    double target_gain_cap = 4.0;
};
struct LogTransformStep {};
struct SelectBandStep {
    BandSelectStrategy strategy = BandSelectStrategy::MaxEntropy;
    int index = 0;
};

using PreprocessStep =
    std::variant<ResampleStep, NormalizeU8Step, ClaheStep, InvertStep, DilateStep,
                 PcaStackStep, HistogramMatchStep, ShadowNormalizeStep,
                 LogTransformStep, SelectBandStep>;

/// Ordered list of preprocessing steps; serialized as a JSON step array.
struct PreprocessPlan {
    std::vector<PreprocessStep> steps;

    void validate() const;

    static PreprocessPlan from_json_string(const std::string& text);
    static PreprocessPlan from_file(const std::string& path);
    std::string to_json_string() const;
};

/// Runs every step of the plan in order. Steps referencing auxiliary rasters
/// (histogram reference, PCA co-bands) load them via their recorded paths.
GeoRaster apply_plan(const GeoRaster& input, const PreprocessPlan& plan);

}  // namespace lunareg

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lunareg/eval/report.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/akaze.hpp"
#include "lunareg/features/asift.hpp"
#include "lunareg/features/rift2.hpp"
#include "lunareg/features/sift.hpp"
#include "lunareg/geowarp/warp.hpp"
#include "lunareg/matching/ransac.hpp"
#include "lunareg/preprocess/preprocess.hpp"

namespace lunareg {

enum class Algorithm { Sift, Asift, Akaze, Rift2, External };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);  ///< throws ConfigInvalid

/// Everything run_registration needs beyond the image pair itself.
struct PipelineConfig {
    Algorithm algorithm = Algorithm::Sift;
    PreprocessPlan preprocess_source;     ///< empty plan = pass-through
    PreprocessPlan preprocess_reference;
    SiftParams sift;
    AkazeParams akaze;
    Rift2Params rift2;
    AsiftParams asift;
    std::optional<double> ratio;  ///< default: 0.75 float kinds, 0.8 binary
    bool cross_check = true;
    RansacParams ransac;
    std::string external_matches;  ///< correspondence CSV, Algorithm::External
    InterpKernel warp_interp = InterpKernel::Bilinear;
    std::uint64_t seed = 0;  ///< drives the held-out evaluation split

    void validate() const;  ///< throws ConfigInvalid
};

/// An image pair to register. When truth points are present (synthetic
/// scenes) RMSE is evaluated on them; otherwise on a seeded 50% held-out
/// split of the RANSAC inliers, scored against a transform refit on the
/// other half.
struct RegistrationJob {
    GeoRaster source;
    GeoRaster reference;
    std::string dataset = "pair";
    std::vector<Eigen::Vector2d> truth_ref;  ///< reference-frame truth points
    std::vector<Eigen::Vector2d> truth_src;  ///< the same points, source frame
};

RegistrationJob job_from_synthetic(SyntheticPair&& pair, std::string dataset);

struct RegistrationOutcome {
    RegistrationReport report;
    std::optional<Homography> h;  ///< estimated source -> reference
    MatchSet matches;
    std::vector<std::uint8_t> inlier_mask;
    std::optional<WarpResult> warped;  ///< carries integrated meta when available
    std::optional<GeoRaster> composite_image;
};

/// preprocess -> detect -> match -> estimate -> warp, with wall-clock stage
/// times at millisecond resolution. Algorithmic stage failures (too few
/// matches, no RANSAC model, detector preconditions) yield status=failed
/// with NA metrics instead of throwing; configuration errors and an
/// unreadable external-match file still throw.
RegistrationOutcome run_registration(const RegistrationJob& job,
                                     const PipelineConfig& config);

// ------------------------------------------------------------- benchmark

/// A named synthetic dataset: scene parameters plus the generation seed.
struct BenchmarkDataset {
    std::string name;
    std::uint64_t seed = 0;
    SceneParams scene;
};

struct BenchmarkCell {
    std::string dataset;
    Algorithm algorithm = Algorithm::Sift;
};

struct BenchmarkConfig {
    std::vector<BenchmarkDataset> datasets;
    std::vector<BenchmarkCell> cells;
    PipelineConfig base;          ///< per-cell config with `algorithm` overridden
    bool write_overlays = true;   ///< match-overlay PNG per cell

    void validate() const;  ///< throws ConfigInvalid
};

/// Runs every cell (failures never abort siblings), writes report.csv,
/// report.json, and summary.csv into out_dir, plus a match overlay per cell
/// that produced matches. Returns the per-cell reports in cell order.
std::vector<RegistrationReport> run_benchmark(const BenchmarkConfig& config,
                                              const std::filesystem::path& out_dir);

/// Side-by-side visualization with lines between matched keypoints:
/// inliers white, outliers gray (all matches gray when no mask is given).
GeoRaster render_match_overlay(const GeoRaster& a, const GeoRaster& b,
                               const MatchSet& matches,
                               const std::vector<std::uint8_t>* inlier_mask = nullptr);

}  // namespace lunareg

#include "lunareg/eval/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <utility>

#include "lunareg/core/rng.hpp"
#include "lunareg/features/exchange.hpp"
#include "lunareg/matching/matching.hpp"
#include "lunareg/raster/io.hpp"

namespace lunareg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Reported timing resolution is one millisecond.
double round_ms(double seconds) {
    return std::round(seconds * 1000.0) / 1000.0;
}

/// Runs `stage` and stores its wall-clock duration in `slot`. Algorithmic
/// errors become a failed report; config/input errors propagate.
template <typename F>
bool run_stage(double& slot, RegistrationReport& report, F&& stage) {
    const auto start = Clock::now();
    bool ok = true;
    try {
        stage();
    } catch (const ConfigInvalid&) {
        throw;
    } catch (const InputUnreadable&) {
        throw;
    } catch (const Error& e) {
        report.error = e.what();
        ok = false;
    }
    slot = round_ms(seconds_since(start));
    return ok;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Sift: return "sift";
        case Algorithm::Asift: return "asift";
        case Algorithm::Akaze: return "akaze";
        case Algorithm::Rift2: return "rift2";
        case Algorithm::External: return "external";
    }
    return "sift";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "sift") return Algorithm::Sift;
    if (name == "asift") return Algorithm::Asift;
    if (name == "akaze") return Algorithm::Akaze;
    if (name == "rift2") return Algorithm::Rift2;
    if (name == "external") return Algorithm::External;
    throw ConfigInvalid("algorithm",
                        "unknown algorithm '" + name +
                            "' (expected sift|asift|akaze|rift2|external)");
}

void PipelineConfig::validate() const {
    preprocess_source.validate();
    preprocess_reference.validate();
    if (ratio && (*ratio <= 0.0 || *ratio >= 1.0))
        throw ConfigInvalid("ratio", "must be in (0, 1)");
    if (ransac.threshold_px <= 0.0)
        throw ConfigInvalid("ransac_threshold", "must be positive");
    if (ransac.max_iters < 1)
        throw ConfigInvalid("ransac_max_iters", "must be >= 1");
    if (ransac.confidence <= 0.0 || ransac.confidence >= 1.0)
        throw ConfigInvalid("ransac_confidence", "must be in (0, 1)");
    switch (algorithm) {
        case Algorithm::Sift: sift.validate(); break;
        case Algorithm::Asift: asift.validate(); break;
        case Algorithm::Akaze: akaze.validate(); break;
        case Algorithm::Rift2: rift2.validate(); break;
        case Algorithm::External:
            if (external_matches.empty())
                throw ConfigInvalid("external_matches",
                                    "required for the external algorithm");
            break;
    }
}

RegistrationJob job_from_synthetic(SyntheticPair&& pair, std::string dataset) {
    RegistrationJob job;
    job.source = std::move(pair.source);
    job.reference = std::move(pair.reference);
    job.dataset = std::move(dataset);
    job.truth_ref = std::move(pair.ref_points);
    job.truth_src = std::move(pair.src_points);
    return job;
}

RegistrationOutcome run_registration(const RegistrationJob& job,
                                     const PipelineConfig& config) {
    config.validate();

    RegistrationOutcome out;
    RegistrationReport& rep = out.report;
    rep.algorithm = algorithm_name(config.algorithm);
    rep.dataset = job.dataset;

    const auto run_start = Clock::now();
    StageTimes& st = rep.stage_times;

    GeoRaster src, ref;
    bool alive = run_stage(st.preprocess, rep, [&] {
        src = apply_plan(job.source, config.preprocess_source);
        ref = apply_plan(job.reference, config.preprocess_reference);
    });

    DetectionResult det_a, det_b;
    AsiftDetection asift_a, asift_b;
    if (alive)
        alive = run_stage(st.detect, rep, [&] {
            switch (config.algorithm) {
                case Algorithm::Sift:
                    det_a = detect_sift(src, config.sift);
                    det_b = detect_sift(ref, config.sift);
                    break;
                case Algorithm::Akaze:
                    det_a = detect_akaze(src, config.akaze);
                    det_b = detect_akaze(ref, config.akaze);
                    break;
                case Algorithm::Rift2:
                    det_a = detect_rift2(src, config.rift2);
                    det_b = detect_rift2(ref, config.rift2);
                    break;
                case Algorithm::Asift:
                    asift_a = asift_detect(src, config.asift);
                    asift_b = asift_detect(ref, config.asift);
                    break;
                case Algorithm::External:
                    break;  // keypoints arrive with the match file
            }
            if (config.algorithm == Algorithm::Asift) {
                rep.n_kp_a = asift_a.total_keypoints();
                rep.n_kp_b = asift_b.total_keypoints();
            } else {
                rep.n_kp_a = static_cast<int>(det_a.keypoints.size());
                rep.n_kp_b = static_cast<int>(det_b.keypoints.size());
            }
        });

    if (alive)
        alive = run_stage(st.match, rep, [&] {
            switch (config.algorithm) {
                case Algorithm::Asift:
                    out.matches = asift_match_views(asift_a, asift_b, config.asift);
                    break;
                case Algorithm::External: {
                    out.matches = import_external_matches(
                        config.external_matches,
                        ImageDims{src.width(), src.height()},
                        ImageDims{ref.width(), ref.height()});
                    rep.n_kp_a = static_cast<int>(out.matches.keypoints_a.size());
                    rep.n_kp_b = static_cast<int>(out.matches.keypoints_b.size());
                    break;
                }
                default: {
                    const bool binary = det_a.descriptors.is_binary();
                    const double ratio = config.ratio.value_or(binary ? 0.8 : 0.75);
                    out.matches =
                        match_descriptors(det_a.keypoints, det_a.descriptors,
                                          det_b.keypoints, det_b.descriptors, ratio,
                                          config.cross_check);
                }
            }
            rep.n_matches = out.matches.size();
        });

    if (alive)
        alive = run_stage(st.estimate, rep, [&] {
            const RansacResult result = ransac_homography(out.matches, config.ransac);
            out.h = result.h;
            out.inlier_mask = result.inlier_mask;
            rep.n_inliers = result.inlier_count();
        });

    if (alive)
        alive = run_stage(st.warp, rep, [&] {
            out.warped = warp_perspective(src, *out.h, config.warp_interp);
            out.composite_image = composite(*out.warped, ref, CompositeMode::Overlay);
            const std::optional<GeoMeta>& ref_meta =
                ref.meta ? ref.meta : job.reference.meta;
            if (ref_meta)
                out.warped->image = integrate_coordinates(*out.warped, *ref_meta);
        });

    if (alive) {
        ControlPointSet control;
        if (!job.truth_ref.empty()) {
            for (std::size_t i = 0; i < job.truth_ref.size(); ++i)
                control.add(job.truth_ref[i], out.h->apply(job.truth_src[i]));
        } else {
            // Held-out evaluation: refit on half the inliers, score the rest.
            std::vector<int> inliers;
            for (std::size_t i = 0; i < out.inlier_mask.size(); ++i)
                if (out.inlier_mask[i])
                    inliers.push_back(static_cast<int>(i));
            CounterRng rng(config.seed, 1);
            for (std::size_t i = inliers.size(); i > 1; --i)
                std::swap(inliers[i - 1], inliers[rng.next_below(i)]);

            const std::size_t half = (inliers.size() + 1) / 2;
            Homography h_fit = *out.h;
            if (half >= 4 && inliers.size() > half) {
                std::vector<Eigen::Vector2d> fit_a, fit_b;
                for (std::size_t i = 0; i < half; ++i) {
                    fit_a.push_back(out.matches.point_a(inliers[i]));
                    fit_b.push_back(out.matches.point_b(inliers[i]));
                }
                try {
                    h_fit = dlt_homography(fit_a, fit_b);
                } catch (const Error&) {
                    h_fit = *out.h;  // degenerate half: score with the full fit
                }
            }
            const std::size_t eval_begin = inliers.size() > half ? half : 0;
            for (std::size_t i = eval_begin; i < inliers.size(); ++i)
                control.add(out.matches.point_b(inliers[i]),
                            h_fit.apply(out.matches.point_a(inliers[i])));
        }
        if (control.size() > 0) {
            const auto [rx, ry] = rmse_xy(control);
            rep.rmse_x = rx;
            rep.rmse_y = ry;
        } else {
            rep.error = "no control points for evaluation";
        }
    }

    rep.total_time = round_ms(seconds_since(run_start));
    return out;
}

void BenchmarkConfig::validate() const {
    base.validate();
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        if (datasets[i].name.empty())
            throw ConfigInvalid("datasets", "dataset name must not be empty");
        datasets[i].scene.validate();
        for (std::size_t j = i + 1; j < datasets.size(); ++j)
            if (datasets[i].name == datasets[j].name)
                throw ConfigInvalid("datasets",
                                    "duplicate dataset name '" + datasets[i].name + "'");
    }
    for (const BenchmarkCell& cell : cells) {
        const bool known =
            std::any_of(datasets.begin(), datasets.end(),
                        [&](const BenchmarkDataset& d) { return d.name == cell.dataset; });
        if (!known)
            throw ConfigInvalid("cells",
                                "cell references unknown dataset '" + cell.dataset + "'");
    }
}

std::vector<RegistrationReport> run_benchmark(const BenchmarkConfig& config,
                                              const std::filesystem::path& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);

    std::vector<RegistrationReport> reports;
    for (const BenchmarkCell& cell : config.cells) {
        RegistrationReport rep;
        rep.algorithm = algorithm_name(cell.algorithm);
        rep.dataset = cell.dataset;
        try {
            const auto it = std::find_if(
                config.datasets.begin(), config.datasets.end(),
                [&](const BenchmarkDataset& d) { return d.name == cell.dataset; });
            RegistrationJob job = job_from_synthetic(
                generate_synthetic_pair(it->seed, it->scene), cell.dataset);

            PipelineConfig cell_config = config.base;
            cell_config.algorithm = cell.algorithm;
            RegistrationOutcome outcome = run_registration(job, cell_config);
            rep = outcome.report;

            if (config.write_overlays && !outcome.matches.empty()) {
                const GeoRaster overlay = render_match_overlay(
                    job.source, job.reference, outcome.matches,
                    outcome.inlier_mask.empty() ? nullptr : &outcome.inlier_mask);
                write_raster((out_dir / (cell.dataset + "-" + rep.algorithm +
                                         "-matches.png"))
                                 .string(),
                             overlay);
            }
        } catch (const std::exception& e) {
            rep.error = e.what();  // cell failures never abort siblings
        }
        reports.push_back(std::move(rep));
    }

    std::ofstream csv(out_dir / "report.csv");
    csv << reports_to_csv(reports);
    std::ofstream json(out_dir / "report.json");
    json << reports_to_json_string(reports);
    std::ofstream summary(out_dir / "summary.csv");
    summary << summary_table(reports);
    return reports;
}

GeoRaster render_match_overlay(const GeoRaster& a, const GeoRaster& b,
                               const MatchSet& matches,
                               const std::vector<std::uint8_t>* inlier_mask) {
    constexpr int kGap = 8;
    const int w = a.width() + kGap + b.width();
    const int h = std::max(a.height(), b.height());
    GeoRaster canvas(w, h, SampleDepth::U8);

    auto blit = [&](const GeoRaster& img, int x0) {
        const double scale = 255.0 / depth_max_value(img.depth);
        for (int y = 0; y < img.height(); ++y)
            for (int x = 0; x < img.width(); ++x)
                canvas.band(0).at(x0 + x, y) = static_cast<float>(
                    std::clamp(img.band(0).at(x, y) * scale, 0.0, 255.0));
    };
    blit(a, 0);
    blit(b, a.width() + kGap);

    auto draw_line = [&](double x0, double y0, double x1, double y1, float value) {
        const int steps =
            std::max(1, static_cast<int>(std::ceil(std::hypot(x1 - x0, y1 - y0))));
        for (int i = 0; i <= steps; ++i) {
            const double t = static_cast<double>(i) / steps;
            const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
            const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
            if (x >= 0 && y >= 0 && x < w && y < h)
                canvas.band(0).at(x, y) = value;
        }
    };

    const int offset_b = a.width() + kGap;
    for (int i = 0; i < matches.size(); ++i) {
        const bool inlier = inlier_mask && i < static_cast<int>(inlier_mask->size()) &&
                            (*inlier_mask)[i] != 0;
        const float value = !inlier_mask ? 200.0f : inlier ? 255.0f : 128.0f;
        const Eigen::Vector2d pa = matches.point_a(i);
        const Eigen::Vector2d pb = matches.point_b(i);
        draw_line(pa.x(), pa.y(), offset_b + pb.x(), pb.y(), value);
    }
    return canvas;
}

}  // namespace lunareg

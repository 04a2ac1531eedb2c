// lunareg: command-line front end for the registration toolkit.
//
// Subcommands: preprocess | detect | match | register | benchmark | synth.
// Exit codes: 0 success, 1 registration failed (report has status=failed),
// 2 usage or configuration error. Diagnostics go to standard error; machine
// output goes to files under --out and to standard output.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lunareg/cli/config.hpp"
#include "lunareg/core/error.hpp"
#include "lunareg/eval/pipeline.hpp"
#include "lunareg/eval/report.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/akaze.hpp"
#include "lunareg/features/asift.hpp"
#include "lunareg/features/exchange.hpp"
#include "lunareg/features/rift2.hpp"
#include "lunareg/features/sift.hpp"
#include "lunareg/matching/matching.hpp"
#include "lunareg/preprocess/preprocess.hpp"
#include "lunareg/raster/io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw lunareg::InputUnreadable(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw lunareg::InputUnreadable(path.string());
}

/// PNG for 8/16-bit rasters, TIFF for float data.
std::string raster_file_name(const lunareg::GeoRaster& r, const char* stem) {
    const bool needs_tiff = r.depth == lunareg::SampleDepth::F32;
    return std::string(stem) + (needs_tiff ? ".tif" : ".png");
}

lunareg::GeoRaster load_image(const std::string& path, const std::string& sidecar) {
    lunareg::GeoRaster img = lunareg::read_raster(path);
    if (!sidecar.empty())
        img.meta = lunareg::read_geo_sidecar(sidecar);
    return img;
}

std::string pair_dataset_name(const std::string& source, const std::string& reference) {
    return fs::path(source).stem().string() + "-" + fs::path(reference).stem().string();
}

// ------------------------------------------------------------------ synth

struct SynthArgs {
    std::string out;
    std::string scene_file;
    std::uint64_t seed = 0;
    int size = 512;
    int craters = 40;
    double min_radius = 6.0;
    double max_radius = 40.0;
    double azimuth = 135.0;
    double elevation = 30.0;
    double noise = 2.0;
    std::string mode = "none";
    double gamma = 1.0;
    double rot = 0.0;
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;
};

int run_synth(const SynthArgs& a, const CLI::App* cmd) {
    lunareg::SceneParams scene;
    if (!a.scene_file.empty())
        scene = lunareg::parse_scene_text(read_text_file(a.scene_file));
    if (cmd->count("--size"))
        scene.size = a.size;
    if (cmd->count("--craters"))
        scene.crater_count = a.craters;
    if (cmd->count("--min-radius"))
        scene.min_radius = a.min_radius;
    if (cmd->count("--max-radius"))
        scene.max_radius = a.max_radius;
    if (cmd->count("--azimuth"))
        scene.illumination_azimuth_deg = a.azimuth;
    if (cmd->count("--elevation"))
        scene.illumination_elevation_deg = a.elevation;
    if (cmd->count("--noise"))
        scene.noise_sigma = a.noise;
    if (cmd->count("--mode"))
        scene.radiometric_mode = lunareg::radiometric_mode_from_name(a.mode);
    if (cmd->count("--gamma"))
        scene.gamma = a.gamma;
    if (cmd->count("--rot") || cmd->count("--scale") || cmd->count("--tx") ||
        cmd->count("--ty"))
        scene.h_true =
            lunareg::similarity_about_center(scene.size, a.rot, a.scale, a.tx, a.ty);
    scene.validate();

    lunareg::SyntheticPair pair = lunareg::generate_synthetic_pair(a.seed, scene);

    const fs::path out(a.out);
    fs::create_directories(out);
    lunareg::write_raster((out / "reference.png").string(), pair.reference);
    lunareg::write_raster((out / "source.png").string(), pair.source);

    lunareg::MatchSet truth;
    for (std::size_t i = 0; i < pair.src_points.size(); ++i) {
        lunareg::KeyPoint ka;
        ka.x = pair.src_points[i].x();
        ka.y = pair.src_points[i].y();
        lunareg::KeyPoint kb;
        kb.x = pair.ref_points[i].x();
        kb.y = pair.ref_points[i].y();
        truth.keypoints_a.push_back(ka);
        truth.keypoints_b.push_back(kb);
        truth.pairs.push_back({static_cast<int>(i), static_cast<int>(i), 1.0});
    }
    lunareg::write_matches(out / "truth.csv", truth);

    ordered_json record;
    record["seed"] = a.seed;
    record["scene"] = ordered_json::parse(lunareg::serialize_scene(scene));
    const std::string text = record.dump(2) + "\n";
    write_text_file(out / "scene.json", text);
    std::cout << text;
    return 0;
}

// ------------------------------------------------------------- preprocess

struct PreprocessArgs {
    std::string plan_file;
    std::string input;
    std::string output;
    std::string out_dir;
};

int run_preprocess(const PreprocessArgs& a) {
    const lunareg::PreprocessPlan plan = lunareg::PreprocessPlan::from_file(a.plan_file);
    const lunareg::GeoRaster input = lunareg::read_raster(a.input);
    const lunareg::GeoRaster output = lunareg::apply_plan(input, plan);

    fs::path target(a.output);
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        target = fs::path(a.out_dir) / target.filename();
    } else if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    lunareg::write_raster(target.string(), output);

    ordered_json info;
    info["input"] = a.input;
    info["output"] = target.string();
    info["width"] = output.width();
    info["height"] = output.height();
    info["bands"] = output.band_count();
    std::cout << info.dump(2) << "\n";
    return 0;
}

// ----------------------------------------------------------------- detect

struct DetectArgs {
    std::string image;
    std::string algorithm = "sift";
    std::string config_file;
    std::string out;
};

int run_detect(const DetectArgs& a, const CLI::App* cmd) {
    lunareg::RunConfig cfg;
    if (!a.config_file.empty())
        cfg = lunareg::parse_run_config_text(read_text_file(a.config_file), false);
    if (cmd->count("--algorithm") || a.config_file.empty())
        cfg.pipeline.algorithm = lunareg::algorithm_from_name(a.algorithm);

    lunareg::GeoRaster image = lunareg::read_raster(a.image);
    if (!cfg.pipeline.preprocess_source.steps.empty())
        image = lunareg::apply_plan(image, cfg.pipeline.preprocess_source);

    lunareg::DetectionResult det;
    switch (cfg.pipeline.algorithm) {
        case lunareg::Algorithm::Sift:
            det = lunareg::detect_sift(image, cfg.pipeline.sift);
            break;
        case lunareg::Algorithm::Akaze:
            det = lunareg::detect_akaze(image, cfg.pipeline.akaze);
            break;
        case lunareg::Algorithm::Rift2:
            det = lunareg::detect_rift2(image, cfg.pipeline.rift2);
            break;
        default:
            throw lunareg::ConfigInvalid("algorithm",
                                         "detect supports sift, akaze, or rift2");
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    lunareg::write_keypoints(out / "keypoints.jsonl", det.keypoints, &det.descriptors);

    ordered_json info;
    info["image"] = a.image;
    info["algorithm"] = lunareg::algorithm_name(cfg.pipeline.algorithm);
    info["n_keypoints"] = static_cast<int>(det.keypoints.size());
    info["descriptor_dim"] = det.descriptors.dim;
    info["keypoints"] = (out / "keypoints.jsonl").string();
    std::cout << info.dump(2) << "\n";
    return 0;
}

// ------------------------------------------------------------------ match

struct MatchArgs {
    std::string source;
    std::string reference;
    std::string algorithm = "sift";
    std::string config_file;
    std::string matches_file;
    double ratio = 0.0;
    bool no_cross_check = false;
    std::string out;
};

int run_match(const MatchArgs& a, const CLI::App* cmd) {
    lunareg::RunConfig cfg;
    if (!a.config_file.empty())
        cfg = lunareg::parse_run_config_text(read_text_file(a.config_file), false);
    if (cmd->count("--algorithm") || a.config_file.empty())
        cfg.pipeline.algorithm = lunareg::algorithm_from_name(a.algorithm);
    if (cmd->count("--ratio"))
        cfg.pipeline.ratio = a.ratio;
    if (a.no_cross_check)
        cfg.pipeline.cross_check = false;
    if (cmd->count("--matches"))
        cfg.pipeline.external_matches = a.matches_file;
    cfg.validate_settings();

    lunareg::GeoRaster src = lunareg::read_raster(a.source);
    lunareg::GeoRaster ref = lunareg::read_raster(a.reference);
    if (!cfg.pipeline.preprocess_source.steps.empty())
        src = lunareg::apply_plan(src, cfg.pipeline.preprocess_source);
    if (!cfg.pipeline.preprocess_reference.steps.empty())
        ref = lunareg::apply_plan(ref, cfg.pipeline.preprocess_reference);

    lunareg::MatchSet matches;
    std::vector<std::uint8_t> mask;
    int n_kp_a = 0;
    int n_kp_b = 0;
    switch (cfg.pipeline.algorithm) {
        case lunareg::Algorithm::External: {
            const lunareg::ImageDims da{src.width(), src.height()};
            const lunareg::ImageDims db{ref.width(), ref.height()};
            matches = lunareg::import_external_matches(cfg.pipeline.external_matches, da,
                                                       db, &mask);
            n_kp_a = n_kp_b = static_cast<int>(matches.size());
            break;
        }
        case lunareg::Algorithm::Asift: {
            const lunareg::AsiftDetection va = lunareg::asift_detect(src, cfg.pipeline.asift);
            const lunareg::AsiftDetection vb = lunareg::asift_detect(ref, cfg.pipeline.asift);
            n_kp_a = va.total_keypoints();
            n_kp_b = vb.total_keypoints();
            matches = lunareg::asift_match_views(va, vb, cfg.pipeline.asift);
            break;
        }
        default: {
            lunareg::DetectionResult det_a;
            lunareg::DetectionResult det_b;
            if (cfg.pipeline.algorithm == lunareg::Algorithm::Sift) {
                det_a = lunareg::detect_sift(src, cfg.pipeline.sift);
                det_b = lunareg::detect_sift(ref, cfg.pipeline.sift);
            } else if (cfg.pipeline.algorithm == lunareg::Algorithm::Akaze) {
                det_a = lunareg::detect_akaze(src, cfg.pipeline.akaze);
                det_b = lunareg::detect_akaze(ref, cfg.pipeline.akaze);
            } else {
                det_a = lunareg::detect_rift2(src, cfg.pipeline.rift2);
                det_b = lunareg::detect_rift2(ref, cfg.pipeline.rift2);
            }
            n_kp_a = static_cast<int>(det_a.keypoints.size());
            n_kp_b = static_cast<int>(det_b.keypoints.size());
            const bool binary = det_a.descriptors.is_binary();
            const double ratio = cfg.pipeline.ratio.value_or(binary ? 0.8 : 0.75);
            matches = lunareg::match_descriptors(det_a.keypoints, det_a.descriptors,
                                                 det_b.keypoints, det_b.descriptors,
                                                 ratio, cfg.pipeline.cross_check);
            break;
        }
    }

    const fs::path out(a.out);
    fs::create_directories(out);
    lunareg::write_matches(out / "matches.csv", matches,
                           mask.empty() ? nullptr : &mask);

    ordered_json info;
    info["source"] = a.source;
    info["reference"] = a.reference;
    info["algorithm"] = lunareg::algorithm_name(cfg.pipeline.algorithm);
    info["n_keypoints_source"] = n_kp_a;
    info["n_keypoints_reference"] = n_kp_b;
    info["n_matches"] = static_cast<int>(matches.size());
    info["matches"] = (out / "matches.csv").string();
    std::cout << info.dump(2) << "\n";
    return 0;
}

// --------------------------------------------------------------- register

struct RegisterArgs {
    std::string config_file;
    std::string source;
    std::string reference;
    std::string truth;
    std::string matches_file;
    std::string algorithm;
    std::uint64_t seed = 0;
    std::string out;
};

int run_register(const RegisterArgs& a, const CLI::App* cmd) {
    lunareg::RunConfig cfg;
    if (!a.config_file.empty())
        cfg = lunareg::parse_run_config_text(read_text_file(a.config_file), false);
    if (cmd->count("--source"))
        cfg.source = a.source;
    if (cmd->count("--reference"))
        cfg.reference = a.reference;
    if (cmd->count("--truth"))
        cfg.truth = a.truth;
    if (cmd->count("--matches"))
        cfg.pipeline.external_matches = a.matches_file;
    if (cmd->count("--algorithm"))
        cfg.pipeline.algorithm = lunareg::algorithm_from_name(a.algorithm);
    if (cmd->count("--seed"))
        cfg.pipeline.seed = a.seed;
    if (cmd->count("--out"))
        cfg.out_dir = a.out;
    cfg.validate();

    lunareg::RegistrationJob job;
    job.source = load_image(cfg.source, cfg.source_geo);
    job.reference = load_image(cfg.reference, cfg.reference_geo);
    job.dataset = pair_dataset_name(cfg.source, cfg.reference);
    if (!cfg.truth.empty()) {
        const lunareg::MatchSet truth = lunareg::import_external_matches(cfg.truth);
        for (int i = 0; i < truth.size(); ++i) {
            job.truth_src.push_back(truth.point_a(i));
            job.truth_ref.push_back(truth.point_b(i));
        }
    }

    const lunareg::RegistrationOutcome outcome =
        lunareg::run_registration(job, cfg.pipeline);
    const lunareg::RegistrationReport& report = outcome.report;

    const fs::path out(cfg.out_dir);
    fs::create_directories(out);
    if (cfg.emit.report) {
        write_text_file(out / "report.json",
                        lunareg::report_to_json(report).dump(2) + "\n");
        write_text_file(out / "report.csv",
                        lunareg::reports_to_csv({report}));
        lunareg::write_matches(out / "matches.csv", outcome.matches,
                               outcome.inlier_mask.empty() ? nullptr
                                                           : &outcome.inlier_mask);
    }
    if (cfg.emit.warped && outcome.warped)
        lunareg::write_raster(
            (out / raster_file_name(outcome.warped->image, "warped")).string(),
            outcome.warped->image);
    if (cfg.emit.composite && outcome.composite_image)
        lunareg::write_raster(
            (out / raster_file_name(*outcome.composite_image, "composite")).string(),
            *outcome.composite_image);
    if (cfg.emit.overlay && !outcome.matches.empty()) {
        lunareg::GeoRaster ps =
            cfg.pipeline.preprocess_source.steps.empty()
                ? job.source
                : lunareg::apply_plan(job.source, cfg.pipeline.preprocess_source);
        lunareg::GeoRaster pr =
            cfg.pipeline.preprocess_reference.steps.empty()
                ? job.reference
                : lunareg::apply_plan(job.reference, cfg.pipeline.preprocess_reference);
        const lunareg::GeoRaster overlay = lunareg::render_match_overlay(
            ps, pr, outcome.matches,
            outcome.inlier_mask.empty() ? nullptr : &outcome.inlier_mask);
        lunareg::write_raster((out / "overlay.png").string(), overlay);
    }

    std::cout << lunareg::report_to_json(report).dump(2) << "\n";
    if (!report.ok()) {
        std::cerr << "registration failed: " << report.error << "\n";
        return 1;
    }
    return 0;
}

// -------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string config_file;
    std::string out;
    bool no_overlays = false;
};

int run_benchmark_cmd(const BenchmarkArgs& a) {
    lunareg::BenchmarkConfig cfg = lunareg::parse_benchmark_config(a.config_file);
    if (a.no_overlays)
        cfg.write_overlays = false;
    const std::vector<lunareg::RegistrationReport> reports =
        lunareg::run_benchmark(cfg, a.out);
    std::cout << lunareg::summary_table(reports);
    return 0;
}

std::string default_run_config_text() {
    return lunareg::serialize_run_config(lunareg::RunConfig{});
}

std::string default_benchmark_config_text() {
    lunareg::BenchmarkConfig example;
    example.datasets.push_back({"example", 0, lunareg::SceneParams{}});
    example.cells.push_back({"example", lunareg::Algorithm::Sift});
    return lunareg::serialize_benchmark_config(example);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lunareg: multimodal lunar image registration toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", std::string("lunareg ") + lunareg::kVersion);

    int threads = 1;
    app.add_option("--threads", threads,
                   "Upper bound on worker threads (the pipeline is currently "
                   "sequential, so any bound >= 1 behaves identically)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // synth
    SynthArgs synth;
    CLI::App* synth_cmd =
        app.add_subcommand("synth", "Generate a synthetic crater-field pair with "
                                    "ground truth (reference.png, source.png, "
                                    "truth.csv, scene.json)");
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Generation seed")
        ->capture_default_str();
    synth_cmd->add_option("--scene", synth.scene_file,
                          "Scene JSON file (command-line flags override its fields)");
    synth_cmd->add_option("--size", synth.size, "Canvas size in pixels (square)")
        ->capture_default_str();
    synth_cmd->add_option("--craters", synth.craters, "Number of craters")
        ->capture_default_str();
    synth_cmd->add_option("--min-radius", synth.min_radius, "Minimum crater radius, px")
        ->capture_default_str();
    synth_cmd->add_option("--max-radius", synth.max_radius, "Maximum crater radius, px")
        ->capture_default_str();
    synth_cmd->add_option("--azimuth", synth.azimuth, "Illumination azimuth, degrees")
        ->capture_default_str();
    synth_cmd
        ->add_option("--elevation", synth.elevation, "Illumination elevation, degrees")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise, "Gaussian noise sigma, gray levels")
        ->capture_default_str();
    synth_cmd
        ->add_option("--mode", synth.mode,
                     "Radiometric mode of the source image: none|gamma|invert|gamma_invert")
        ->check(CLI::IsMember({"none", "gamma", "invert", "gamma_invert"}))
        ->capture_default_str();
    synth_cmd->add_option("--gamma", synth.gamma, "Gamma for the gamma modes")
        ->capture_default_str();
    synth_cmd
        ->add_option("--rot", synth.rot,
                     "True-transform rotation about the center, degrees")
        ->capture_default_str();
    synth_cmd->add_option("--scale", synth.scale, "True-transform scale factor")
        ->capture_default_str();
    synth_cmd->add_option("--tx", synth.tx, "True-transform x translation, px")
        ->capture_default_str();
    synth_cmd->add_option("--ty", synth.ty, "True-transform y translation, px")
        ->capture_default_str();

    // preprocess
    PreprocessArgs pre;
    CLI::App* pre_cmd = app.add_subcommand(
        "preprocess", "Apply a preprocessing plan to one image");
    pre_cmd->add_option("--plan", pre.plan_file, "Plan JSON file (ordered step array)")
        ->required();
    pre_cmd->add_option("input", pre.input, "Input image (PNG or TIFF)")->required();
    pre_cmd->add_option("output", pre.output, "Output image path")->required();
    pre_cmd->add_option("--out", pre.out_dir,
                        "Output directory (overrides the directory part of `output`)");

    // detect
    DetectArgs det;
    CLI::App* det_cmd = app.add_subcommand(
        "detect", "Detect keypoints and descriptors in one image "
                  "(writes keypoints.jsonl)");
    det_cmd->add_option("image", det.image, "Input image")->required();
    det_cmd->add_option("--algorithm", det.algorithm, "Detector")
        ->check(CLI::IsMember({"sift", "akaze", "rift2"}))
        ->capture_default_str();
    det_cmd->add_option("--config", det.config_file,
                        "Run-config JSON supplying detector parameters");
    det_cmd->add_option("--out", det.out, "Output directory")->required();

    // match
    MatchArgs match;
    CLI::App* match_cmd = app.add_subcommand(
        "match", "Detect and match a source/reference pair (writes matches.csv)");
    match_cmd->add_option("source", match.source, "Source (moving) image")->required();
    match_cmd->add_option("reference", match.reference, "Reference (fixed) image")
        ->required();
    match_cmd->add_option("--algorithm", match.algorithm, "Matching algorithm")
        ->check(CLI::IsMember({"sift", "akaze", "rift2", "asift", "external"}))
        ->capture_default_str();
    match_cmd->add_option("--config", match.config_file,
                          "Run-config JSON supplying parameters");
    match_cmd->add_option("--matches", match.matches_file,
                          "Correspondence CSV for --algorithm external");
    match_cmd->add_option("--ratio", match.ratio,
                          "Lowe ratio threshold (default 0.75 float, 0.8 binary)");
    match_cmd->add_flag("--no-cross-check", match.no_cross_check,
                        "Disable mutual-best cross checking");
    match_cmd->add_option("--out", match.out, "Output directory")->required();

    // register
    RegisterArgs reg;
    CLI::App* reg_cmd = app.add_subcommand(
        "register", "Run the full registration pipeline on an image pair");
    reg_cmd->add_option("--config", reg.config_file, "Run-config JSON file");
    reg_cmd->add_option("--source", reg.source, "Source (moving) image");
    reg_cmd->add_option("--reference", reg.reference, "Reference (fixed) image");
    reg_cmd->add_option("--truth", reg.truth,
                        "Truth-correspondence CSV used for RMSE evaluation");
    reg_cmd->add_option("--matches", reg.matches_file,
                        "Correspondence CSV for --algorithm external");
    reg_cmd->add_option("--algorithm", reg.algorithm,
                        "sift|akaze|rift2|asift|external (default sift)")
        ->check(CLI::IsMember({"sift", "akaze", "rift2", "asift", "external"}));
    reg_cmd->add_option("--seed", reg.seed,
                        "Seed for the held-out evaluation split (default 0)");
    reg_cmd->add_option("--out", reg.out, "Output directory (default: config `out`)");
    reg_cmd->footer("Config file schema with every default value:\n" +
                    default_run_config_text());

    // benchmark
    BenchmarkArgs bench;
    CLI::App* bench_cmd = app.add_subcommand(
        "benchmark", "Run an algorithm x dataset benchmark suite "
                     "(writes report.csv, report.json, summary.csv)");
    bench_cmd->add_option("--config", bench.config_file, "Benchmark JSON file")
        ->required();
    bench_cmd->add_option("--out", bench.out, "Output directory")->required();
    bench_cmd->add_flag("--no-overlays", bench.no_overlays,
                        "Skip the per-cell match-overlay PNGs");
    bench_cmd->footer("Benchmark config schema (one example dataset/cell shown); "
                      "`config` takes the same pipeline fields as `register`, "
                      "with these defaults:\n" +
                      default_benchmark_config_text());

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(synth_cmd))
            return run_synth(synth, synth_cmd);
        if (app.got_subcommand(pre_cmd))
            return run_preprocess(pre);
        if (app.got_subcommand(det_cmd))
            return run_detect(det, det_cmd);
        if (app.got_subcommand(match_cmd))
            return run_match(match, match_cmd);
        if (app.got_subcommand(reg_cmd))
            return run_register(reg, reg_cmd);
        if (app.got_subcommand(bench_cmd))
            return run_benchmark_cmd(bench);
    } catch (const lunareg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

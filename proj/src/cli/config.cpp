#include "lunareg/cli/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "lunareg/core/error.hpp"

namespace lunareg {
namespace {

using ojson = nlohmann::ordered_json;

std::string joined(const std::string& prefix, const char* key) {
    return prefix.empty() ? std::string(key) : prefix + "." + key;
}

void check_keys(const ojson& obj, const std::string& prefix,
                std::initializer_list<std::string_view> known) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (std::string_view k : known)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigInvalid(joined(prefix, item.key().c_str()), "unknown field");
    }
}

const ojson& expect_object(const ojson& obj, const std::string& prefix, const char* key) {
    const ojson& v = obj.at(key);
    if (!v.is_object())
        throw ConfigInvalid(joined(prefix, key), "expected an object");
    return v;
}

void read_int(const ojson& obj, const std::string& prefix, const char* key, int& out) {
    if (!obj.contains(key))
        return;
    const ojson& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigInvalid(joined(prefix, key), "expected an integer");
    out = v.get<int>();
}

void read_u64(const ojson& obj, const std::string& prefix, const char* key,
              std::uint64_t& out) {
    if (!obj.contains(key))
        return;
    const ojson& v = obj.at(key);
    if (!v.is_number_integer() ||
        (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigInvalid(joined(prefix, key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
}

void read_num(const ojson& obj, const std::string& prefix, const char* key, double& out) {
    if (!obj.contains(key))
        return;
    const ojson& v = obj.at(key);
    if (!v.is_number())
        throw ConfigInvalid(joined(prefix, key), "expected a number");
    out = v.get<double>();
}

void read_bool(const ojson& obj, const std::string& prefix, const char* key, bool& out) {
    if (!obj.contains(key))
        return;
    const ojson& v = obj.at(key);
    if (!v.is_boolean())
        throw ConfigInvalid(joined(prefix, key), "expected a boolean");
    out = v.get<bool>();
}

void read_str(const ojson& obj, const std::string& prefix, const char* key,
              std::string& out) {
    if (!obj.contains(key))
        return;
    const ojson& v = obj.at(key);
    if (!v.is_string())
        throw ConfigInvalid(joined(prefix, key), "expected a string");
    out = v.get<std::string>();
}

ojson parse_json_object(const std::string& text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const ojson::exception& e) {
        throw ConfigInvalid("config", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigInvalid("config", "expected a JSON object");
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputUnreadable(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ------------------------------------------------------------ sub-parsers

void parse_sift(const ojson& obj, const std::string& prefix, SiftParams& p) {
    check_keys(obj, prefix,
               {"octaves", "scales_per_octave", "contrast_threshold", "edge_ratio",
                "max_features", "sigma"});
    read_int(obj, prefix, "octaves", p.octaves);
    read_int(obj, prefix, "scales_per_octave", p.scales_per_octave);
    read_num(obj, prefix, "contrast_threshold", p.contrast_threshold);
    read_num(obj, prefix, "edge_ratio", p.edge_ratio);
    read_int(obj, prefix, "max_features", p.max_features);
    read_num(obj, prefix, "sigma", p.sigma);
}

ojson sift_to_json(const SiftParams& p) {
    ojson o;
    o["octaves"] = p.octaves;
    o["scales_per_octave"] = p.scales_per_octave;
    o["contrast_threshold"] = p.contrast_threshold;
    o["edge_ratio"] = p.edge_ratio;
    o["max_features"] = p.max_features;
    o["sigma"] = p.sigma;
    return o;
}

void parse_akaze(const ojson& obj, const std::string& prefix, AkazeParams& p) {
    check_keys(obj, prefix,
               {"octaves", "sublevels", "detector_threshold", "contrast_percentile",
                "max_features", "sigma0"});
    read_int(obj, prefix, "octaves", p.octaves);
    read_int(obj, prefix, "sublevels", p.sublevels);
    read_num(obj, prefix, "detector_threshold", p.detector_threshold);
    read_num(obj, prefix, "contrast_percentile", p.contrast_percentile);
    read_int(obj, prefix, "max_features", p.max_features);
    read_num(obj, prefix, "sigma0", p.sigma0);
}

ojson akaze_to_json(const AkazeParams& p) {
    ojson o;
    o["octaves"] = p.octaves;
    o["sublevels"] = p.sublevels;
    o["detector_threshold"] = p.detector_threshold;
    o["contrast_percentile"] = p.contrast_percentile;
    o["max_features"] = p.max_features;
    o["sigma0"] = p.sigma0;
    return o;
}

void parse_pc(const ojson& obj, const std::string& prefix, PhaseCongruencyParams& p) {
    check_keys(obj, prefix,
               {"n_scales", "n_orientations", "min_wavelength", "mult", "sigma_onf",
                "noise_k"});
    read_int(obj, prefix, "n_scales", p.n_scales);
    read_int(obj, prefix, "n_orientations", p.n_orientations);
    read_num(obj, prefix, "min_wavelength", p.min_wavelength);
    read_num(obj, prefix, "mult", p.mult);
    read_num(obj, prefix, "sigma_onf", p.sigma_onf);
    read_num(obj, prefix, "noise_k", p.noise_k);
}

ojson pc_to_json(const PhaseCongruencyParams& p) {
    ojson o;
    o["n_scales"] = p.n_scales;
    o["n_orientations"] = p.n_orientations;
    o["min_wavelength"] = p.min_wavelength;
    o["mult"] = p.mult;
    o["sigma_onf"] = p.sigma_onf;
    o["noise_k"] = p.noise_k;
    return o;
}

void parse_rift2(const ojson& obj, const std::string& prefix, Rift2Params& p) {
    check_keys(obj, prefix, {"pc", "max_keypoints", "patch_radius", "descriptor_rings"});
    if (obj.contains("pc"))
        parse_pc(expect_object(obj, prefix, "pc"), joined(prefix, "pc"), p.pc);
    read_int(obj, prefix, "max_keypoints", p.max_keypoints);
    read_int(obj, prefix, "patch_radius", p.patch_radius);
    read_int(obj, prefix, "descriptor_rings", p.descriptor_rings);
}

ojson rift2_to_json(const Rift2Params& p) {
    ojson o;
    o["pc"] = pc_to_json(p.pc);
    o["max_keypoints"] = p.max_keypoints;
    o["patch_radius"] = p.patch_radius;
    o["descriptor_rings"] = p.descriptor_rings;
    return o;
}

void parse_asift(const ojson& obj, const std::string& prefix, AsiftParams& p) {
    check_keys(obj, prefix, {"tilt_levels", "ratio", "sift"});
    read_int(obj, prefix, "tilt_levels", p.tilt_levels);
    read_num(obj, prefix, "ratio", p.ratio);
    if (obj.contains("sift"))
        parse_sift(expect_object(obj, prefix, "sift"), joined(prefix, "sift"), p.sift);
}

ojson asift_to_json(const AsiftParams& p) {
    ojson o;
    o["tilt_levels"] = p.tilt_levels;
    o["ratio"] = p.ratio;
    o["sift"] = sift_to_json(p.sift);
    return o;
}

void parse_ransac(const ojson& obj, const std::string& prefix, RansacParams& p) {
    check_keys(obj, prefix, {"threshold_px", "max_iters", "confidence", "seed"});
    read_num(obj, prefix, "threshold_px", p.threshold_px);
    read_int(obj, prefix, "max_iters", p.max_iters);
    read_num(obj, prefix, "confidence", p.confidence);
    read_u64(obj, prefix, "seed", p.seed);
}

ojson ransac_to_json(const RansacParams& p) {
    ojson o;
    o["threshold_px"] = p.threshold_px;
    o["max_iters"] = p.max_iters;
    o["confidence"] = p.confidence;
    o["seed"] = p.seed;
    return o;
}

PreprocessPlan parse_plan(const ojson& arr, const std::string& prefix) {
    if (!arr.is_array())
        throw ConfigInvalid(prefix, "expected an array of steps");
    return PreprocessPlan::from_json_string(arr.dump());
}

void parse_pipeline_fields(const ojson& obj, PipelineConfig& c) {
    if (obj.contains("algorithm")) {
        std::string name;
        read_str(obj, "", "algorithm", name);
        c.algorithm = algorithm_from_name(name);
    }
    read_u64(obj, "", "seed", c.seed);
    if (obj.contains("preprocess")) {
        const ojson& pp = expect_object(obj, "", "preprocess");
        check_keys(pp, "preprocess", {"source", "reference"});
        if (pp.contains("source"))
            c.preprocess_source = parse_plan(pp.at("source"), "preprocess.source");
        if (pp.contains("reference"))
            c.preprocess_reference = parse_plan(pp.at("reference"), "preprocess.reference");
    }
    if (obj.contains("sift"))
        parse_sift(expect_object(obj, "", "sift"), "sift", c.sift);
    if (obj.contains("akaze"))
        parse_akaze(expect_object(obj, "", "akaze"), "akaze", c.akaze);
    if (obj.contains("rift2"))
        parse_rift2(expect_object(obj, "", "rift2"), "rift2", c.rift2);
    if (obj.contains("asift"))
        parse_asift(expect_object(obj, "", "asift"), "asift", c.asift);
    if (obj.contains("ratio")) {
        const ojson& v = obj.at("ratio");
        if (v.is_null()) {
            c.ratio.reset();
        } else if (v.is_number()) {
            c.ratio = v.get<double>();
        } else {
            throw ConfigInvalid("ratio", "expected a number or null");
        }
    }
    read_bool(obj, "", "cross_check", c.cross_check);
    if (obj.contains("ransac"))
        parse_ransac(expect_object(obj, "", "ransac"), "ransac", c.ransac);
    read_str(obj, "", "external_matches", c.external_matches);
    if (obj.contains("warp_interp")) {
        std::string name;
        read_str(obj, "", "warp_interp", name);
        c.warp_interp = interp_from_name(name);
    }
}

void pipeline_to_json(const PipelineConfig& c, ojson& o) {
    o["algorithm"] = algorithm_name(c.algorithm);
    o["seed"] = c.seed;
    ojson pp;
    pp["source"] = ojson::parse(c.preprocess_source.to_json_string());
    pp["reference"] = ojson::parse(c.preprocess_reference.to_json_string());
    o["preprocess"] = std::move(pp);
    o["sift"] = sift_to_json(c.sift);
    o["akaze"] = akaze_to_json(c.akaze);
    o["rift2"] = rift2_to_json(c.rift2);
    o["asift"] = asift_to_json(c.asift);
    if (c.ratio)
        o["ratio"] = *c.ratio;
    else
        o["ratio"] = nullptr;
    o["cross_check"] = c.cross_check;
    o["ransac"] = ransac_to_json(c.ransac);
    o["external_matches"] = c.external_matches;
    o["warp_interp"] = interp_name(c.warp_interp);
}

SceneParams parse_scene_object(const ojson& obj, const std::string& prefix) {
    check_keys(obj, prefix,
               {"size", "crater_count", "min_radius", "max_radius",
                "illumination_azimuth_deg", "illumination_elevation_deg", "noise_sigma",
                "radiometric_mode", "gamma", "h_true"});
    SceneParams scene;
    read_int(obj, prefix, "size", scene.size);
    read_int(obj, prefix, "crater_count", scene.crater_count);
    read_num(obj, prefix, "min_radius", scene.min_radius);
    read_num(obj, prefix, "max_radius", scene.max_radius);
    read_num(obj, prefix, "illumination_azimuth_deg", scene.illumination_azimuth_deg);
    read_num(obj, prefix, "illumination_elevation_deg", scene.illumination_elevation_deg);
    read_num(obj, prefix, "noise_sigma", scene.noise_sigma);
    if (obj.contains("radiometric_mode")) {
        std::string name;
        read_str(obj, prefix, "radiometric_mode", name);
        scene.radiometric_mode = radiometric_mode_from_name(name);
    }
    read_num(obj, prefix, "gamma", scene.gamma);
    if (obj.contains("h_true")) {
        const ojson& h = expect_object(obj, prefix, "h_true");
        const std::string hp = joined(prefix, "h_true");
        if (h.contains("matrix")) {
            check_keys(h, hp, {"matrix"});
            const ojson& m = h.at("matrix");
            if (!m.is_array() || m.size() != 9)
                throw ConfigInvalid(joined(hp, "matrix"),
                                    "expected an array of 9 numbers (row-major)");
            Eigen::Matrix3d mat;
            for (int i = 0; i < 9; ++i) {
                if (!m[i].is_number())
                    throw ConfigInvalid(joined(hp, "matrix"),
                                        "expected an array of 9 numbers (row-major)");
                mat(i / 3, i % 3) = m[i].get<double>();
            }
            scene.h_true = Homography::from_matrix(mat);
        } else {
            check_keys(h, hp, {"rotation_deg", "scale", "tx", "ty"});
            double rot = 0.0, scale = 1.0, tx = 0.0, ty = 0.0;
            read_num(h, hp, "rotation_deg", rot);
            read_num(h, hp, "scale", scale);
            read_num(h, hp, "tx", tx);
            read_num(h, hp, "ty", ty);
            scene.h_true = similarity_about_center(scene.size, rot, scale, tx, ty);
        }
    }
    return scene;
}

ojson scene_to_json(const SceneParams& scene) {
    ojson o;
    o["size"] = scene.size;
    o["crater_count"] = scene.crater_count;
    o["min_radius"] = scene.min_radius;
    o["max_radius"] = scene.max_radius;
    o["illumination_azimuth_deg"] = scene.illumination_azimuth_deg;
    o["illumination_elevation_deg"] = scene.illumination_elevation_deg;
    o["noise_sigma"] = scene.noise_sigma;
    o["radiometric_mode"] = radiometric_mode_name(scene.radiometric_mode);
    o["gamma"] = scene.gamma;
    ojson m = ojson::array();
    for (int i = 0; i < 9; ++i)
        m.push_back(scene.h_true.H(i / 3, i % 3));
    ojson h;
    h["matrix"] = std::move(m);
    o["h_true"] = std::move(h);
    return o;
}

}  // namespace

void RunConfig::validate_settings() const {
    pipeline.sift.validate();
    pipeline.akaze.validate();
    pipeline.rift2.validate();
    pipeline.asift.validate();
    pipeline.validate();
}

void RunConfig::validate() const {
    if (source.empty())
        throw ConfigInvalid("source", "image path must be non-empty");
    if (reference.empty())
        throw ConfigInvalid("reference", "image path must be non-empty");
    if (out_dir.empty())
        throw ConfigInvalid("out", "output directory must be non-empty");
    validate_settings();
}

RunConfig parse_run_config_text(const std::string& text, bool require_paths) {
    const ojson j = parse_json_object(text);
    check_keys(j, "",
               {"source", "reference", "source_geo", "reference_geo", "truth", "out",
                "emit", "algorithm", "seed", "preprocess", "sift", "akaze", "rift2",
                "asift", "ratio", "cross_check", "ransac", "external_matches",
                "warp_interp"});
    RunConfig c;
    read_str(j, "", "source", c.source);
    read_str(j, "", "reference", c.reference);
    read_str(j, "", "source_geo", c.source_geo);
    read_str(j, "", "reference_geo", c.reference_geo);
    read_str(j, "", "truth", c.truth);
    read_str(j, "", "out", c.out_dir);
    if (j.contains("emit")) {
        const ojson& e = expect_object(j, "", "emit");
        check_keys(e, "emit", {"warped", "composite", "overlay", "report"});
        read_bool(e, "emit", "warped", c.emit.warped);
        read_bool(e, "emit", "composite", c.emit.composite);
        read_bool(e, "emit", "overlay", c.emit.overlay);
        read_bool(e, "emit", "report", c.emit.report);
    }
    parse_pipeline_fields(j, c.pipeline);
    if (require_paths)
        c.validate();
    else
        c.validate_settings();
    return c;
}

RunConfig parse_run_config(const std::string& path) {
    return parse_run_config_text(read_file(path));
}

std::string serialize_run_config(const RunConfig& config) {
    ojson o;
    o["source"] = config.source;
    o["reference"] = config.reference;
    o["source_geo"] = config.source_geo;
    o["reference_geo"] = config.reference_geo;
    o["truth"] = config.truth;
    o["out"] = config.out_dir;
    pipeline_to_json(config.pipeline, o);
    ojson e;
    e["warped"] = config.emit.warped;
    e["composite"] = config.emit.composite;
    e["overlay"] = config.emit.overlay;
    e["report"] = config.emit.report;
    o["emit"] = std::move(e);
    return o.dump(2) + "\n";
}

SceneParams parse_scene_text(const std::string& text) {
    const ojson j = parse_json_object(text);
    SceneParams scene = parse_scene_object(j, "scene");
    scene.validate();
    return scene;
}

std::string serialize_scene(const SceneParams& scene) {
    return scene_to_json(scene).dump(2) + "\n";
}

BenchmarkConfig parse_benchmark_config_text(const std::string& text) {
    const ojson j = parse_json_object(text);
    check_keys(j, "", {"datasets", "cells", "config", "write_overlays"});
    BenchmarkConfig c;
    if (j.contains("datasets")) {
        const ojson& arr = j.at("datasets");
        if (!arr.is_array())
            throw ConfigInvalid("datasets", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string prefix = "datasets[" + std::to_string(i) + "]";
            const ojson& d = arr[i];
            if (!d.is_object())
                throw ConfigInvalid(prefix, "expected an object");
            check_keys(d, prefix, {"name", "seed", "scene"});
            BenchmarkDataset ds;
            read_str(d, prefix, "name", ds.name);
            if (ds.name.empty())
                throw ConfigInvalid(joined(prefix, "name"), "must be non-empty");
            read_u64(d, prefix, "seed", ds.seed);
            if (d.contains("scene")) {
                ds.scene = parse_scene_object(expect_object(d, prefix, "scene"),
                                              joined(prefix, "scene"));
                ds.scene.validate();
            }
            c.datasets.push_back(std::move(ds));
        }
    }
    if (j.contains("cells")) {
        const ojson& arr = j.at("cells");
        if (!arr.is_array())
            throw ConfigInvalid("cells", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string prefix = "cells[" + std::to_string(i) + "]";
            const ojson& d = arr[i];
            if (!d.is_object())
                throw ConfigInvalid(prefix, "expected an object");
            check_keys(d, prefix, {"dataset", "algorithm"});
            BenchmarkCell cell;
            read_str(d, prefix, "dataset", cell.dataset);
            if (d.contains("algorithm")) {
                std::string name;
                read_str(d, prefix, "algorithm", name);
                cell.algorithm = algorithm_from_name(name);
            }
            c.cells.push_back(std::move(cell));
        }
    }
    if (j.contains("config")) {
        const ojson& p = expect_object(j, "", "config");
        check_keys(p, "config",
                   {"algorithm", "seed", "preprocess", "sift", "akaze", "rift2", "asift",
                    "ratio", "cross_check", "ransac", "external_matches", "warp_interp"});
        parse_pipeline_fields(p, c.base);
    }
    read_bool(j, "", "write_overlays", c.write_overlays);
    c.validate();
    return c;
}

BenchmarkConfig parse_benchmark_config(const std::string& path) {
    return parse_benchmark_config_text(read_file(path));
}

std::string serialize_benchmark_config(const BenchmarkConfig& config) {
    ojson o;
    ojson datasets = ojson::array();
    for (const BenchmarkDataset& d : config.datasets) {
        ojson ds;
        ds["name"] = d.name;
        ds["seed"] = d.seed;
        ds["scene"] = scene_to_json(d.scene);
        datasets.push_back(std::move(ds));
    }
    o["datasets"] = std::move(datasets);
    ojson cells = ojson::array();
    for (const BenchmarkCell& cell : config.cells) {
        ojson c;
        c["dataset"] = cell.dataset;
        c["algorithm"] = algorithm_name(cell.algorithm);
        cells.push_back(std::move(c));
    }
    o["cells"] = std::move(cells);
    ojson base;
    pipeline_to_json(config.base, base);
    o["config"] = std::move(base);
    o["write_overlays"] = config.write_overlays;
    return o.dump(2) + "\n";
}

std::string interp_name(InterpKernel k) {
    switch (k) {
        case InterpKernel::Nearest: return "nearest";
        case InterpKernel::Bilinear: return "bilinear";
        case InterpKernel::Bicubic: return "bicubic";
    }
    return "bilinear";
}

InterpKernel interp_from_name(const std::string& name) {
    if (name == "nearest")
        return InterpKernel::Nearest;
    if (name == "bilinear")
        return InterpKernel::Bilinear;
    if (name == "bicubic")
        return InterpKernel::Bicubic;
    throw ConfigInvalid("warp_interp", "unknown kernel '" + name +
                                           "' (expected nearest|bilinear|bicubic)");
}

std::string radiometric_mode_name(RadiometricMode m) {
    switch (m) {
        case RadiometricMode::None: return "none";
        case RadiometricMode::Gamma: return "gamma";
        case RadiometricMode::Invert: return "invert";
        case RadiometricMode::GammaInvert: return "gamma_invert";
    }
    return "none";
}

RadiometricMode radiometric_mode_from_name(const std::string& name) {
    if (name == "none")
        return RadiometricMode::None;
    if (name == "gamma")
        return RadiometricMode::Gamma;
    if (name == "invert")
        return RadiometricMode::Invert;
    if (name == "gamma_invert" || name == "gamma+invert")
        return RadiometricMode::GammaInvert;
    throw ConfigInvalid("radiometric_mode",
                        "unknown mode '" + name +
                            "' (expected none|gamma|invert|gamma_invert)");
}

}  // namespace lunareg

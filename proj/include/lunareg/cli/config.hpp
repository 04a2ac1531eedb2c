#pragma once

#include <cstdint>
#include <string>

#include "lunareg/eval/pipeline.hpp"

namespace lunareg {

/// Semantic version of the toolkit, printed by `lunareg --version`.
inline constexpr const char* kVersion = "1.0.0";

/// Which artifacts `lunareg register` writes into its output directory.
struct EmitFlags {
    bool warped = true;     ///< warped.png (+ geo sidecar when available)
    bool composite = true;  ///< composite.png
    bool overlay = true;    ///< overlay.png with match lines
    bool report = true;     ///< report.json, report.csv, matches.csv
};

/// One registration run as described by a JSON config file. Every field has
/// a default; a minimal config needs only the two image paths.
struct RunConfig {
    std::string source;         ///< moving image path
    std::string reference;      ///< fixed image path
    std::string source_geo;     ///< optional sidecar override (default: <path>.geo.json)
    std::string reference_geo;
    std::string truth;          ///< optional truth-correspondence CSV for evaluation
    std::string out_dir = "out";
    EmitFlags emit;
    PipelineConfig pipeline;

    /// Full validation including non-empty image paths. Throws ConfigInvalid.
    void validate() const;
    /// Validates everything except the image/output paths, for subcommands
    /// that take paths on the command line instead. Throws ConfigInvalid.
    void validate_settings() const;
};

/// Parses JSON text into a RunConfig with all defaults materialized.
/// Unknown keys are rejected with the offending (dotted) field name.
/// `require_paths=false` defers the non-empty path check to the caller.
RunConfig parse_run_config_text(const std::string& text, bool require_paths = true);

/// Reads and parses a config file. Throws InputUnreadable / ConfigInvalid.
RunConfig parse_run_config(const std::string& path);

/// Serializes with every field (defaults included) in a stable key order,
/// so serialize(parse(f)) reparses to an equal config.
std::string serialize_run_config(const RunConfig& config);

/// Synthetic-scene description used by `synth` and benchmark datasets.
/// `h_true` may be given as {"matrix": [9 row-major numbers]} or as
/// similarity fields {"rotation_deg", "scale", "tx", "ty"} about the
/// scene center.
SceneParams parse_scene_text(const std::string& text);
std::string serialize_scene(const SceneParams& scene);

/// Benchmark suite description: {"datasets": [{"name", "seed", "scene"}],
/// "cells": [{"dataset", "algorithm"}], "config": {pipeline fields},
/// "write_overlays": bool}.
BenchmarkConfig parse_benchmark_config_text(const std::string& text);
BenchmarkConfig parse_benchmark_config(const std::string& path);
std::string serialize_benchmark_config(const BenchmarkConfig& config);

std::string interp_name(InterpKernel k);
InterpKernel interp_from_name(const std::string& name);  ///< throws ConfigInvalid
std::string radiometric_mode_name(RadiometricMode m);
RadiometricMode radiometric_mode_from_name(const std::string& name);  ///< throws ConfigInvalid

}  // namespace lunareg

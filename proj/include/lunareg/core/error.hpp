#pragma once

#include <stdexcept>
#include <string>

namespace lunareg {

/// Base for all toolkit errors. Subtypes exist so callers can catch the
/// specific failure they care about instead of parsing message strings.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- raster / geo ---
struct SingularGeotransform final : Error {
    SingularGeotransform() : Error("geotransform linear part is singular") {}
};
struct MissingGeoMeta final : Error {
    MissingGeoMeta() : Error("raster carries no geographic metadata") {}
};
struct UnsupportedProjectionPair final : Error {
    explicit UnsupportedProjectionPair(const std::string& what) : Error(what) {}
};

// --- preprocessing ---
struct UnknownSourceGsd final : Error {
    UnknownSourceGsd() : Error("source GSD is unknown (no meta and none supplied)") {}
};
struct EmptyValidRegion final : Error {
    EmptyValidRegion() : Error("no valid pixels in raster") {}
};
struct TileGridTooFine final : Error {
    TileGridTooFine() : Error("CLAHE tile grid exceeds image dimensions") {}
};
struct NonEightBitInput final : Error {
    NonEightBitInput() : Error("operation requires an 8-bit raster") {}
};
struct DimensionMismatch final : Error {
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
    DimensionMismatch() : Error("input dimensions do not match") {}
};

// --- features ---
struct ImageTooSmall final : Error {
    explicit ImageTooSmall(int min_side)
        : Error("image smaller than minimum side of " + std::to_string(min_side) + " px") {}
};
struct MalformedRecord final : Error {
    int line;
    explicit MalformedRecord(int line_)
        : Error("malformed correspondence record at line " + std::to_string(line_)), line(line_) {}
};
struct CoordinateOutOfBounds final : Error {
    int line;
    explicit CoordinateOutOfBounds(int line_)
        : Error("correspondence coordinate out of image bounds at line " + std::to_string(line_)),
          line(line_) {}
};

// --- matching / estimation ---
struct DescriptorKindMismatch final : Error {
    DescriptorKindMismatch() : Error("descriptor sets have different kinds") {}
};
struct InsufficientPoints final : Error {
    InsufficientPoints() : Error("homography estimation needs at least 4 point pairs") {}
};
struct InsufficientMatches final : Error {
    InsufficientMatches() : Error("RANSAC needs at least 4 matches") {}
};
struct DegenerateConfiguration final : Error {
    DegenerateConfiguration() : Error("degenerate point configuration (collinear or coincident)") {}
};
struct NoModelFound final : Error {
    NoModelFound() : Error("no RANSAC iteration produced a model with 4 or more inliers") {}
};
struct NonInvertibleHomography final : Error {
    NonInvertibleHomography() : Error("homography is not invertible") {}
};

// --- evaluation / pipeline ---
struct EmptyPointSet final : Error {
    EmptyPointSet() : Error("control point set is empty") {}
};
struct ConfigInvalid final : Error {
    std::string field;
    std::string reason;
    ConfigInvalid(std::string field_, std::string reason_)
        : Error("invalid config field '" + field_ + "': " + reason_),
          field(std::move(field_)),
          reason(std::move(reason_)) {}
};
struct InputUnreadable final : Error {
    explicit InputUnreadable(const std::string& path) : Error("cannot read input: " + path) {}
};

}  // namespace lunareg

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/sift.hpp"
#include "support.hpp"

using namespace lunareg;
using namespace lunareg::testsupport;

namespace {

/// Blob + corner scene: one sigma=4 Gaussian blob plus structurally distinct
/// content (squares, a bar) so "other keypoints" exist for discrimination.
GeoRaster blob_scene() {
    return make_u8(200, 200, [](int x, int y) {
        double v = 80.0;
        v += 120.0 * std::exp(-((x - 100.0) * (x - 100.0) + (y - 100.0) * (y - 100.0)) /
                              (2.0 * 4.0 * 4.0));
        if (x >= 20 && x < 52 && y >= 20 && y < 52)
            v = 200.0;  // bright square, corners give keypoints
        if (x >= 150 && x < 185 && y >= 140 && y < 150)
            v = 15.0;  // dark bar
        if (x >= 30 && x < 44 && y >= 150 && y < 164)
            v = 230.0;  // small square
        return static_cast<int>(v);
    });
}

/// Exact 90-degree clockwise array rotation: B(x, y) = A(y, h-1-x).
GeoRaster rotate90(const GeoRaster& a) {
    GeoRaster b(a.height(), a.width(), a.depth);
    for (int y = 0; y < b.height(); ++y)
        for (int x = 0; x < b.width(); ++x)
            b.band(0).at(x, y) = a.band(0).at(y, a.height() - 1 - x);
    return b;
}

double descriptor_distance(const DescriptorSet& a, int i, const DescriptorSet& b, int j) {
    double acc = 0.0;
    const float* ra = a.float_row(i);
    const float* rb = b.float_row(j);
    for (int k = 0; k < a.dim; ++k)
        acc += (ra[k] - rb[k]) * (ra[k] - rb[k]);
    return std::sqrt(acc);
}

int nearest_keypoint(const KeyPointSet& kps, double x, double y) {
    int best = -1;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < kps.size(); ++i) {
        const double d = std::hypot(kps[i].x - x, kps[i].y - y);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

GeoRaster crater_scene(int size, std::uint64_t seed) {
    SceneParams params;
    params.size = size;
    params.crater_count = size / 18;
    params.min_radius = 5.0;
    params.max_radius = size / 10.0;
    params.noise_sigma = 0.0;
    SyntheticPair pair = generate_synthetic_pair(seed, params);
    return std::move(pair.reference);
}

}  // namespace

TEST_CASE("a constant image has no keypoints") {
    DetectionResult r = detect_sift(constant_u8(64, 64, 140));
    CHECK(r.keypoints.empty());
    CHECK(r.descriptors.rows() == 0);
}

TEST_CASE("images under 32 px per side are rejected") {
    CHECK_THROWS_AS(detect_sift(constant_u8(31, 64, 10)), ImageTooSmall);
    CHECK_THROWS_AS(detect_sift(constant_u8(64, 20, 10)), ImageTooSmall);
}

TEST_CASE("invalid parameters are reported by field") {
    SiftParams p;
    p.contrast_threshold = 0.0;
    CHECK_THROWS_AS(detect_sift(constant_u8(64, 64, 0), p), ConfigInvalid);
    p = SiftParams{};
    p.octaves = 0;
    CHECK_THROWS_AS(detect_sift(constant_u8(64, 64, 0), p), ConfigInvalid);
}

TEST_CASE("descriptors are 128-d unit vectors, one row per keypoint") {
    DetectionResult r = detect_sift(crater_scene(192, 21));
    REQUIRE(r.keypoints.size() > 10);
    REQUIRE(r.descriptors.dim == 128);
    REQUIRE(r.descriptors.rows() == static_cast<int>(r.keypoints.size()));
    r.descriptors.validate();  // unit-norm within 1e-6 enforced here
    for (std::size_t i = 0; i < r.keypoints.size(); ++i) {
        double norm = 0.0;
        const float* row = r.descriptors.float_row(static_cast<int>(i));
        for (int k = 0; k < 128; ++k)
            norm += row[k] * row[k];
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("keypoints stay strictly inside bounds with positive scale") {
    DetectionResult r = detect_sift(crater_scene(160, 3));
    for (const KeyPoint& kp : r.keypoints) {
        CHECK(kp.x >= 0.0);
        CHECK(kp.x < 160.0);
        CHECK(kp.y >= 0.0);
        CHECK(kp.y < 160.0);
        CHECK(kp.scale > 0.0);
        CHECK(kp.orientation >= 0.0);
        CHECK(kp.orientation < 2.0 * 3.14159265358979323846);
    }
}

TEST_CASE("detection is bit-identical across runs") {
    GeoRaster scene = crater_scene(160, 8);
    DetectionResult a = detect_sift(scene);
    DetectionResult b = detect_sift(scene);
    REQUIRE(a.keypoints.size() == b.keypoints.size());
    for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
        CHECK(a.keypoints[i].x == b.keypoints[i].x);
        CHECK(a.keypoints[i].y == b.keypoints[i].y);
        CHECK(a.keypoints[i].scale == b.keypoints[i].scale);
        CHECK(a.keypoints[i].orientation == b.keypoints[i].orientation);
    }
    CHECK(a.descriptors.floats == b.descriptors.floats);
}

TEST_CASE("a sigma-4 Gaussian blob is localized within 1.5 px") {
    GeoRaster scene = blob_scene();
    DetectionResult r = detect_sift(scene);
    REQUIRE_FALSE(r.keypoints.empty());
    const int near = nearest_keypoint(r.keypoints, 100.0, 100.0);
    REQUIRE(near >= 0);
    CHECK(std::hypot(r.keypoints[near].x - 100.0, r.keypoints[near].y - 100.0) <= 1.5);
}

TEST_CASE("the blob descriptor survives a 90-degree rotation") {
    GeoRaster scene = blob_scene();
    GeoRaster rotated = rotate90(scene);
    DetectionResult a = detect_sift(scene);
    DetectionResult b = detect_sift(rotated);
    REQUIRE(a.keypoints.size() > 4);
    REQUIRE(b.keypoints.size() > 4);

    const int ia = nearest_keypoint(a.keypoints, 100.0, 100.0);
    REQUIRE(std::hypot(a.keypoints[ia].x - 100.0, a.keypoints[ia].y - 100.0) <= 1.5);
    // (x, y) -> (y, h-1-x) sends the blob center (100,100) to (100, 99).
    const int ib = nearest_keypoint(b.keypoints, 100.0, 99.0);
    REQUIRE(std::hypot(b.keypoints[ib].x - 100.0, b.keypoints[ib].y - 99.0) <= 1.5);

    const double match_d = descriptor_distance(a.descriptors, ia, b.descriptors, ib);
    double other_best = std::numeric_limits<double>::max();
    for (std::size_t j = 0; j < b.keypoints.size(); ++j) {
        if (std::hypot(b.keypoints[j].x - 100.0, b.keypoints[j].y - 99.0) < 5.0)
            continue;  // orientation duplicates of the blob itself
        other_best = std::min(other_best,
                              descriptor_distance(a.descriptors, ia, b.descriptors,
                                                  static_cast<int>(j)));
    }
    REQUIRE(other_best < std::numeric_limits<double>::max());
    CHECK(match_d < 0.5 * other_best);
}

TEST_CASE("at least 70% of half-resolution keypoints have full-resolution twins") {
    GeoRaster scene = crater_scene(256, 17);
    // Independent 2x2 box decimation (not the library resampler).
    GeoRaster half(128, 128, SampleDepth::U8);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x) {
            const double m = (scene.band(0).at(2 * x, 2 * y) +
                              scene.band(0).at(2 * x + 1, 2 * y) +
                              scene.band(0).at(2 * x, 2 * y + 1) +
                              scene.band(0).at(2 * x + 1, 2 * y + 1)) /
                             4.0;
            half.band(0).at(x, y) = quantize_u8(m);
        }

    DetectionResult full = detect_sift(scene);
    DetectionResult down = detect_sift(half);
    REQUIRE(down.keypoints.size() > 10);

    int covered = 0;
    for (const KeyPoint& kd : down.keypoints) {
        const double ex = 2.0 * kd.x, ey = 2.0 * kd.y, es = 2.0 * kd.scale;
        bool found = false;
        for (const KeyPoint& kf : full.keypoints) {
            if (std::hypot(kf.x - ex, kf.y - ey) <= 2.0 &&
                std::abs(kf.scale - es) <= 0.2 * es) {
                found = true;
                break;
            }
        }
        covered += found ? 1 : 0;
    }
    CHECK(covered >= 0.7 * static_cast<double>(down.keypoints.size()));
}

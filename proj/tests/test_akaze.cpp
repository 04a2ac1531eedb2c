#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lunareg/core/rng.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/akaze.hpp"
#include "support.hpp"

using namespace lunareg;
using namespace lunareg::testsupport;

namespace {

double image_mean(const ImageF& img) {
    double acc = 0.0;
    for (int i = 0; i < img.width() * img.height(); ++i)
        acc += img.data()[i];
    return acc / (img.width() * img.height());
}

ImageF random_float_image(int w, int h, std::uint64_t seed) {
    CounterRng rng(seed);
    ImageF img(w, h);
    for (int i = 0; i < w * h; ++i)
        img.data()[i] = static_cast<float>(rng.next_double());
    return img;
}

GeoRaster crater_scene(int size, std::uint64_t seed) {
    SceneParams params;
    params.size = size;
    params.crater_count = size / 18;
    params.min_radius = 5.0;
    params.max_radius = size / 10.0;
    params.noise_sigma = 0.0;
    return generate_synthetic_pair(seed, params).reference;
}

}  // namespace

TEST_CASE("a constant image has no keypoints") {
    DetectionResult r = detect_akaze(constant_u8(64, 64, 90));
    CHECK(r.keypoints.empty());
    CHECK(r.descriptors.rows() == 0);
}

TEST_CASE("images under 32 px per side are rejected") {
    CHECK_THROWS_AS(detect_akaze(constant_u8(20, 64, 10)), ImageTooSmall);
}

TEST_CASE("parameter validation names the offending field") {
    AkazeParams p;
    p.contrast_percentile = 1.5;
    try {
        detect_akaze(constant_u8(64, 64, 10), p);
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        CHECK(e.field == "contrast_percentile");
    }
}

TEST_CASE("each diffusion step preserves the image mean within 1 percent") {
    // Oracle: sum before vs after every individual FED step, on an image
    // with strong edges so fluxes are large.
    ImageF img(96, 96);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            img.at(x, y) = (x / 16 + y / 16) % 2 ? 0.9f : 0.1f;

    const double k = contrast_factor(img, 0.7);
    const ImageF g = pm_g2_conductivity(gaussian_blur(img, 1.0), k);
    const double dt = 0.5 * (3.2 * 3.2 - 1.6 * 1.6);
    const std::vector<double> taus = fed_tau_sequence(dt);
    REQUIRE_FALSE(taus.empty());

    for (double tau : taus) {
        const double before = image_mean(img);
        pm_diffusion_step(img, g, tau);
        const double after = image_mean(img);
        CHECK(std::abs(after - before) <= 0.01 * std::abs(before));
    }
}

TEST_CASE("diffusion conserves the mean on random images too") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        ImageF img = random_float_image(48, 37, seed);
        const ImageF g = pm_g2_conductivity(img, 0.05);
        const double before = image_mean(img);
        for (double tau : fed_tau_sequence(2.0))
            pm_diffusion_step(img, g, tau);
        CHECK(image_mean(img) == doctest::Approx(before).epsilon(1e-4));
    }
}

TEST_CASE("FED step sizes are positive and sum to the requested time") {
    for (double t : {0.1, 0.77, 1.9, 6.4}) {
        const std::vector<double> taus = fed_tau_sequence(t);
        REQUIRE_FALSE(taus.empty());
        for (double tau : taus)
            CHECK(tau > 0.0);
        const double sum = std::accumulate(taus.begin(), taus.end(), 0.0);
        CHECK(sum == doctest::Approx(t).epsilon(1e-9));
    }
    CHECK(fed_tau_sequence(0.0).empty());
}

TEST_CASE("descriptor bit length matches the grid formula") {
    // Independent formula: three channels, all cell pairs of 2x2, 3x3, 4x4.
    int expected = 0;
    for (int g : {2, 3, 4}) {
        const int cells = g * g;
        expected += 3 * cells * (cells - 1) / 2;
    }
    CHECK(expected == 486);

    DetectionResult r = detect_akaze(crater_scene(160, 5));
    REQUIRE(r.keypoints.size() > 3);
    CHECK(r.descriptors.dim == expected);
    CHECK(r.descriptors.kind == DescriptorKind::BinaryHamming);
    CHECK(r.descriptors.rows() == static_cast<int>(r.keypoints.size()));
    r.descriptors.validate();
}

TEST_CASE("keypoints stay inside bounds with positive scale") {
    DetectionResult r = detect_akaze(crater_scene(192, 9));
    REQUIRE(r.keypoints.size() > 5);
    for (const KeyPoint& kp : r.keypoints) {
        CHECK(kp.x >= 0.0);
        CHECK(kp.x < 192.0);
        CHECK(kp.y >= 0.0);
        CHECK(kp.y < 192.0);
        CHECK(kp.scale > 0.0);
    }
}

TEST_CASE("detection is bit-identical across runs") {
    GeoRaster scene = crater_scene(160, 12);
    DetectionResult a = detect_akaze(scene);
    DetectionResult b = detect_akaze(scene);
    REQUIRE(a.keypoints.size() == b.keypoints.size());
    for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
        CHECK(a.keypoints[i].x == b.keypoints[i].x);
        CHECK(a.keypoints[i].y == b.keypoints[i].y);
        CHECK(a.keypoints[i].scale == b.keypoints[i].scale);
        CHECK(a.keypoints[i].orientation == b.keypoints[i].orientation);
    }
    CHECK(a.descriptors.bits == b.descriptors.bits);
}

TEST_CASE("g2 conductivity is 1 on flat regions and small on strong edges") {
    ImageF img(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            img.at(x, y) = x < 32 ? 0.1f : 0.9f;
    const ImageF g = pm_g2_conductivity(img, 0.05);
    CHECK(g.at(5, 30) == doctest::Approx(1.0).epsilon(1e-6));   // flat
    CHECK(g.at(58, 30) == doctest::Approx(1.0).epsilon(1e-6));  // flat
    CHECK(g.at(32, 30) < 0.05);                                 // on the edge
}

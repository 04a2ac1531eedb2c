// Phase congruency map properties and RIFT2 keypoints/descriptors,
// including radiometric robustness against a gradient-based baseline.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lunareg/core/error.hpp"
#include "lunareg/eval/rmse.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/phase_congruency.hpp"
#include "lunareg/features/rift2.hpp"
#include "lunareg/features/sift.hpp"
#include "lunareg/matching/matching.hpp"
#include "lunareg/matching/ransac.hpp"

#include "support.hpp"

using namespace lunareg;
using namespace lunareg::testsupport;

namespace {

SceneParams crater_params(int size, int craters, double max_radius) {
    SceneParams sp;
    sp.size = size;
    sp.crater_count = craters;
    sp.min_radius = 5.0;
    sp.max_radius = max_radius;
    sp.noise_sigma = 0.0;
    return sp;
}

}  // namespace

TEST_CASE("constant image has no phase congruency") {
    ImageF img(64, 48);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x)
            img.at(x, y) = 0.37f;
    const auto r = phase_congruency(img);
    float max_pc = 0.0f;
    for (int i = 0; i < 64 * 48; ++i)
        max_pc = std::max(max_pc, r.pc_map.data()[i]);
    CHECK(max_pc < 1e-6f);
}

TEST_CASE("pc map stays in [0,1] and mim in [1,n] on random input") {
    const GeoRaster noise = random_u8(80, 64, 99);
    PhaseCongruencyParams params;
    const auto r = phase_congruency(noise, params);
    for (int i = 0; i < 80 * 64; ++i) {
        CHECK(r.pc_map.data()[i] >= 0.0f);
        CHECK(r.pc_map.data()[i] <= 1.0f);
        CHECK(r.mim.data()[i] >= 1);
        CHECK(r.mim.data()[i] <= params.n_orientations);
    }
    CHECK(static_cast<int>(r.orientation_energy.size()) == params.n_orientations);
}

TEST_CASE("vertical step edge peaks at the edge column with a stable index") {
    ImageF img(128, 128);
    for (int y = 0; y < 128; ++y)
        for (int x = 0; x < 128; ++x)
            img.at(x, y) = x < 64 ? 0.2f : 0.8f;
    const auto r = phase_congruency(img);

    // Away from the wrap-around borders the response must peak at the edge.
    for (int y = 20; y <= 108; y += 8) {
        int best = -1;
        float best_v = -1.0f;
        for (int x = 8; x < 120; ++x)
            if (r.pc_map.at(x, y) > best_v) {
                best_v = r.pc_map.at(x, y);
                best = x;
            }
        CHECK(std::abs(best - 64) <= 1);
    }
    const int m0 = r.mim.at(64, 20);
    for (int y = 20; y <= 108; ++y)
        CHECK(r.mim.at(64, y) == m0);
}

TEST_CASE("contrast inversion leaves pc map and mim unchanged") {
    const GeoRaster scene = make_u8(96, 96, [](int x, int y) {
        return static_cast<int>(128 + 90 * std::sin(0.2 * x) * std::cos(0.15 * y));
    });
    GeoRaster inverted = scene;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            inverted.band(0).at(x, y) = 255.0f - scene.band(0).at(x, y);

    const auto ra = phase_congruency(scene);
    const auto rb = phase_congruency(inverted);
    for (int i = 0; i < 96 * 96; ++i) {
        CHECK(std::abs(ra.pc_map.data()[i] - rb.pc_map.data()[i]) < 1e-5f);
        CHECK(ra.mim.data()[i] == rb.mim.data()[i]);
    }
}

TEST_CASE("parameter and size validation") {
    PhaseCongruencyParams p;
    p.n_orientations = 1;
    CHECK_THROWS_AS(phase_congruency(random_u8(32, 32, 1), p), ConfigInvalid);
    try {
        phase_congruency(random_u8(32, 32, 1), p);
    } catch (const ConfigInvalid& e) {
        CHECK(e.field == "n_orientations");
    }

    PhaseCongruencyParams bad_mult;
    bad_mult.mult = 1.0;
    CHECK_THROWS_AS(phase_congruency(random_u8(32, 32, 1), bad_mult), ConfigInvalid);

    CHECK_THROWS_AS(phase_congruency(random_u8(15, 40, 1)), ImageTooSmall);
}

TEST_CASE("constant image yields no rift2 keypoints") {
    const auto r = detect_rift2(constant_u8(64, 64, 120));
    CHECK(r.keypoints.empty());
    CHECK(r.descriptors.rows() == 0);
}

TEST_CASE("rift2 descriptor shape, norm, and keypoint invariants") {
    auto pair = generate_synthetic_pair(5, crater_params(192, 12, 18.0));
    Rift2Params params;
    params.patch_radius = 24;
    const auto r = detect_rift2(pair.reference, params);

    REQUIRE(!r.keypoints.empty());
    CHECK(r.descriptors.kind == DescriptorKind::Mim);
    CHECK(r.descriptors.dim ==
          params.descriptor_rings * 6 * params.pc.n_orientations);
    CHECK(r.descriptors.rows() == static_cast<int>(r.keypoints.size()));
    r.descriptors.validate();

    for (const KeyPoint& kp : r.keypoints) {
        CHECK(kp.x >= 0.0);
        CHECK(kp.y >= 0.0);
        CHECK(kp.x < 192.0);
        CHECK(kp.y < 192.0);
        CHECK(kp.scale > 0.0);
        CHECK(kp.orientation >= 0.0);
        CHECK(kp.orientation < 2.0 * 3.14159265358979323846);
    }
}

TEST_CASE("rift2 detection is bit-identical across runs") {
    auto pair = generate_synthetic_pair(8, crater_params(160, 10, 16.0));
    Rift2Params params;
    params.patch_radius = 20;
    const auto a = detect_rift2(pair.reference, params);
    const auto b = detect_rift2(pair.reference, params);
    REQUIRE(a.keypoints.size() == b.keypoints.size());
    for (std::size_t i = 0; i < a.keypoints.size(); ++i) {
        CHECK(a.keypoints[i].x == b.keypoints[i].x);
        CHECK(a.keypoints[i].y == b.keypoints[i].y);
        CHECK(a.keypoints[i].response == b.keypoints[i].response);
    }
    CHECK(a.descriptors.floats == b.descriptors.floats);
}

TEST_CASE("rift2 parameter validation") {
    Rift2Params p;
    p.patch_radius = 2;
    CHECK_THROWS_AS(detect_rift2(constant_u8(64, 64, 10), p), ConfigInvalid);
    Rift2Params q;
    q.descriptor_rings = 0;
    CHECK_THROWS_AS(detect_rift2(constant_u8(64, 64, 10), q), ConfigInvalid);
}

TEST_CASE("descriptors survive a gamma remap with little distance inflation") {
    // Same geometry, one side gamma-remapped: matched descriptor distances
    // must stay close to the self-match baseline (median growth < 10% of the
    // descriptor diameter) and matches must land on the true positions.
    SceneParams sp = crater_params(256, 16, 22.0);
    sp.h_true = Homography::identity();

    SceneParams remapped = sp;
    remapped.radiometric_mode = RadiometricMode::Gamma;
    remapped.gamma = 0.5;

    Rift2Params params;
    params.patch_radius = 32;

    const auto plain = generate_synthetic_pair(13, sp);
    const auto gamma = generate_synthetic_pair(13, remapped);
    const auto da = detect_rift2(plain.reference, params);
    const auto db = detect_rift2(gamma.source, params);  // gamma applied, same frame

    const MatchSet m = match_descriptors(da.keypoints, da.descriptors, db.keypoints,
                                         db.descriptors, 0.9, true);
    REQUIRE(m.pairs.size() >= 10);

    std::vector<double> distances;
    int coincident = 0;
    for (int i = 0; i < m.size(); ++i) {
        distances.push_back(m.pairs[i].distance);
        if ((m.point_a(i) - m.point_b(i)).norm() < 2.0)
            ++coincident;
    }
    std::sort(distances.begin(), distances.end());
    const double median = distances[distances.size() / 2];
    // Unit-norm descriptors are at most 2 apart; "< 10%" of that diameter.
    CHECK(median < 0.2);
    CHECK(coincident >= static_cast<int>(0.8 * m.size()));
}

TEST_CASE("rift2 beats sift on a contrast-inverted pair") {
    SceneParams sp = crater_params(256, 18, 22.0);
    sp.noise_sigma = 2.0;
    sp.radiometric_mode = RadiometricMode::GammaInvert;
    sp.gamma = 1.8;
    sp.h_true = similarity_about_center(256, 5.0, 1.05, 6.0, -4.0);
    const auto pair = generate_synthetic_pair(11, sp);

    // SIFT on the inverted pair (expected to struggle; failure allowed).
    int sift_inliers = 0;
    {
        const auto a = detect_sift(pair.source);
        const auto b = detect_sift(pair.reference);
        const MatchSet m = match_descriptors(a.keypoints, a.descriptors, b.keypoints,
                                             b.descriptors, 0.75, true);
        if (m.size() >= 4) {
            try {
                sift_inliers = ransac_homography(m, {}).inlier_count();
            } catch (const Error&) {
            }
        }
    }

    Rift2Params params;
    params.patch_radius = 32;
    const auto a = detect_rift2(pair.source, params);
    const auto b = detect_rift2(pair.reference, params);
    const MatchSet m = match_descriptors(a.keypoints, a.descriptors, b.keypoints,
                                         b.descriptors, 0.85, true);
    REQUIRE(m.size() >= 4);
    const RansacResult r = ransac_homography(m, {});

    CHECK(r.inlier_count() >= sift_inliers);
    CHECK(r.inlier_count() >= 10);
    const auto [rx, ry] = rmse_xy(pair.truth_control_points(r.h));
    CHECK(rx < 2.0);
    CHECK(ry < 2.0);
}

// Affine view simulation and tilt-robust matching.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "lunareg/core/error.hpp"
#include "lunareg/eval/rmse.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/asift.hpp"
#include "lunareg/features/sift.hpp"
#include "lunareg/matching/ransac.hpp"

#include "support.hpp"

using namespace lunareg;
using namespace lunareg::testsupport;

namespace {

ImageF crater_gray(int size, int craters, std::uint64_t seed) {
    SceneParams sp;
    sp.size = size;
    sp.crater_count = craters;
    sp.min_radius = 5.0;
    sp.max_radius = size / 10.0;
    sp.noise_sigma = 0.0;
    return gray_unit(generate_synthetic_pair(seed, sp).reference);
}

}  // namespace

TEST_CASE("tilt level 1 produces exactly the identity view") {
    const ImageF img = crater_gray(96, 6, 3);
    const auto views = simulate_affine_views(img, 1);
    REQUIRE(views.size() == 1);
    CHECK(views[0].second.tilt == 1.0);
    CHECK(views[0].second.rotation == 0.0);
    CHECK(views[0].second.view_to_original ==
          (Eigen::Matrix<double, 2, 3>() << 1, 0, 0, 0, 1, 0).finished());
    REQUIRE(views[0].first.width() == img.width());
    REQUIRE(views[0].first.height() == img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            CHECK(views[0].first.at(x, y) == img.at(x, y));
}

TEST_CASE("view count follows the rotation sampling rule") {
    const ImageF img = crater_gray(96, 6, 3);
    // One upright view plus ceil(360 / (72/sqrt(2))) rotations of the first tilt.
    const int expected = 1 + static_cast<int>(std::ceil(360.0 / (72.0 / std::sqrt(2.0))));
    CHECK(static_cast<int>(simulate_affine_views(img, 2).size()) == expected);

    int three = 1;
    for (int k = 1; k < 3; ++k) {
        const double t = std::pow(std::sqrt(2.0), k);
        three += static_cast<int>(std::ceil(360.0 / (72.0 / t)));
    }
    CHECK(static_cast<int>(simulate_affine_views(img, 3).size()) == three);

    CHECK_THROWS_AS(simulate_affine_views(img, 0), ConfigInvalid);
    CHECK_THROWS_AS(simulate_affine_views(img, 7), ConfigInvalid);
}

TEST_CASE("view-to-original maps invert within 1e-6") {
    const ImageF img = crater_gray(128, 8, 5);
    const auto views = simulate_affine_views(img, 3);
    for (const auto& [view, av] : views) {
        Eigen::Matrix2d m = av.view_to_original.block<2, 2>(0, 0);
        REQUIRE(std::abs(m.determinant()) > 1e-12);
        const Eigen::Matrix2d inv = m.inverse();
        const Eigen::Vector2d b = av.view_to_original.col(2);
        const Eigen::Vector2d probes[3] = {{3.2, 7.9}, {40.5, 21.25}, {11.0, 60.75}};
        for (const Eigen::Vector2d& p : probes) {
            const Eigen::Vector2d original = av.to_original(p);
            const Eigen::Vector2d back = inv * (original - b);
            CHECK((back - p).norm() < 1e-6);
        }
    }
}

TEST_CASE("tilted views shrink along x by the tilt factor") {
    const ImageF img = crater_gray(128, 8, 5);
    const auto views = simulate_affine_views(img, 2);
    // The first simulated view is the unrotated sqrt(2) tilt.
    const auto& [view, av] = views[1];
    CHECK(av.tilt == doctest::Approx(std::sqrt(2.0)));
    CHECK(av.rotation == 0.0);
    CHECK(view.height() == img.height());
    CHECK(view.width() ==
          static_cast<int>(std::floor((img.width() - 1) / std::sqrt(2.0))) + 1);
}

TEST_CASE("identical images with one view recover the identity transform") {
    SceneParams sp;
    sp.size = 200;
    sp.crater_count = 12;
    sp.min_radius = 5.0;
    sp.max_radius = 20.0;
    sp.noise_sigma = 0.0;
    const auto pair = generate_synthetic_pair(9, sp);

    AsiftParams params;
    params.tilt_levels = 1;
    const MatchSet m = asift_match(pair.reference, pair.reference, params);
    REQUIRE(m.size() >= 4);
    const RansacResult r = ransac_homography(m, {});
    CHECK((r.h.H - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("single-view matching equals plain sift matching") {
    SceneParams sp;
    sp.size = 160;
    sp.crater_count = 9;
    sp.min_radius = 5.0;
    sp.max_radius = 16.0;
    sp.noise_sigma = 1.0;
    sp.h_true = similarity_about_center(160, 2.0, 1.02, 3.0, -2.0);
    const auto pair = generate_synthetic_pair(21, sp);
    const ImageF a = gray_unit(pair.source);
    const ImageF b = gray_unit(pair.reference);

    AsiftParams params;
    params.tilt_levels = 1;
    const MatchSet via_asift = asift_match(a, b, params);

    const auto da = detect_sift(a, params.sift);
    const auto db = detect_sift(b, params.sift);
    const MatchSet plain = match_descriptors(da.keypoints, da.descriptors, db.keypoints,
                                             db.descriptors, params.ratio, true);

    REQUIRE(via_asift.size() == plain.size());
    for (int i = 0; i < plain.size(); ++i) {
        CHECK(via_asift.pairs[i].index_a == plain.pairs[i].index_a);
        CHECK(via_asift.pairs[i].index_b == plain.pairs[i].index_b);
        CHECK(via_asift.pairs[i].distance == plain.pairs[i].distance);
    }
}

TEST_CASE("small inputs are rejected") {
    const ImageF tiny(20, 20);
    const ImageF ok = crater_gray(96, 6, 3);
    CHECK_THROWS_AS(asift_match(tiny, ok, {}), ImageTooSmall);
    CHECK_THROWS_AS(asift_match(ok, tiny, {}), ImageTooSmall);
}

TEST_CASE("matched coordinates stay inside the original frames") {
    SceneParams sp;
    sp.size = 256;
    sp.crater_count = 16;
    sp.min_radius = 5.0;
    sp.max_radius = 24.0;
    sp.noise_sigma = 1.0;
    const double t = std::sqrt(2.0), c = (sp.size - 1) / 2.0;
    sp.h_true.H << t, 0, c * (1 - t) + 4.0, 0, 1, -3.0, 0, 0, 1;
    const auto pair = generate_synthetic_pair(17, sp);

    const MatchSet m = asift_match(pair.source, pair.reference, {});
    for (int i = 0; i < m.size(); ++i) {
        const Eigen::Vector2d pa = m.point_a(i);
        const Eigen::Vector2d pb = m.point_b(i);
        CHECK(pa.x() >= 0.0);
        CHECK(pa.y() >= 0.0);
        CHECK(pa.x() <= 255.0);
        CHECK(pa.y() <= 255.0);
        CHECK(pb.x() >= 0.0);
        CHECK(pb.y() >= 0.0);
        CHECK(pb.x() <= 255.0);
        CHECK(pb.y() <= 255.0);
    }

    // No two kept correspondences agree within 1 px on both sides.
    for (int i = 0; i < m.size(); ++i)
        for (int j = i + 1; j < m.size(); ++j) {
            const bool close_a = (m.point_a(i) - m.point_a(j)).norm() <= 1.0;
            const bool close_b = (m.point_b(i) - m.point_b(j)).norm() <= 1.0;
            CHECK(!(close_a && close_b));
        }
}

TEST_CASE("45-degree tilt: asift finds at least twice sift's inliers") {
    SceneParams sp;
    sp.size = 256;
    sp.crater_count = 16;
    sp.min_radius = 5.0;
    sp.max_radius = 24.0;
    sp.noise_sigma = 2.0;
    const double t = std::sqrt(2.0), c = (sp.size - 1) / 2.0;
    sp.h_true.H << t, 0, c * (1 - t) + 4.0, 0, 1, -3.0, 0, 0, 1;
    const auto pair = generate_synthetic_pair(7, sp);

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

    const MatchSet m = asift_match(pair.source, pair.reference, {});
    REQUIRE(m.size() >= 4);
    const RansacResult r = ransac_homography(m, {});
    CHECK(r.inlier_count() >= 2 * sift_inliers);
    CHECK(r.inlier_count() >= 20);

    const auto [rx, ry] = rmse_xy(pair.truth_control_points(r.h));
    CHECK(rx < 2.0);
    CHECK(ry < 2.0);
}

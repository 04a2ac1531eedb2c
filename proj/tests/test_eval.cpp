#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lunareg/core/rng.hpp"
#include "lunareg/eval/report.hpp"
#include "lunareg/eval/rmse.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/matching/ransac.hpp"
#include "support.hpp"

using namespace lunareg;
using namespace lunareg::testsupport;

namespace {

bool raster_equal(const GeoRaster& a, const GeoRaster& b) {
    if (a.width() != b.width() || a.height() != b.height())
        return false;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (a.band(0).at(x, y) != b.band(0).at(x, y))
                return false;
    return true;
}

}  // namespace

TEST_CASE("identical point sets give zero RMSE") {
    ControlPointSet pts;
    pts.add({1.0, 2.0}, {1.0, 2.0});
    pts.add({-4.5, 0.25}, {-4.5, 0.25});
    auto [rx, ry] = rmse_xy(pts);
    CHECK(rx == 0.0);
    CHECK(ry == 0.0);
}

TEST_CASE("constant offset (3,4) yields RMSE exactly (3,4)") {
    ControlPointSet pts;
    CounterRng rng(4);
    for (int i = 0; i < 17; ++i) {
        const Eigen::Vector2d p(rng.next_uniform(-100, 100), rng.next_uniform(-100, 100));
        pts.add(p, p + Eigen::Vector2d(3.0, 4.0));
    }
    auto [rx, ry] = rmse_xy(pts);
    CHECK(rx == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ry == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("rmse matches a brute-force loop on 1000 random point sets") {
    CounterRng rng(123);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng.next_below(12));
        ControlPointSet pts;
        double sx = 0.0, sy = 0.0;
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d ref(rng.next_uniform(-500, 500),
                                      rng.next_uniform(-500, 500));
            const Eigen::Vector2d reg(ref.x() + rng.next_uniform(-5, 5),
                                      ref.y() + rng.next_uniform(-5, 5));
            pts.add(ref, reg);
            sx += (reg.x() - ref.x()) * (reg.x() - ref.x());
            sy += (reg.y() - ref.y()) * (reg.y() - ref.y());
        }
        auto [rx, ry] = rmse_xy(pts);
        CHECK(rx == doctest::Approx(std::sqrt(sx / n)).epsilon(1e-9));
        CHECK(ry == doctest::Approx(std::sqrt(sy / n)).epsilon(1e-9));
    }
}

TEST_CASE("empty point set is rejected") {
    CHECK_THROWS_AS(rmse_xy(ControlPointSet{}), EmptyPointSet);
}

TEST_CASE("rmse is permutation-invariant and scales linearly") {
    CounterRng rng(55);
    ControlPointSet pts;
    for (int i = 0; i < 40; ++i)
        pts.add({rng.next_uniform(0, 256), rng.next_uniform(0, 256)},
                {rng.next_uniform(0, 256), rng.next_uniform(0, 256)});
    auto [rx, ry] = rmse_xy(pts);

    // Deterministic shuffle.
    ControlPointSet shuffled = pts;
    for (int i = 39; i > 0; --i) {
        const int j = static_cast<int>(rng.next_below(i + 1));
        std::swap(shuffled.reference[i], shuffled.reference[j]);
        std::swap(shuffled.registered[i], shuffled.registered[j]);
    }
    auto [px, py] = rmse_xy(shuffled);
    CHECK(px == doctest::Approx(rx).epsilon(1e-12));
    CHECK(py == doctest::Approx(ry).epsilon(1e-12));

    ControlPointSet scaled;
    for (int i = 0; i < pts.size(); ++i)
        scaled.add(2.5 * pts.reference[i], 2.5 * pts.registered[i]);
    auto [sx, sy] = rmse_xy(scaled);
    CHECK(sx == doctest::Approx(2.5 * rx).epsilon(1e-12));
    CHECK(sy == doctest::Approx(2.5 * ry).epsilon(1e-12));
}

TEST_CASE("synthetic pairs are bit-identical for a repeated seed") {
    SceneParams params;
    params.size = 128;
    params.crater_count = 8;
    params.max_radius = 18.0;
    params.h_true = similarity_about_center(128.0, 3.0, 1.02, 2.0, -1.0);
    SyntheticPair a = generate_synthetic_pair(99, params);
    SyntheticPair b = generate_synthetic_pair(99, params);
    CHECK(raster_equal(a.reference, b.reference));
    CHECK(raster_equal(a.source, b.source));
    REQUIRE(a.ref_points.size() == b.ref_points.size());
    for (std::size_t i = 0; i < a.ref_points.size(); ++i) {
        CHECK(a.ref_points[i] == b.ref_points[i]);
        CHECK(a.src_points[i] == b.src_points[i]);
    }

    SyntheticPair c = generate_synthetic_pair(100, params);
    CHECK_FALSE(raster_equal(a.reference, c.reference));
}

TEST_CASE("identity truth with no noise or remap duplicates the reference") {
    SceneParams params;
    params.size = 96;
    params.crater_count = 5;
    params.max_radius = 14.0;
    params.noise_sigma = 0.0;
    SyntheticPair pair = generate_synthetic_pair(7, params);
    CHECK(raster_equal(pair.reference, pair.source));
    REQUIRE(pair.reference.meta.has_value());
    for (std::size_t i = 0; i < pair.ref_points.size(); ++i)
        CHECK((pair.ref_points[i] - pair.src_points[i]).norm() < 1e-12);
}

TEST_CASE("radiometric inversion flips intensities of the noise-free source") {
    SceneParams params;
    params.size = 96;
    params.crater_count = 5;
    params.max_radius = 14.0;
    params.noise_sigma = 0.0;
    SyntheticPair plain = generate_synthetic_pair(7, params);
    params.radiometric_mode = RadiometricMode::Invert;
    SyntheticPair flipped = generate_synthetic_pair(7, params);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            CHECK(flipped.source.band(0).at(x, y) ==
                  255.0f - plain.source.band(0).at(x, y));
}

TEST_CASE("crater-fit and gamma parameters are validated") {
    SceneParams params;
    params.size = 64;
    params.max_radius = 40.0;  // 2*(40+4) > 64: cannot fit
    CHECK_THROWS_AS(generate_synthetic_pair(1, params), ConfigInvalid);
    params.max_radius = 12.0;
    params.gamma = 0.0;
    CHECK_THROWS_AS(generate_synthetic_pair(1, params), ConfigInvalid);
    params.gamma = 1.0;
    params.min_radius = -1.0;
    CHECK_THROWS_AS(generate_synthetic_pair(1, params), ConfigInvalid);
}

TEST_CASE("exact truth correspondences drive reported RMSE to 1e-6") {
    SceneParams params;
    params.size = 192;
    params.crater_count = 10;
    params.max_radius = 20.0;
    params.noise_sigma = 0.0;
    params.h_true = similarity_about_center(192.0, 6.0, 0.97, -4.0, 2.5);
    SyntheticPair pair = generate_synthetic_pair(31, params);

    MatchSet matches;
    matches.keypoints_a.resize(pair.src_points.size());
    matches.keypoints_b.resize(pair.ref_points.size());
    for (std::size_t i = 0; i < pair.src_points.size(); ++i) {
        matches.keypoints_a[i].x = pair.src_points[i].x();
        matches.keypoints_a[i].y = pair.src_points[i].y();
        matches.keypoints_b[i].x = pair.ref_points[i].x();
        matches.keypoints_b[i].y = pair.ref_points[i].y();
        matches.pairs.push_back({static_cast<int>(i), static_cast<int>(i), 0.0});
    }
    RansacResult est = ransac_homography(matches, RansacParams{});
    auto [rx, ry] = rmse_xy(pair.truth_control_points(est.h));
    CHECK(rx <= 1e-6);
    CHECK(ry <= 1e-6);
}

TEST_CASE("metric formatting keeps 4 decimals and strips trailing zeros") {
    CHECK(format_metric(0.62489) == "0.6249");
    CHECK(format_metric(0.5718) == "0.5718");
    CHECK(format_metric(3.809) == "3.809");
    CHECK(format_metric(3.8090) == "3.809");
    CHECK(format_metric(5.0) == "5");
    CHECK(format_metric(0.0) == "0");
    CHECK(format_metric(12.100049) == "12.1");
    CHECK(format_metric(-2.5) == "-2.5");
}

TEST_CASE("CSV header lists the five stage-time columns in order") {
    CHECK(report_csv_header() ==
          "algorithm,dataset,rmse_x,rmse_y,t_preprocess,t_detect,t_match,"
          "t_estimate,t_warp,t_total,n_kp_a,n_kp_b,n_matches,n_inliers,status");
}

TEST_CASE("stored reference row renders in the published layout") {
    RegistrationReport r;
    r.algorithm = "SuperGlue";
    r.dataset = "OHRC-NAC-EQ";
    r.rmse_x = 0.6249;
    r.rmse_y = 0.5718;
    r.total_time = 3.809;
    CHECK(summary_row(r) == "SuperGlue,OHRC-NAC-EQ,0.6249,0.5718,3.809");
}

TEST_CASE("failed cells print NA in CSV and null in JSON") {
    RegistrationReport r;
    r.algorithm = "sift";
    r.dataset = "synthetic-invert";
    r.stage_times.preprocess = 0.0123;
    r.stage_times.detect = 1.5;
    r.total_time = 1.5123;
    r.n_kp_a = 830;
    r.n_kp_b = 790;
    r.n_matches = 3;
    r.error = "NoModelFound";
    CHECK(r.status() == "failed");
    const std::string row = report_csv_row(r);
    CHECK(row ==
          "sift,synthetic-invert,NA,NA,0.0123,1.5,0,0,0,1.5123,830,790,3,0,failed");

    nlohmann::json j = report_to_json(r);
    CHECK(j["rmse_x"].is_null());
    CHECK(j["rmse_y"].is_null());
    CHECK(j["status"] == "failed");
    CHECK(j["error"] == "NoModelFound");
    CHECK(j["n_matches"] == 3);
}

TEST_CASE("ok cells round-trip all numeric columns through CSV") {
    RegistrationReport r;
    r.algorithm = "rift2";
    r.dataset = "synthetic-none";
    r.rmse_x = 0.73219;  // rounds to 0.7322
    r.rmse_y = 1.25;
    r.stage_times = {0.02, 2.345678, 0.11, 0.005, 0.0301};
    r.total_time = 2.5108;
    r.n_kp_a = 1200;
    r.n_kp_b = 1180;
    r.n_matches = 402;
    r.n_inliers = 377;
    CHECK(report_csv_row(r) ==
          "rift2,synthetic-none,0.7322,1.25,0.02,2.3457,0.11,0.005,0.0301,"
          "2.5108,1200,1180,402,377,ok");
    nlohmann::json j = report_to_json(r);
    CHECK(j["rmse_x"] == doctest::Approx(0.7322));
    CHECK(j["status"] == "ok");
    CHECK(j.count("error") == 0);
}

TEST_CASE("an empty report list still emits the header line") {
    CHECK(reports_to_csv({}) == report_csv_header() + "\n");
    CHECK(summary_table({}) == "algorithm,dataset,rmse_x,rmse_y,t_total\n");
}

TEST_CASE("csv fields containing delimiters are quoted") {
    RegistrationReport r;
    r.algorithm = "ext,csv";
    r.dataset = "a\"b";
    const std::string row = report_csv_row(r);
    CHECK(row.rfind("\"ext,csv\",\"a\"\"b\",NA,NA,", 0) == 0);
}

TEST_CASE("json mirror of several reports parses back with one entry each") {
    RegistrationReport ok;
    ok.algorithm = "akaze";
    ok.dataset = "d1";
    ok.rmse_x = 0.5;
    ok.rmse_y = 0.25;
    RegistrationReport bad;
    bad.algorithm = "sift";
    bad.dataset = "d2";
    const std::string text = reports_to_json_string({ok, bad});
    nlohmann::json arr = nlohmann::json::parse(text);
    REQUIRE(arr.is_array());
    REQUIRE(arr.size() == 2);
    CHECK(arr[0]["status"] == "ok");
    CHECK(arr[1]["status"] == "failed");
    CHECK(arr[1]["rmse_x"].is_null());
}

// Correspondence CSV exchange format and keypoint JSON-lines dump.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lunareg/core/error.hpp"
#include "lunareg/core/rng.hpp"
#include "lunareg/eval/synthetic.hpp"
#include "lunareg/features/exchange.hpp"
#include "lunareg/features/sift.hpp"
#include "lunareg/matching/matching.hpp"

#include "support.hpp"

using namespace lunareg;
using namespace lunareg::testsupport;

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

MatchSet random_matches(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    MatchSet m;
    for (int i = 0; i < n; ++i) {
        KeyPoint a, b;
        a.x = rng.next_uniform(0.0, 511.0);
        a.y = rng.next_uniform(0.0, 511.0);
        b.x = rng.next_uniform(0.0, 511.0);
        b.y = rng.next_uniform(0.0, 511.0);
        m.keypoints_a.push_back(a);
        m.keypoints_b.push_back(b);
        m.pairs.push_back({i, i, rng.next_double()});
    }
    return m;
}

}  // namespace

TEST_CASE("header-only file imports as an empty match set") {
    const auto path = scratch_file("exchange", "empty.csv");
    write_text(path, "x1,y1,x2,y2,score\n");
    const MatchSet m = import_external_matches(path);
    CHECK(m.empty());
    CHECK(m.keypoints_a.empty());
}

TEST_CASE("write then import is an exact round trip") {
    const MatchSet original = random_matches(57, 404);
    const auto path = scratch_file("exchange", "roundtrip.csv");
    write_matches(path, original);
    const MatchSet back = import_external_matches(path);

    REQUIRE(back.size() == original.size());
    for (int i = 0; i < original.size(); ++i) {
        CHECK(back.point_a(i).x() == original.point_a(i).x());
        CHECK(back.point_a(i).y() == original.point_a(i).y());
        CHECK(back.point_b(i).x() == original.point_b(i).x());
        CHECK(back.point_b(i).y() == original.point_b(i).y());
        CHECK(back.pairs[i].distance == original.pairs[i].distance);
    }
}

TEST_CASE("inlier column round-trips masks") {
    const MatchSet original = random_matches(20, 7);
    std::vector<std::uint8_t> mask(20);
    for (int i = 0; i < 20; ++i)
        mask[i] = static_cast<std::uint8_t>(i % 3 == 0);

    const auto path = scratch_file("exchange", "mask.csv");
    write_matches(path, original, &mask);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,y1,x2,y2,score,inlier");

    std::vector<std::uint8_t> back_mask;
    const MatchSet back = import_external_matches(path, std::nullopt, std::nullopt, &back_mask);
    CHECK(back.size() == original.size());
    CHECK(back_mask == mask);
}

TEST_CASE("record with three fields names its line") {
    const auto path = scratch_file("exchange", "short.csv");
    write_text(path, "x1,y1,x2,y2,score\n1.0,2.0,3.0,4.0,0.9\n5.0,6.0,7.0\n");
    CHECK_THROWS_AS(import_external_matches(path), MalformedRecord);
    try {
        import_external_matches(path);
    } catch (const MalformedRecord& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("non-numeric fields and bad headers are malformed") {
    const auto bad_field = scratch_file("exchange", "badfield.csv");
    write_text(bad_field, "x1,y1,x2,y2,score\n1.0,2.0,three,4.0,0.9\n");
    try {
        import_external_matches(bad_field);
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        CHECK(e.line == 2);
    }

    const auto bad_header = scratch_file("exchange", "badheader.csv");
    write_text(bad_header, "a,b,c,d,e\n");
    try {
        import_external_matches(bad_header);
        FAIL("expected MalformedRecord");
    } catch (const MalformedRecord& e) {
        CHECK(e.line == 1);
    }

    const auto no_header = scratch_file("exchange", "noheader.csv");
    write_text(no_header, "");
    CHECK_THROWS_AS(import_external_matches(no_header), MalformedRecord);

    CHECK_THROWS_AS(import_external_matches(scratch_file("exchange", "missing.csv")),
                    InputUnreadable);
}

TEST_CASE("bounds are enforced only when dimensions are supplied") {
    const auto path = scratch_file("exchange", "bounds.csv");
    write_text(path, "x1,y1,x2,y2,score\n100.5,50.25,90.0,40.0,0.8\n");

    CHECK(import_external_matches(path).size() == 1);
    CHECK(import_external_matches(path, ImageDims{128, 64}, ImageDims{128, 64}).size() == 1);

    try {
        import_external_matches(path, ImageDims{100, 64}, std::nullopt);
        FAIL("expected CoordinateOutOfBounds");
    } catch (const CoordinateOutOfBounds& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(import_external_matches(path, std::nullopt, ImageDims{128, 40}),
                    CoordinateOutOfBounds);
}

TEST_CASE("detector output round-trips through the exchange format") {
    SceneParams sp;
    sp.size = 160;
    sp.crater_count = 10;
    sp.min_radius = 5.0;
    sp.max_radius = 16.0;
    sp.noise_sigma = 1.0;
    const auto pair = generate_synthetic_pair(31, sp);
    const auto da = detect_sift(pair.source);
    const auto db = detect_sift(pair.reference);
    const MatchSet m = match_descriptors(da.keypoints, da.descriptors, db.keypoints,
                                         db.descriptors, 0.75, true);
    REQUIRE(m.size() >= 4);

    const auto path = scratch_file("exchange", "detector.csv");
    write_matches(path, m);
    const MatchSet back =
        import_external_matches(path, ImageDims{160, 160}, ImageDims{160, 160});
    REQUIRE(back.size() == m.size());
    for (int i = 0; i < m.size(); ++i) {
        CHECK(back.point_a(i) == m.point_a(i));
        CHECK(back.point_b(i) == m.point_b(i));
        CHECK(back.pairs[i].distance == m.pairs[i].distance);
    }
}

TEST_CASE("keypoint dump emits one parseable json object per line") {
    SceneParams sp;
    sp.size = 128;
    sp.crater_count = 8;
    sp.min_radius = 5.0;
    sp.max_radius = 12.0;
    sp.noise_sigma = 0.0;
    const auto pair = generate_synthetic_pair(12, sp);
    const auto det = detect_sift(pair.reference);
    REQUIRE(!det.keypoints.empty());

    const auto path = scratch_file("exchange", "keypoints.jsonl");
    write_keypoints(path, det.keypoints, &det.descriptors);

    std::ifstream in(path);
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        const auto obj = nlohmann::json::parse(line);
        CHECK(obj.contains("x"));
        CHECK(obj.contains("y"));
        CHECK(obj.contains("scale"));
        CHECK(obj.contains("orientation"));
        CHECK(obj.contains("response"));
        REQUIRE(obj.contains("descriptor"));
        CHECK(obj["descriptor"].size() == 128);
        if (rows == 0) {
            CHECK(obj["x"].get<double>() == det.keypoints[0].x);
            CHECK(obj["y"].get<double>() == det.keypoints[0].y);
        }
        ++rows;
    }
    CHECK(rows == static_cast<int>(det.keypoints.size()));
}

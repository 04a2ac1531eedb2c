#include "lunareg/features/exchange.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lunareg/core/error.hpp"

namespace lunareg {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, int line) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw MalformedRecord(line);
    return value;
}

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void check_bounds(double x, double y, const std::optional<ImageDims>& dims, int line) {
    if (!dims)
        return;
    if (x < 0.0 || y < 0.0 || x >= dims->width || y >= dims->height)
        throw CoordinateOutOfBounds(line);
}

}  // namespace

MatchSet import_external_matches(const std::filesystem::path& path,
                                 std::optional<ImageDims> dims_a,
                                 std::optional<ImageDims> dims_b,
                                 std::vector<std::uint8_t>* inlier_mask) {
    std::ifstream in(path);
    if (!in)
        throw InputUnreadable(path.string());

    std::string line;
    if (!std::getline(in, line))
        throw MalformedRecord(1);
    const auto header = split_csv(line);
    bool has_inlier = false;
    if (header == std::vector<std::string>{"x1", "y1", "x2", "y2", "score"}) {
        has_inlier = false;
    } else if (header ==
               std::vector<std::string>{"x1", "y1", "x2", "y2", "score", "inlier"}) {
        has_inlier = true;
    } else {
        throw MalformedRecord(1);
    }

    MatchSet out;
    if (inlier_mask)
        inlier_mask->clear();
    const std::size_t expected = has_inlier ? 6 : 5;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;  // tolerate a trailing newline
        const auto fields = split_csv(line);
        if (fields.size() != expected)
            throw MalformedRecord(line_no);
        const double x1 = parse_double(fields[0], line_no);
        const double y1 = parse_double(fields[1], line_no);
        const double x2 = parse_double(fields[2], line_no);
        const double y2 = parse_double(fields[3], line_no);
        const double score = parse_double(fields[4], line_no);
        check_bounds(x1, y1, dims_a, line_no);
        check_bounds(x2, y2, dims_b, line_no);
        if (has_inlier) {
            if (fields[5] != "0" && fields[5] != "1")
                throw MalformedRecord(line_no);
            if (inlier_mask)
                inlier_mask->push_back(fields[5] == "1" ? 1 : 0);
        }

        const int idx = static_cast<int>(out.keypoints_a.size());
        KeyPoint a, b;
        a.x = x1;
        a.y = y1;
        b.x = x2;
        b.y = y2;
        out.keypoints_a.push_back(a);
        out.keypoints_b.push_back(b);
        out.pairs.push_back({idx, idx, score});
    }
    return out;
}

void write_matches(const std::filesystem::path& path, const MatchSet& matches,
                   const std::vector<std::uint8_t>* inlier_mask) {
    if (inlier_mask && inlier_mask->size() != matches.pairs.size())
        throw DimensionMismatch("inlier mask length differs from match count");

    std::ofstream out(path);
    if (!out)
        throw InputUnreadable(path.string());
    out << "x1,y1,x2,y2,score";
    if (inlier_mask)
        out << ",inlier";
    out << '\n';
    for (std::size_t i = 0; i < matches.pairs.size(); ++i) {
        const Eigen::Vector2d a = matches.point_a(static_cast<int>(i));
        const Eigen::Vector2d b = matches.point_b(static_cast<int>(i));
        out << format_double(a.x()) << ',' << format_double(a.y()) << ','
            << format_double(b.x()) << ',' << format_double(b.y()) << ','
            << format_double(matches.pairs[i].distance);
        if (inlier_mask)
            out << ',' << ((*inlier_mask)[i] ? '1' : '0');
        out << '\n';
    }
}

void write_keypoints(const std::filesystem::path& path, const KeyPointSet& keypoints,
                     const DescriptorSet* descriptors) {
    if (descriptors && descriptors->rows() != static_cast<int>(keypoints.size()))
        throw DimensionMismatch("descriptor row count differs from keypoint count");

    std::ofstream out(path);
    if (!out)
        throw InputUnreadable(path.string());
    for (std::size_t i = 0; i < keypoints.size(); ++i) {
        const KeyPoint& kp = keypoints[i];
        nlohmann::json obj = {{"x", kp.x},
                              {"y", kp.y},
                              {"scale", kp.scale},
                              {"orientation", kp.orientation},
                              {"response", kp.response}};
        if (descriptors) {
            if (descriptors->is_binary()) {
                std::vector<std::uint64_t> words(
                    descriptors->bit_row(static_cast<int>(i)),
                    descriptors->bit_row(static_cast<int>(i)) +
                        descriptors->words_per_row());
                obj["descriptor_bits"] = words;
            } else {
                std::vector<float> row(
                    descriptors->float_row(static_cast<int>(i)),
                    descriptors->float_row(static_cast<int>(i)) + descriptors->dim);
                obj["descriptor"] = row;
            }
        }
        out << obj.dump() << '\n';
    }
}

}  // namespace lunareg

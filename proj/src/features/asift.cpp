#include "lunareg/features/asift.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "lunareg/core/error.hpp"

namespace lunareg {

namespace {

constexpr double kPi = 3.14159265358979323846;

float sample_or_zero(const ImageF& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    if (x0 < -1 || y0 < -1 || x0 > img.width() - 1 || y0 > img.height() - 1)
        return 0.0f;
    const double fx = x - x0, fy = y - y0;
    auto px = [&](int xi, int yi) -> double {
        if (xi < 0 || yi < 0 || xi >= img.width() || yi >= img.height())
            return 0.0;
        return img.at(xi, yi);
    };
    return static_cast<float>((1 - fx) * (1 - fy) * px(x0, y0) +
                              fx * (1 - fy) * px(x0 + 1, y0) +
                              (1 - fx) * fy * px(x0, y0 + 1) +
                              fx * fy * px(x0 + 1, y0 + 1));
}

/// Rotates about the image center onto an expanded canvas (zero fill).
/// On return `shift` satisfies p_rot = R * (p_orig - center) + shift.
ImageF rotate_expand(const ImageF& img, const Eigen::Matrix2d& rot,
                     Eigen::Vector2d& shift) {
    const double w = img.width(), h = img.height();
    const Eigen::Vector2d center((w - 1) / 2.0, (h - 1) / 2.0);
    double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
    const Eigen::Vector2d corners[4] = {{0, 0}, {w - 1, 0}, {0, h - 1}, {w - 1, h - 1}};
    for (int i = 0; i < 4; ++i) {
        const Eigen::Vector2d p = rot * (corners[i] - center);
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    const int rw = static_cast<int>(std::ceil(max_x - min_x)) + 1;
    const int rh = static_cast<int>(std::ceil(max_y - min_y)) + 1;
    shift = {-min_x, -min_y};

    ImageF out(rw, rh);
    const Eigen::Matrix2d inv = rot.transpose();
    for (int y = 0; y < rh; ++y)
        for (int x = 0; x < rw; ++x) {
            const Eigen::Vector2d p = inv * (Eigen::Vector2d(x, y) - shift) + center;
            out.at(x, y) = sample_or_zero(img, p.x(), p.y());
        }
    return out;
}

/// 1D Gaussian blur along x with replicated borders (tilt anti-aliasing).
ImageF blur_x(const ImageF& img, double sigma) {
    if (sigma <= 0.0)
        return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel)
        k /= sum;

    ImageF out(img.width(), img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xi = std::clamp(x + i, 0, img.width() - 1);
                acc += kernel[i + radius] * img.at(xi, y);
            }
            out.at(x, y) = static_cast<float>(acc);
        }
    return out;
}

/// Compresses x by 1/t: view(x, y) = img(x * t, y), linear along x.
ImageF subsample_x(const ImageF& img, double t) {
    const int vw = static_cast<int>(std::floor((img.width() - 1) / t)) + 1;
    ImageF out(vw, img.height());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < vw; ++x) {
            const double xs = x * t;
            const int x0 = std::min(static_cast<int>(xs), img.width() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double f = xs - x0;
            out.at(x, y) = static_cast<float>((1 - f) * img.at(x0, y) + f * img.at(x1, y));
        }
    return out;
}

struct RawMatch {
    double xa, ya, xb, yb;
    KeyPoint kp_a, kp_b;
    double distance;
};

}  // namespace

void AsiftParams::validate() const {
    if (tilt_levels < 1 || tilt_levels > 6)
        throw ConfigInvalid("tilt_levels", "must be in [1, 6]");
    if (ratio <= 0.0 || ratio >= 1.0)
        throw ConfigInvalid("ratio", "must be in (0, 1)");
    sift.validate();
}

std::vector<std::pair<ImageF, AffineView>> simulate_affine_views(const ImageF& img,
                                                                 int tilt_levels) {
    if (tilt_levels < 1 || tilt_levels > 6)
        throw ConfigInvalid("tilt_levels", "must be in [1, 6]");

    std::vector<std::pair<ImageF, AffineView>> views;
    views.emplace_back(img, AffineView{});

    const Eigen::Vector2d center((img.width() - 1) / 2.0, (img.height() - 1) / 2.0);
    for (int k = 1; k < tilt_levels; ++k) {
        const double t = std::pow(std::sqrt(2.0), k);
        const double step_deg = 72.0 / t;
        const int n_rot = static_cast<int>(std::ceil(360.0 / step_deg));
        for (int i = 0; i < n_rot; ++i) {
            const double phi = i * step_deg * kPi / 180.0;
            Eigen::Matrix2d rot;
            rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);

            Eigen::Vector2d shift;
            ImageF rotated = rotate_expand(img, rot, shift);
            rotated = blur_x(rotated, 0.8 * std::sqrt(t * t - 1.0));
            ImageF view = subsample_x(rotated, t);

            AffineView av;
            av.tilt = t;
            av.rotation = phi;
            // p_orig = R^T * (diag(t,1) * p_view - shift) + center
            const Eigen::Matrix2d inv = rot.transpose();
            Eigen::Matrix2d m = inv;
            m.col(0) *= t;
            av.view_to_original.block<2, 2>(0, 0) = m;
            av.view_to_original.col(2) = center - inv * shift;
            views.emplace_back(std::move(view), av);
        }
    }
    return views;
}

AsiftDetection asift_detect(const GeoRaster& img, const AsiftParams& params) {
    return asift_detect(gray_unit(img), params);
}

AsiftDetection asift_detect(const ImageF& img, const AsiftParams& params) {
    params.validate();
    if (std::min(img.width(), img.height()) < 32)
        throw ImageTooSmall(32);

    AsiftDetection out;
    out.width = img.width();
    out.height = img.height();
    // Detect once per view; simulated views too small for SIFT are skipped.
    for (auto& [view, av] : simulate_affine_views(img, params.tilt_levels)) {
        out.views.push_back(av);
        out.detections.emplace_back();
        if (std::min(view.width(), view.height()) >= 32)
            out.detections.back() = detect_sift(view, params.sift);
    }
    return out;
}

MatchSet asift_match(const GeoRaster& a, const GeoRaster& b, const AsiftParams& params) {
    return asift_match(gray_unit(a), gray_unit(b), params);
}

MatchSet asift_match(const ImageF& a, const ImageF& b, const AsiftParams& params) {
    return asift_match_views(asift_detect(a, params), asift_detect(b, params), params);
}

MatchSet asift_match_views(const AsiftDetection& a, const AsiftDetection& b,
                           const AsiftParams& params) {
    params.validate();
    const auto& det_a = a.detections;
    const auto& det_b = b.detections;

    // Degenerate single-view case: identical to plain SIFT matching.
    if (a.views.size() == 1 && b.views.size() == 1)
        return match_descriptors(det_a[0].keypoints, det_a[0].descriptors,
                                 det_b[0].keypoints, det_b[0].descriptors, params.ratio,
                                 true);

    std::vector<RawMatch> raw;
    for (std::size_t i = 0; i < a.views.size(); ++i) {
        if (det_a[i].keypoints.empty())
            continue;
        for (std::size_t j = 0; j < b.views.size(); ++j) {
            if (det_b[j].keypoints.empty())
                continue;
            const MatchSet m =
                match_descriptors(det_a[i].keypoints, det_a[i].descriptors,
                                  det_b[j].keypoints, det_b[j].descriptors, params.ratio,
                                  true);
            for (const Match& pm : m.pairs) {
                const KeyPoint& va = det_a[i].keypoints[pm.index_a];
                const KeyPoint& vb = det_b[j].keypoints[pm.index_b];
                const Eigen::Vector2d pa = a.views[i].to_original({va.x, va.y});
                const Eigen::Vector2d pb = b.views[j].to_original({vb.x, vb.y});
                if (pa.x() < 0 || pa.y() < 0 || pa.x() > a.width - 1 ||
                    pa.y() > a.height - 1)
                    continue;
                if (pb.x() < 0 || pb.y() < 0 || pb.x() > b.width - 1 ||
                    pb.y() > b.height - 1)
                    continue;
                RawMatch r;
                r.xa = pa.x();
                r.ya = pa.y();
                r.xb = pb.x();
                r.yb = pb.y();
                r.kp_a = va;
                r.kp_a.x = pa.x();
                r.kp_a.y = pa.y();
                r.kp_b = vb;
                r.kp_b.x = pb.x();
                r.kp_b.y = pb.y();
                r.distance = pm.distance;
                raw.push_back(r);
            }
        }
    }

    std::sort(raw.begin(), raw.end(), [](const RawMatch& l, const RawMatch& r) {
        if (l.distance != r.distance)
            return l.distance < r.distance;
        if (l.ya != r.ya)
            return l.ya < r.ya;
        if (l.xa != r.xa)
            return l.xa < r.xa;
        if (l.yb != r.yb)
            return l.yb < r.yb;
        return l.xb < r.xb;
    });

    // Greedy dedup, best distance first: a correspondence within 1 px of an
    // accepted one on BOTH sides is a duplicate. Spatial hash on side A.
    MatchSet out;
    std::unordered_map<std::int64_t, std::vector<int>> grid;
    auto cell_key = [](int cx, int cy) {
        return (static_cast<std::int64_t>(cx) << 32) ^ static_cast<std::uint32_t>(cy);
    };
    for (const RawMatch& r : raw) {
        const int cx = static_cast<int>(std::floor(r.xa));
        const int cy = static_cast<int>(std::floor(r.ya));
        bool duplicate = false;
        for (int dy = -1; dy <= 1 && !duplicate; ++dy)
            for (int dx = -1; dx <= 1 && !duplicate; ++dx) {
                const auto it = grid.find(cell_key(cx + dx, cy + dy));
                if (it == grid.end())
                    continue;
                for (const int idx : it->second) {
                    const KeyPoint& ka = out.keypoints_a[idx];
                    const KeyPoint& kb = out.keypoints_b[idx];
                    if (std::hypot(r.xa - ka.x, r.ya - ka.y) <= 1.0 &&
                        std::hypot(r.xb - kb.x, r.yb - kb.y) <= 1.0) {
                        duplicate = true;
                        break;
                    }
                }
            }
        if (duplicate)
            continue;
        const int idx = static_cast<int>(out.keypoints_a.size());
        out.keypoints_a.push_back(r.kp_a);
        out.keypoints_b.push_back(r.kp_b);
        out.pairs.push_back({idx, idx, r.distance});
        grid[cell_key(cx, cy)].push_back(idx);
    }
    return out;
}

}  // namespace lunareg

#include "lunareg/features/sift.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace lunareg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr int kBorder = 5;          ///< extrema excluded this close to the edge
constexpr int kMaxRefineSteps = 5;
constexpr double kAssumedBlur = 0.5;  ///< blur attributed to the raw input
constexpr int kOriBins = 36;
constexpr double kOriSigmaFactor = 1.5;
constexpr double kOriPeakRatio = 0.8;
constexpr int kDescWidth = 4;       ///< 4x4 spatial grid
constexpr int kDescBins = 8;        ///< orientation bins per cell
constexpr double kDescSigmaFactor = 3.0;
constexpr double kDescClip = 0.2;

struct Pyramid {
    // gauss[o][l]: level l has blur sigma * 2^(l / s) relative to octave o.
    std::vector<std::vector<ImageF>> gauss;
    std::vector<std::vector<ImageF>> dog;
};

Pyramid build_pyramid(const ImageF& base, const SiftParams& p) {
    const int s = p.scales_per_octave;
    const int levels = s + 3;

    std::vector<double> inc(levels);  // incremental blur level l-1 -> l
    inc[0] = 0.0;
    for (int l = 1; l < levels; ++l) {
        const double prev = p.sigma * std::pow(2.0, (l - 1) / static_cast<double>(s));
        const double cur = p.sigma * std::pow(2.0, l / static_cast<double>(s));
        inc[l] = std::sqrt(cur * cur - prev * prev);
    }

    Pyramid pyr;
    for (int o = 0; o < p.octaves; ++o) {
        std::vector<ImageF> levels_img;
        levels_img.reserve(levels);
        if (o == 0) {
            const double d = std::sqrt(
                std::max(0.01, p.sigma * p.sigma - kAssumedBlur * kAssumedBlur));
            levels_img.push_back(gaussian_blur(base, d));
        } else {
            // Level s of the previous octave carries blur 2*sigma, i.e. sigma
            // after decimation.
            levels_img.push_back(half_sample(pyr.gauss[o - 1][s]));
        }
        for (int l = 1; l < levels; ++l)
            levels_img.push_back(gaussian_blur(levels_img[l - 1], inc[l]));

        std::vector<ImageF> dogs;
        dogs.reserve(levels - 1);
        for (int l = 0; l + 1 < levels; ++l) {
            ImageF d(levels_img[l].width(), levels_img[l].height());
            for (int i = 0; i < d.width() * d.height(); ++i)
                d.data()[i] = levels_img[l + 1].data()[i] - levels_img[l].data()[i];
            dogs.push_back(std::move(d));
        }
        pyr.gauss.push_back(std::move(levels_img));
        pyr.dog.push_back(std::move(dogs));

        if (pyr.gauss.back()[0].width() / 2 < 2 * kBorder + 3 ||
            pyr.gauss.back()[0].height() / 2 < 2 * kBorder + 3)
            break;  // next octave would be too small to host extrema
    }
    return pyr;
}

bool is_extremum(const std::vector<ImageF>& dog, int l, int x, int y) {
    const float v = dog[l].at(x, y);
    const bool pos = v > 0.0f;
    for (int dl = -1; dl <= 1; ++dl)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dl == 0 && dy == 0 && dx == 0)
                    continue;
                const float n = dog[l + dl].at(x + dx, y + dy);
                if (pos ? (v <= n) : (v >= n))
                    return false;
            }
    return true;
}

struct Refined {
    double x, y, level;    ///< sub-pixel octave coordinates + fractional level
    double contrast;
    int ix, iy, il;        ///< final integer location
    bool ok = false;
};

Refined refine_extremum(const std::vector<ImageF>& dog, int l0, int x0, int y0,
                        const SiftParams& p) {
    Refined r;
    int x = x0, y = y0, l = l0;
    const int n_dog = static_cast<int>(dog.size());
    Eigen::Vector3d delta = Eigen::Vector3d::Zero();
    Eigen::Vector3d g;

    for (int step = 0; step < kMaxRefineSteps; ++step) {
        const ImageF& d0 = dog[l - 1];
        const ImageF& d1 = dog[l];
        const ImageF& d2 = dog[l + 1];

        g << 0.5 * (d1.at(x + 1, y) - d1.at(x - 1, y)),
             0.5 * (d1.at(x, y + 1) - d1.at(x, y - 1)),
             0.5 * (d2.at(x, y) - d0.at(x, y));

        const double v = d1.at(x, y);
        Eigen::Matrix3d h;
        h(0, 0) = d1.at(x + 1, y) + d1.at(x - 1, y) - 2.0 * v;
        h(1, 1) = d1.at(x, y + 1) + d1.at(x, y - 1) - 2.0 * v;
        h(2, 2) = d2.at(x, y) + d0.at(x, y) - 2.0 * v;
        h(0, 1) = h(1, 0) = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) -
                                    d1.at(x + 1, y - 1) + d1.at(x - 1, y - 1));
        h(0, 2) = h(2, 0) = 0.25 * (d2.at(x + 1, y) - d2.at(x - 1, y) -
                                    d0.at(x + 1, y) + d0.at(x - 1, y));
        h(1, 2) = h(2, 1) = 0.25 * (d2.at(x, y + 1) - d2.at(x, y - 1) -
                                    d0.at(x, y + 1) + d0.at(x, y - 1));

        const double det = h.determinant();
        if (std::abs(det) < 1e-30)
            return r;
        delta = -h.inverse() * g;

        if (std::abs(delta.x()) < 0.5 && std::abs(delta.y()) < 0.5 &&
            std::abs(delta.z()) < 0.5)
            break;
        x += static_cast<int>(std::lround(delta.x()));
        y += static_cast<int>(std::lround(delta.y()));
        l += static_cast<int>(std::lround(delta.z()));
        if (l < 1 || l > n_dog - 2 || x < kBorder || x >= d1.width() - kBorder ||
            y < kBorder || y >= d1.height() - kBorder)
            return r;
        if (step == kMaxRefineSteps - 1)
            return r;  // did not converge
    }

    // Layer-normalized contrast test: comparing |D| * s against the
    // threshold keeps the cut consistent as scales_per_octave changes.
    const int s = n_dog - 2;
    const double contrast = dog[l].at(x, y) + 0.5 * g.dot(delta);
    if (std::abs(contrast) * s < p.contrast_threshold)
        return r;

    // Edge rejection on the 2x2 spatial Hessian.
    const ImageF& d1 = dog[l];
    const double v = d1.at(x, y);
    const double dxx = d1.at(x + 1, y) + d1.at(x - 1, y) - 2.0 * v;
    const double dyy = d1.at(x, y + 1) + d1.at(x, y - 1) - 2.0 * v;
    const double dxy = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) -
                               d1.at(x + 1, y - 1) + d1.at(x - 1, y - 1));
    const double tr = dxx + dyy;
    const double det = dxx * dyy - dxy * dxy;
    const double er = p.edge_ratio;
    if (det <= 0.0 || tr * tr * er >= (er + 1.0) * (er + 1.0) * det)
        return r;

    r.x = x + delta.x();
    r.y = y + delta.y();
    r.level = l + delta.z();
    r.contrast = contrast;
    r.ix = x;
    r.iy = y;
    r.il = l;
    r.ok = true;
    return r;
}

/// Gradient-orientation histogram around (x, y); returns up to kOriBins peak
/// orientations in [0, 2pi).
std::vector<double> dominant_orientations(const ImageF& img, double x, double y,
                                          double sigma_rel) {
    const double sigma_w = kOriSigmaFactor * sigma_rel;
    const int radius = static_cast<int>(std::lround(3.0 * sigma_w));
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));

    double hist[kOriBins] = {0.0};
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const int px = cx + dx, py = cy + dy;
            if (px < 1 || px >= img.width() - 1 || py < 1 || py >= img.height() - 1)
                continue;
            const double gx = img.at(px + 1, py) - img.at(px - 1, py);
            const double gy = img.at(px, py + 1) - img.at(px, py - 1);
            const double mag = std::hypot(gx, gy);
            double ang = std::atan2(gy, gx);
            if (ang < 0.0)
                ang += kTwoPi;
            const double w =
                std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_w * sigma_w));
            int bin = static_cast<int>(ang / kTwoPi * kOriBins) % kOriBins;
            hist[bin] += w * mag;
        }

    // Two passes of circular [1 2 1]/4 smoothing.
    for (int pass = 0; pass < 2; ++pass) {
        double smoothed[kOriBins];
        for (int i = 0; i < kOriBins; ++i)
            smoothed[i] = 0.25 * hist[(i + kOriBins - 1) % kOriBins] +
                          0.5 * hist[i] + 0.25 * hist[(i + 1) % kOriBins];
        std::copy(smoothed, smoothed + kOriBins, hist);
    }

    const double peak = *std::max_element(hist, hist + kOriBins);
    std::vector<double> out;
    if (peak <= 0.0)
        return out;
    for (int i = 0; i < kOriBins; ++i) {
        const double l = hist[(i + kOriBins - 1) % kOriBins];
        const double c = hist[i];
        const double rr = hist[(i + 1) % kOriBins];
        if (c >= kOriPeakRatio * peak && c > l && c > rr) {
            // Parabolic peak interpolation.
            const double offset = 0.5 * (l - rr) / (l - 2.0 * c + rr);
            double ang = (i + 0.5 + offset) / kOriBins * kTwoPi;
            ang = std::fmod(ang, kTwoPi);
            if (ang < 0.0)
                ang += kTwoPi;
            out.push_back(ang);
        }
    }
    return out;
}

/// 4x4 x 8 gradient histogram in the keypoint's rotated, scale-normalized
/// frame; trilinear soft binning, Gaussian spatial weighting.
std::vector<float> describe(const ImageF& img, double x, double y, double sigma_rel,
                            double orientation) {
    const int dim = kDescWidth * kDescWidth * kDescBins;
    const double cell = kDescSigmaFactor * sigma_rel;  // pixels per grid cell
    const double radius = cell * std::sqrt(2.0) * (kDescWidth + 1) * 0.5;
    const int r = std::min(static_cast<int>(std::lround(radius)),
                           std::max(img.width(), img.height()));
    const double cos_t = std::cos(-orientation);
    const double sin_t = std::sin(-orientation);
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));

    std::vector<double> acc(dim, 0.0);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            const int px = cx + dx, py = cy + dy;
            if (px < 1 || px >= img.width() - 1 || py < 1 || py >= img.height() - 1)
                continue;
            // Rotate the offset into the keypoint frame, in cell units.
            const double rx = (cos_t * dx - sin_t * dy) / cell;
            const double ry = (sin_t * dx + cos_t * dy) / cell;
            const double row = ry + kDescWidth / 2.0 - 0.5;
            const double col = rx + kDescWidth / 2.0 - 0.5;
            if (row <= -1.0 || row >= kDescWidth || col <= -1.0 || col >= kDescWidth)
                continue;

            const double gx = img.at(px + 1, py) - img.at(px - 1, py);
            const double gy = img.at(px, py + 1) - img.at(px, py - 1);
            const double mag = std::hypot(gx, gy);
            // Gradient direction relative to the keypoint frame.
            double ang = std::atan2(gy, gx) - orientation;
            ang = std::fmod(ang, kTwoPi);
            if (ang < 0.0)
                ang += kTwoPi;
            double obin = ang / kTwoPi * kDescBins;
            if (obin >= kDescBins)
                obin -= kDescBins;

            const double w = std::exp(-(rx * rx + ry * ry) /
                                      (2.0 * (0.5 * kDescWidth) * (0.5 * kDescWidth)));

            const int r0 = static_cast<int>(std::floor(row));
            const int c0 = static_cast<int>(std::floor(col));
            const int o0 = static_cast<int>(std::floor(obin));
            const double fr = row - r0, fc = col - c0, fo = obin - o0;
            for (int ir = 0; ir <= 1; ++ir) {
                const int rr = r0 + ir;
                if (rr < 0 || rr >= kDescWidth)
                    continue;
                const double wr = w * mag * (ir ? fr : 1.0 - fr);
                for (int ic = 0; ic <= 1; ++ic) {
                    const int cc = c0 + ic;
                    if (cc < 0 || cc >= kDescWidth)
                        continue;
                    const double wc = wr * (ic ? fc : 1.0 - fc);
                    for (int io = 0; io <= 1; ++io) {
                        const int oo = (o0 + io) % kDescBins;
                        acc[(rr * kDescWidth + cc) * kDescBins + oo] +=
                            wc * (io ? fo : 1.0 - fo);
                    }
                }
            }
        }

    // Normalize, clip, renormalize.
    double norm = 0.0;
    for (double v : acc)
        norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12)
        return {};  // gradient-free patch: caller drops the keypoint
    for (double& v : acc)
        v = std::min(v / norm, kDescClip);
    norm = 0.0;
    for (double v : acc)
        norm += v * v;
    norm = std::sqrt(norm);
    std::vector<float> out(dim);
    for (int i = 0; i < dim; ++i)
        out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

}  // namespace

void SiftParams::validate() const {
    if (octaves < 1)
        throw ConfigInvalid("octaves", "must be >= 1");
    if (scales_per_octave < 1)
        throw ConfigInvalid("scales_per_octave", "must be >= 1");
    if (contrast_threshold <= 0.0)
        throw ConfigInvalid("contrast_threshold", "must be positive");
    if (edge_ratio < 1.0)
        throw ConfigInvalid("edge_ratio", "must be >= 1");
    if (max_features < 1)
        throw ConfigInvalid("max_features", "must be >= 1");
    if (sigma <= 0.0)
        throw ConfigInvalid("sigma", "must be positive");
}

ImageF gray_unit(const GeoRaster& img) {
    const double hi = depth_max_value(img.depth);
    ImageF out(img.width(), img.height());
    for (int i = 0; i < out.width() * out.height(); ++i)
        out.data()[i] = static_cast<float>(img.band(0).data()[i] / hi);
    return out;
}

DetectionResult detect_sift(const GeoRaster& img, const SiftParams& params) {
    return detect_sift(gray_unit(img), params);
}

DetectionResult detect_sift(const ImageF& gray, const SiftParams& params) {
    params.validate();
    if (std::min(gray.width(), gray.height()) < 32)
        throw ImageTooSmall(32);

    const int s = params.scales_per_octave;
    const Pyramid pyr = build_pyramid(gray, params);

    struct Candidate {
        KeyPoint kp;
        int octave, level;
        double ox, oy;  ///< octave coordinates
    };
    std::vector<Candidate> cands;

    for (int o = 0; o < static_cast<int>(pyr.dog.size()); ++o) {
        const std::vector<ImageF>& dog = pyr.dog[o];
        const int w = dog[0].width(), h = dog[0].height();
        const double scale_up = std::pow(2.0, o);
        const float prefilter =
            static_cast<float>(0.5 * params.contrast_threshold / s);

        for (int l = 1; l <= s; ++l)
            for (int y = kBorder; y < h - kBorder; ++y)
                for (int x = kBorder; x < w - kBorder; ++x) {
                    if (std::abs(dog[l].at(x, y)) < prefilter)
                        continue;
                    if (!is_extremum(dog, l, x, y))
                        continue;
                    const Refined ref = refine_extremum(dog, l, x, y, params);
                    if (!ref.ok)
                        continue;

                    const double sigma_rel =
                        params.sigma * std::pow(2.0, ref.level / s);
                    Candidate c;
                    c.kp.x = ref.x * scale_up;
                    c.kp.y = ref.y * scale_up;
                    c.kp.scale = sigma_rel * scale_up;
                    c.kp.response = std::abs(ref.contrast);
                    c.octave = o;
                    c.level = ref.il;
                    c.ox = ref.x;
                    c.oy = ref.y;
                    if (c.kp.x < 0.0 || c.kp.x >= gray.width() || c.kp.y < 0.0 ||
                        c.kp.y >= gray.height())
                        continue;
                    cands.push_back(c);
                }
    }

    // Strongest responses first; deterministic tie-breaking.
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.kp.response != b.kp.response)
            return a.kp.response > b.kp.response;
        if (a.kp.y != b.kp.y)
            return a.kp.y < b.kp.y;
        if (a.kp.x != b.kp.x)
            return a.kp.x < b.kp.x;
        return a.kp.scale < b.kp.scale;
    });

    DetectionResult out;
    out.descriptors.kind = DescriptorKind::FloatL2;
    out.descriptors.dim = kDescWidth * kDescWidth * kDescBins;

    for (const Candidate& c : cands) {
        if (static_cast<int>(out.keypoints.size()) >= params.max_features)
            break;
        const ImageF& img = pyr.gauss[c.octave][c.level];
        const double sigma_rel = c.kp.scale / std::pow(2.0, c.octave);
        for (double ang : dominant_orientations(img, c.ox, c.oy, sigma_rel)) {
            if (static_cast<int>(out.keypoints.size()) >= params.max_features)
                break;
            const std::vector<float> desc = describe(img, c.ox, c.oy, sigma_rel, ang);
            if (desc.empty())
                continue;
            KeyPoint kp = c.kp;
            kp.orientation = ang;
            out.keypoints.push_back(kp);
            out.descriptors.floats.insert(out.descriptors.floats.end(), desc.begin(),
                                          desc.end());
        }
    }
    return out;
}

}  // namespace lunareg

#include "lunareg/features/rift2.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lunareg/core/error.hpp"

namespace lunareg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr int kSectors = 6;             ///< angular sectors per ring
constexpr float kMinResponse = 0.1f;    ///< phase congruency floor for maxima

struct Candidate {
    double x, y;
    float response;
};

/// 2D quadratic refinement of a local maximum; falls back to the integer
/// position when the fitted offset is implausible.
void refine(const ImageF& map, int ix, int iy, double& x, double& y) {
    const double dx = 0.5 * (map.at(ix + 1, iy) - map.at(ix - 1, iy));
    const double dy = 0.5 * (map.at(ix, iy + 1) - map.at(ix, iy - 1));
    const double dxx = map.at(ix + 1, iy) - 2.0 * map.at(ix, iy) + map.at(ix - 1, iy);
    const double dyy = map.at(ix, iy + 1) - 2.0 * map.at(ix, iy) + map.at(ix, iy - 1);
    const double dxy = 0.25 * (map.at(ix + 1, iy + 1) - map.at(ix - 1, iy + 1) -
                               map.at(ix + 1, iy - 1) + map.at(ix - 1, iy - 1));
    const double det = dxx * dyy - dxy * dxy;
    x = ix;
    y = iy;
    if (std::abs(det) < 1e-12)
        return;
    const double ox = -(dyy * dx - dxy * dy) / det;
    const double oy = -(dxx * dy - dxy * dx) / det;
    if (std::abs(ox) <= 1.0 && std::abs(oy) <= 1.0) {
        x = ix + ox;
        y = iy + oy;
    }
}

}  // namespace

void Rift2Params::validate() const {
    pc.validate();
    if (max_keypoints < 1)
        throw ConfigInvalid("max_keypoints", "must be >= 1");
    if (patch_radius < 4)
        throw ConfigInvalid("patch_radius", "must be >= 4");
    if (descriptor_rings < 1 || descriptor_rings > 8)
        throw ConfigInvalid("descriptor_rings", "must be in [1, 8]");
}

DetectionResult detect_rift2(const GeoRaster& img, const Rift2Params& params) {
    return detect_rift2(gray_unit(img), params);
}

DetectionResult detect_rift2(const ImageF& gray, const Rift2Params& params) {
    params.validate();
    const PhaseCongruencyResult pc = phase_congruency(gray, params.pc);
    const ImageF& map = pc.pc_map;
    const int w = map.width(), h = map.height();
    const int n_orient = params.pc.n_orientations;

    // Strict 3x3 local maxima of the phase congruency map.
    std::vector<Candidate> candidates;
    for (int y = 2; y < h - 2; ++y)
        for (int x = 2; x < w - 2; ++x) {
            const float v = map.at(x, y);
            if (v < kMinResponse)
                continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0)
                        continue;
                    if (map.at(x + dx, y + dy) >= v) {
                        is_max = false;
                        break;
                    }
                }
            if (!is_max)
                continue;
            Candidate c;
            refine(map, x, y, c.x, c.y);
            c.response = v;
            candidates.push_back(c);
        }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.response != b.response)
            return a.response > b.response;
        if (a.y != b.y)
            return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(candidates.size()) > params.max_keypoints)
        candidates.resize(params.max_keypoints);

    const int radius = params.patch_radius;
    const int rings = params.descriptor_rings;
    const int dim = rings * kSectors * n_orient;
    const double log_norm = std::log(radius + 1.0);

    DetectionResult result;
    result.descriptors.kind = DescriptorKind::Mim;
    result.descriptors.dim = dim;

    std::vector<int> counts(n_orient);
    std::vector<float> hist(dim);

    for (const Candidate& c : candidates) {
        const int cx = static_cast<int>(std::lround(c.x));
        const int cy = static_cast<int>(std::lround(c.y));

        // Dominant orientation index over the circular patch (ties -> lowest).
        std::fill(counts.begin(), counts.end(), 0);
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                if (dx * dx + dy * dy > radius * radius)
                    continue;
                const int px = std::clamp(cx + dx, 0, w - 1);
                const int py = std::clamp(cy + dy, 0, h - 1);
                ++counts[pc.mim.at(px, py) - 1];
            }
        const int dominant =
            static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        const double alpha = dominant * kPi / n_orient;  // sector origin angle

        // Log-polar histogram of orientation indices, expressed relative to
        // the dominant orientation in both geometry and channel.
        std::fill(hist.begin(), hist.end(), 0.0f);
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const int r2 = dx * dx + dy * dy;
                if (r2 == 0 || r2 > radius * radius)
                    continue;
                const int px = std::clamp(cx + dx, 0, w - 1);
                const int py = std::clamp(cy + dy, 0, h - 1);

                const double r = std::sqrt(static_cast<double>(r2));
                int ring = static_cast<int>(rings * std::log(r + 1.0) / log_norm);
                ring = std::clamp(ring, 0, rings - 1);

                double phi = std::atan2(static_cast<double>(dy), static_cast<double>(dx)) - alpha;
                phi = std::fmod(phi, kTwoPi);
                if (phi < 0.0)
                    phi += kTwoPi;
                int sector = static_cast<int>(phi / (kTwoPi / kSectors));
                sector = std::clamp(sector, 0, kSectors - 1);

                const int channel = ((pc.mim.at(px, py) - 1) - dominant + n_orient) % n_orient;
                hist[(ring * kSectors + sector) * n_orient + channel] += 1.0f;
            }

        KeyPoint kp;
        kp.x = c.x;
        kp.y = c.y;
        kp.scale = 1.0;
        kp.orientation = alpha;
        kp.response = c.response;
        result.keypoints.push_back(kp);
        result.descriptors.floats.insert(result.descriptors.floats.end(), hist.begin(),
                                         hist.end());
    }

    l2_normalize_rows(result.descriptors);
    return result;
}

}  // namespace lunareg

#include "lunareg/features/akaze.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

namespace lunareg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kFedTauMax = 0.25;  ///< explicit-scheme stability limit

/// One nonlinear scale-space level within an octave.
struct Level {
    ImageF l;        ///< evolved image
    ImageF lx, ly;   ///< Scharr derivatives of l
    ImageF response; ///< scale-normalized Hessian determinant
    double sigma_local = 0.0;   ///< blur in this octave's pixels
    double sigma_global = 0.0;  ///< blur in original-image pixels
    int octave = 0;
    bool transition = false;    ///< decimation carry, not a detection level
};

float sample_clamped(const ImageF& img, double x, double y) {
    // Bilinear with clamped coordinates; used by the descriptor sampler.
    const double cx = std::clamp(x, 0.0, img.width() - 1.0);
    const double cy = std::clamp(y, 0.0, img.height() - 1.0);
    const int x0 = std::min(static_cast<int>(cx), img.width() - 2 >= 0 ? img.width() - 2 : 0);
    const int y0 = std::min(static_cast<int>(cy), img.height() - 2 >= 0 ? img.height() - 2 : 0);
    const double fx = cx - x0, fy = cy - y0;
    const float a = img.at(x0, y0);
    const float b = img.at(std::min(x0 + 1, img.width() - 1), y0);
    const float c = img.at(x0, std::min(y0 + 1, img.height() - 1));
    const float d = img.at(std::min(x0 + 1, img.width() - 1), std::min(y0 + 1, img.height() - 1));
    return static_cast<float>((1 - fx) * (1 - fy) * a + fx * (1 - fy) * b +
                              (1 - fx) * fy * c + fx * fy * d);
}

/// Evolves `l` from blur sigma_from to sigma_to with one FED cycle,
/// conductivity recomputed once from the current image.
void evolve(ImageF& l, double sigma_from, double sigma_to, double k) {
    const double dt = 0.5 * (sigma_to * sigma_to - sigma_from * sigma_from);
    const ImageF g = pm_g2_conductivity(gaussian_blur(l, 1.0), k);
    for (double tau : fed_tau_sequence(dt))
        pm_diffusion_step(l, g, tau);
}

std::vector<Level> build_scale_space(const ImageF& gray, const AkazeParams& p,
                                     double k) {
    std::vector<Level> levels;
    ImageF current = gaussian_blur(gray, p.sigma0);

    for (int o = 0; o < p.octaves; ++o) {
        if (o > 0) {
            // The carry image reached 2*sigma0 locally; decimation halves it.
            if (current.width() / 2 < 16 || current.height() / 2 < 16)
                break;
            current = half_sample(current);
        }
        for (int j = 0; j < p.sublevels; ++j) {
            const double s_prev = p.sigma0 * std::pow(2.0, (j - 1) / static_cast<double>(p.sublevels));
            const double s_cur = p.sigma0 * std::pow(2.0, j / static_cast<double>(p.sublevels));
            if (j > 0)
                evolve(current, s_prev, s_cur, k);

            Level lev;
            lev.l = current;
            lev.sigma_local = s_cur;
            lev.sigma_global = s_cur * std::pow(2.0, o);
            lev.octave = o;
            levels.push_back(std::move(lev));
        }
        // Transition level at 2*sigma0: decimation source for the next
        // octave and the scale-above neighbour of the last sublevel.
        const double s_last = p.sigma0 * std::pow(2.0, (p.sublevels - 1) / static_cast<double>(p.sublevels));
        evolve(current, s_last, 2.0 * p.sigma0, k);
        Level trans;
        trans.l = current;
        trans.sigma_local = 2.0 * p.sigma0;
        trans.sigma_global = 2.0 * p.sigma0 * std::pow(2.0, o);
        trans.octave = o;
        trans.transition = true;
        levels.push_back(std::move(trans));
    }

    for (Level& lev : levels) {
        lev.lx = ImageF(lev.l.width(), lev.l.height());
        lev.ly = ImageF(lev.l.width(), lev.l.height());
        scharr_derivatives(lev.l, lev.lx, lev.ly);

        // Second derivatives by differentiating the first.
        ImageF lxx(lev.l.width(), lev.l.height()), lxy(lev.l.width(), lev.l.height());
        ImageF lyx(lev.l.width(), lev.l.height()), lyy(lev.l.width(), lev.l.height());
        scharr_derivatives(lev.lx, lxx, lxy);
        scharr_derivatives(lev.ly, lyx, lyy);

        const double norm = std::pow(lev.sigma_local, 4.0);
        lev.response = ImageF(lev.l.width(), lev.l.height());
        for (int i = 0; i < lev.l.width() * lev.l.height(); ++i)
            lev.response.data()[i] = static_cast<float>(
                norm * (lxx.data()[i] * lyy.data()[i] -
                        0.25 * (lxy.data()[i] + lyx.data()[i]) *
                            (lxy.data()[i] + lyx.data()[i])));
    }
    return levels;
}

/// Interpolated dominant gradient direction around (x, y) at blur sigma.
double dominant_orientation(const Level& lev, double x, double y) {
    constexpr int kBins = 36;
    const double sigma_w = 1.5 * lev.sigma_local;
    const int radius = static_cast<int>(std::lround(3.0 * sigma_w));
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));

    double hist[kBins] = {0.0};
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const int px = cx + dx, py = cy + dy;
            if (px < 0 || px >= lev.l.width() || py < 0 || py >= lev.l.height())
                continue;
            const double gx = lev.lx.at(px, py);
            const double gy = lev.ly.at(px, py);
            const double mag = std::hypot(gx, gy);
            if (mag <= 0.0)
                continue;
            double ang = std::atan2(gy, gx);
            if (ang < 0.0)
                ang += kTwoPi;
            const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma_w * sigma_w));
            hist[static_cast<int>(ang / kTwoPi * kBins) % kBins] += w * mag;
        }

    for (int pass = 0; pass < 2; ++pass) {
        double sm[kBins];
        for (int i = 0; i < kBins; ++i)
            sm[i] = 0.25 * hist[(i + kBins - 1) % kBins] + 0.5 * hist[i] +
                    0.25 * hist[(i + 1) % kBins];
        std::copy(sm, sm + kBins, hist);
    }

    int best = 0;
    for (int i = 1; i < kBins; ++i)
        if (hist[i] > hist[best])
            best = i;
    if (hist[best] <= 0.0)
        return 0.0;
    const double l = hist[(best + kBins - 1) % kBins];
    const double c = hist[best];
    const double r = hist[(best + 1) % kBins];
    const double denom = l - 2.0 * c + r;
    const double offset = std::abs(denom) > 1e-12 ? 0.5 * (l - r) / denom : 0.0;
    double ang = (best + 0.5 + offset) / kBins * kTwoPi;
    ang = std::fmod(ang, kTwoPi);
    if (ang < 0.0)
        ang += kTwoPi;
    return ang;
}

constexpr std::array<int, 3> kLdbGrids = {2, 3, 4};

int ldb_bit_count() {
    int bits = 0;
    for (int g : kLdbGrids) {
        const int cells = g * g;
        bits += 3 * cells * (cells - 1) / 2;
    }
    return bits;
}

/// M-LDB: per grid, cell means of {intensity, rotated dx, rotated dy} are
/// pairwise compared in row-major order; channel blocks in that order.
void describe_mldb(const Level& lev, double x, double y, double orientation,
                   DescriptorSet& out, int row) {
    const double radius = 6.0 * lev.sigma_local;
    const double cos_t = std::cos(orientation);
    const double sin_t = std::sin(orientation);

    int bit = 0;
    for (int g : kLdbGrids) {
        const int cells = g * g;
        std::vector<double> mean_i(cells, 0.0), mean_dx(cells, 0.0), mean_dy(cells, 0.0);
        const double cell_side = 2.0 * radius / g;
        constexpr int kSub = 4;  // sample points per cell axis

        for (int cy = 0; cy < g; ++cy)
            for (int cx = 0; cx < g; ++cx) {
                double si = 0.0, sx = 0.0, sy = 0.0;
                for (int vy = 0; vy < kSub; ++vy)
                    for (int vx = 0; vx < kSub; ++vx) {
                        // Sample position in the rotated keypoint frame.
                        const double ux =
                            -radius + (cx + (vx + 0.5) / kSub) * cell_side;
                        const double uy =
                            -radius + (cy + (vy + 0.5) / kSub) * cell_side;
                        const double px = x + cos_t * ux - sin_t * uy;
                        const double py = y + sin_t * ux + cos_t * uy;
                        si += sample_clamped(lev.l, px, py);
                        const double dx = sample_clamped(lev.lx, px, py);
                        const double dy = sample_clamped(lev.ly, px, py);
                        sx += cos_t * dx + sin_t * dy;   // gradient in keypoint frame
                        sy += -sin_t * dx + cos_t * dy;
                    }
                const int c = cy * g + cx;
                mean_i[c] = si;
                mean_dx[c] = sx;
                mean_dy[c] = sy;
            }

        for (const std::vector<double>* chan : {&mean_i, &mean_dx, &mean_dy})
            for (int i = 0; i < cells; ++i)
                for (int j = i + 1; j < cells; ++j) {
                    if ((*chan)[i] > (*chan)[j])
                        out.set_bit(row, bit);
                    ++bit;
                }
    }
}

}  // namespace

void AkazeParams::validate() const {
    if (octaves < 1)
        throw ConfigInvalid("octaves", "must be >= 1");
    if (sublevels < 2)
        throw ConfigInvalid("sublevels", "must be >= 2");
    if (detector_threshold <= 0.0)
        throw ConfigInvalid("detector_threshold", "must be positive");
    if (contrast_percentile <= 0.0 || contrast_percentile >= 1.0)
        throw ConfigInvalid("contrast_percentile", "must be in (0,1)");
    if (max_features < 1)
        throw ConfigInvalid("max_features", "must be >= 1");
    if (sigma0 <= 0.0)
        throw ConfigInvalid("sigma0", "must be positive");
}

std::vector<double> fed_tau_sequence(double total_time, double tau_max) {
    if (total_time <= 0.0)
        return {};
    // Cycle time at stability limit: tau_max * n (n + 1) / 3.
    int n = 1;
    while (tau_max * n * (n + 1) / 3.0 < total_time)
        ++n;
    const double scale = total_time / (tau_max * n * (n + 1) / 3.0);
    std::vector<double> tau(n);
    for (int j = 0; j < n; ++j) {
        const double c = std::cos(kPi * (2.0 * j + 1.0) / (4.0 * n + 2.0));
        tau[j] = scale * tau_max / (2.0 * c * c);
    }
    return tau;
}

double contrast_factor(const ImageF& gray, double percentile) {
    const ImageF smooth = gaussian_blur(gray, 1.0);
    ImageF gx(gray.width(), gray.height()), gy(gray.width(), gray.height());
    scharr_derivatives(smooth, gx, gy);

    double max_mag = 0.0;
    for (int i = 0; i < gray.width() * gray.height(); ++i)
        max_mag = std::max(
            max_mag, std::hypot(static_cast<double>(gx.data()[i]),
                                static_cast<double>(gy.data()[i])));
    if (max_mag <= 0.0)
        return 0.01;

    constexpr int kBins = 512;
    std::array<long long, kBins> hist{};
    long long total = 0;
    for (int i = 0; i < gray.width() * gray.height(); ++i) {
        const double m = std::hypot(static_cast<double>(gx.data()[i]),
                                    static_cast<double>(gy.data()[i]));
        if (m <= 0.0)
            continue;
        int b = static_cast<int>(m / max_mag * kBins);
        hist[std::min(b, kBins - 1)] += 1;
        ++total;
    }
    long long want = static_cast<long long>(percentile * total);
    long long acc = 0;
    for (int b = 0; b < kBins; ++b) {
        acc += hist[b];
        if (acc >= want && acc > 0)
            return std::max(0.01, (b + 1.0) / kBins * max_mag);
    }
    return std::max(0.01, max_mag);
}

ImageF pm_g2_conductivity(const ImageF& l, double k) {
    ImageF gx(l.width(), l.height()), gy(l.width(), l.height());
    scharr_derivatives(l, gx, gy);
    ImageF g(l.width(), l.height());
    const double k2 = k * k;
    for (int i = 0; i < l.width() * l.height(); ++i) {
        const double m2 = static_cast<double>(gx.data()[i]) * gx.data()[i] +
                          static_cast<double>(gy.data()[i]) * gy.data()[i];
        g.data()[i] = static_cast<float>(1.0 / (1.0 + m2 / k2));
    }
    return g;
}

void pm_diffusion_step(ImageF& l, const ImageF& g, double tau) {
    const int w = l.width(), h = l.height();
    ImageF out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // Fluxes across the four faces; faces on the border carry none.
            double div = 0.0;
            const double gc = g.at(x, y);
            const double lc = l.at(x, y);
            if (x + 1 < w)
                div += 0.5 * (gc + g.at(x + 1, y)) * (l.at(x + 1, y) - lc);
            if (x > 0)
                div -= 0.5 * (g.at(x - 1, y) + gc) * (lc - l.at(x - 1, y));
            if (y + 1 < h)
                div += 0.5 * (gc + g.at(x, y + 1)) * (l.at(x, y + 1) - lc);
            if (y > 0)
                div -= 0.5 * (g.at(x, y - 1) + gc) * (lc - l.at(x, y - 1));
            out.at(x, y) = static_cast<float>(lc + tau * div);
        }
    l = std::move(out);
}

DetectionResult detect_akaze(const GeoRaster& img, const AkazeParams& params) {
    return detect_akaze(gray_unit(img), params);
}

DetectionResult detect_akaze(const ImageF& gray, const AkazeParams& params) {
    params.validate();
    if (std::min(gray.width(), gray.height()) < 32)
        throw ImageTooSmall(32);

    const double k = contrast_factor(gray, params.contrast_percentile);
    const std::vector<Level> levels = build_scale_space(gray, params, k);

    struct Candidate {
        KeyPoint kp;
        int level;
        double lx, ly;  ///< refined octave coordinates
    };
    std::vector<Candidate> cands;

    for (int i = 0; i < static_cast<int>(levels.size()); ++i) {
        const Level& lev = levels[i];
        // Scale neighbors within the same octave only (same resolution).
        const Level* below =
            (i > 0 && levels[i - 1].octave == lev.octave) ? &levels[i - 1] : nullptr;
        const Level* above = (i + 1 < static_cast<int>(levels.size()) &&
                              levels[i + 1].octave == lev.octave)
                                 ? &levels[i + 1]
                                 : nullptr;
        if (lev.transition || !below || !above)
            continue;

        const int border = std::max(3, static_cast<int>(std::lround(lev.sigma_local)));
        for (int y = border; y < lev.l.height() - border; ++y)
            for (int x = border; x < lev.l.width() - border; ++x) {
                const float v = lev.response.at(x, y);
                if (v < params.detector_threshold)
                    continue;
                bool is_max = true;
                for (int dy = -1; dy <= 1 && is_max; ++dy)
                    for (int dx = -1; dx <= 1 && is_max; ++dx) {
                        if (dx == 0 && dy == 0)
                            continue;
                        if (lev.response.at(x + dx, y + dy) >= v)
                            is_max = false;
                    }
                for (int dy = -1; dy <= 1 && is_max; ++dy)
                    for (int dx = -1; dx <= 1 && is_max; ++dx) {
                        if (below->response.at(x + dx, y + dy) > v ||
                            above->response.at(x + dx, y + dy) > v)
                            is_max = false;
                    }
                if (!is_max)
                    continue;

                // Quadratic sub-pixel refinement on the response surface.
                const ImageF& r = lev.response;
                const double gx = 0.5 * (r.at(x + 1, y) - r.at(x - 1, y));
                const double gy = 0.5 * (r.at(x, y + 1) - r.at(x, y - 1));
                const double hxx = r.at(x + 1, y) + r.at(x - 1, y) - 2.0 * v;
                const double hyy = r.at(x, y + 1) + r.at(x, y - 1) - 2.0 * v;
                const double hxy = 0.25 * (r.at(x + 1, y + 1) - r.at(x - 1, y + 1) -
                                           r.at(x + 1, y - 1) + r.at(x - 1, y - 1));
                const double det = hxx * hyy - hxy * hxy;
                double ox = 0.0, oy = 0.0;
                if (std::abs(det) > 1e-30) {
                    ox = -(hyy * gx - hxy * gy) / det;
                    oy = -(hxx * gy - hxy * gx) / det;
                }
                if (std::abs(ox) > 1.0 || std::abs(oy) > 1.0)
                    continue;

                const double up = std::pow(2.0, lev.octave);
                Candidate c;
                c.kp.x = (x + ox) * up;
                c.kp.y = (y + oy) * up;
                c.kp.scale = lev.sigma_global;
                c.kp.response = v;
                c.level = i;
                c.lx = x + ox;
                c.ly = y + oy;
                if (c.kp.x < 0.0 || c.kp.x >= gray.width() || c.kp.y < 0.0 ||
                    c.kp.y >= gray.height())
                    continue;
                cands.push_back(c);
            }
    }

    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.kp.response != b.kp.response)
            return a.kp.response > b.kp.response;
        if (a.kp.y != b.kp.y)
            return a.kp.y < b.kp.y;
        if (a.kp.x != b.kp.x)
            return a.kp.x < b.kp.x;
        return a.kp.scale < b.kp.scale;
    });
    if (static_cast<int>(cands.size()) > params.max_features)
        cands.resize(params.max_features);

    DetectionResult out;
    out.descriptors.kind = DescriptorKind::BinaryHamming;
    out.descriptors.dim = ldb_bit_count();
    const int words = out.descriptors.words_per_row();
    out.descriptors.bits.assign(static_cast<std::size_t>(cands.size()) * words, 0);

    for (std::size_t idx = 0; idx < cands.size(); ++idx) {
        const Candidate& c = cands[idx];
        const Level& lev = levels[c.level];
        KeyPoint kp = c.kp;
        kp.orientation = dominant_orientation(lev, c.lx, c.ly);
        describe_mldb(lev, c.lx, c.ly, kp.orientation, out.descriptors,
                      static_cast<int>(idx));
        out.keypoints.push_back(kp);
    }
    return out;
}

}  // namespace lunareg

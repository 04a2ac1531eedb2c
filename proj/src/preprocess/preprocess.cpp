#include "lunareg/preprocess/preprocess.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include <json.hpp>

#include "lunareg/raster/io.hpp"

namespace lunareg {

namespace {

using json = nlohmann::json;

void require_u8(const GeoRaster& src) {
    if (src.depth != SampleDepth::U8)
        throw NonEightBitInput();
}

/// 256-bin integer histogram of a band over valid pixels.
std::array<std::int64_t, 256> histogram_u8(const GeoRaster& r, int band) {
    std::array<std::int64_t, 256> h{};
    const ImageF& b = r.band(band);
    for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x)
            if (r.is_valid_at(x, y))
                ++h[static_cast<int>(b.at(x, y)) & 0xff];
    return h;
}

std::int64_t valid_count(const std::array<std::int64_t, 256>& h) {
    return std::accumulate(h.begin(), h.end(), std::int64_t{0});
}

}  // namespace

GeoRaster resample(const GeoRaster& src, double target_gsd, InterpKernel kernel,
                   std::optional<double> source_gsd_override) {
    if (target_gsd <= 0.0)
        throw ConfigInvalid("target_gsd", "must be positive");
    double src_gsd;
    if (source_gsd_override)
        src_gsd = *source_gsd_override;
    else if (src.meta)
        src_gsd = src.meta->gsd_m;
    else
        throw UnknownSourceGsd();
    if (src_gsd <= 0.0)
        throw UnknownSourceGsd();

    const int w = src.width(), h = src.height();
    const int out_w = std::max(1, static_cast<int>(round_half_up(w * src_gsd / target_gsd)));
    const int out_h = std::max(1, static_cast<int>(round_half_up(h * src_gsd / target_gsd)));
    const double sx = static_cast<double>(w) / out_w;
    const double sy = static_cast<double>(h) / out_h;

    GeoRaster out(out_w, out_h, src.depth, src.band_count());
    const double hi = depth_max_value(src.depth);
    for (int b = 0; b < src.band_count(); ++b) {
        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                const double u = (x + 0.5) * sx - 0.5;
                const double v = (y + 0.5) * sy - 0.5;
                double val = sample(src.band(b), u, v, kernel);
                if (src.depth != SampleDepth::F32)
                    val = std::clamp(round_half_up(val), 0.0, hi);
                out.band(b).at(x, y) = static_cast<float>(val);
            }
        }
    }
    if (src.mask) {
        out.mask = ImageU8(out_w, out_h);
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x)
                out.mask->at(x, y) = src.mask->at_clamped(
                    static_cast<int>(round_half_up((x + 0.5) * sx - 0.5)),
                    static_cast<int>(round_half_up((y + 0.5) * sy - 0.5)));
    }
    if (src.meta) {
        GeoMeta m = *src.meta;
        auto sign = [](double v) { return v < 0.0 ? -1.0 : 1.0; };
        const double rx = target_gsd / src_gsd;
        m.geotransform[1] = sign(m.geotransform[1]) * target_gsd;
        m.geotransform[5] = sign(m.geotransform[5]) * target_gsd;
        m.geotransform[2] *= rx;
        m.geotransform[4] *= rx;
        m.gsd_m = target_gsd;
        out.meta = m;
    }
    out.fill_value = src.fill_value;
    return out;
}

GeoRaster normalize_u8(const GeoRaster& src) {
    GeoRaster out(src.width(), src.height(), SampleDepth::U8, src.band_count());
    out.meta = src.meta;
    out.mask = src.mask;
    out.fill_value = src.fill_value;

    for (int b = 0; b < src.band_count(); ++b) {
        double lo = std::numeric_limits<double>::max();
        double hi = std::numeric_limits<double>::lowest();
        std::int64_t n = 0;
        for (int y = 0; y < src.height(); ++y) {
            for (int x = 0; x < src.width(); ++x) {
                if (!src.is_valid_at(x, y))
                    continue;
                const double v = src.band(b).at(x, y);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                ++n;
            }
        }
        if (n == 0)
            throw EmptyValidRegion();
        const double range = hi - lo;
        for (int y = 0; y < src.height(); ++y) {
            for (int x = 0; x < src.width(); ++x) {
                if (!src.is_valid_at(x, y)) {
                    out.band(b).at(x, y) = static_cast<float>(src.fill_value);
                    continue;
                }
                const double v = src.band(b).at(x, y);
                out.band(b).at(x, y) =
                    range > 0.0 ? quantize_u8(255.0 * (v - lo) / range) : 0.0f;
            }
        }
    }
    return out;
}

GeoRaster clahe(const GeoRaster& src, int tiles_x, int tiles_y, double clip_limit) {
    require_u8(src);
    if (tiles_x < 1 || tiles_y < 1)
        throw ConfigInvalid("tiles", "tile counts must be >= 1");
    if (clip_limit < 1.0)
        throw ConfigInvalid("clip_limit", "must be >= 1.0");
    const int w = src.width(), h = src.height();
    if (w < tiles_x || h < tiles_y)
        throw TileGridTooFine();

    const ImageF& band = src.band(0);

    // Per-tile clipped-histogram equalization mappings.
    std::vector<std::array<float, 256>> luts(static_cast<std::size_t>(tiles_x) * tiles_y);
    std::vector<double> centers_x(tiles_x), centers_y(tiles_y);

    for (int ty = 0; ty < tiles_y; ++ty) {
        const int y0 = static_cast<int>(static_cast<std::int64_t>(ty) * h / tiles_y);
        const int y1 = static_cast<int>(static_cast<std::int64_t>(ty + 1) * h / tiles_y);
        centers_y[ty] = 0.5 * (y0 + y1 - 1);
        for (int tx = 0; tx < tiles_x; ++tx) {
            const int x0 = static_cast<int>(static_cast<std::int64_t>(tx) * w / tiles_x);
            const int x1 = static_cast<int>(static_cast<std::int64_t>(tx + 1) * w / tiles_x);
            if (ty == 0)
                centers_x[tx] = 0.5 * (x0 + x1 - 1);

            std::array<std::int64_t, 256> hist{};
            std::int64_t n = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    if (!src.is_valid_at(x, y))
                        continue;
                    ++hist[static_cast<int>(band.at(x, y)) & 0xff];
                    ++n;
                }
            }

            auto& lut = luts[static_cast<std::size_t>(ty) * tiles_x + tx];
            // Empty and single-bin tiles equalize to identity; a constant
            // region has no contrast to redistribute.
            const int occupied =
                static_cast<int>(std::count_if(hist.begin(), hist.end(),
                                               [](std::int64_t c) { return c > 0; }));
            if (n == 0 || occupied <= 1) {
                for (int v = 0; v < 256; ++v)
                    lut[v] = static_cast<float>(v);
                continue;
            }

            // Clip, redistribute uniformly, round-robin the residual from bin 0.
            const std::int64_t limit =
                std::max<std::int64_t>(1, static_cast<std::int64_t>(clip_limit * n / 256.0));
            std::int64_t excess = 0;
            for (auto& c : hist) {
                if (c > limit) {
                    excess += c - limit;
                    c = limit;
                }
            }
            const std::int64_t base = excess / 256;
            std::int64_t residual = excess % 256;
            for (int v = 0; v < 256; ++v)
                hist[v] += base;
            for (int v = 0; residual > 0; ++v, --residual)
                hist[v] += 1;

            // Equalize: lut(v) = 255*(cdf(v)-cdf_min)/(n-cdf_min); a
            // single-occupied-bin histogram maps to identity.
            std::int64_t cdf_min = 0;
            for (int v = 0; v < 256; ++v) {
                if (hist[v] > 0) {
                    cdf_min = hist[v];
                    break;
                }
            }
            std::int64_t cum = 0;
            for (int v = 0; v < 256; ++v) {
                cum += hist[v];
                if (n > cdf_min)
                    lut[v] = static_cast<float>(255.0 * static_cast<double>(cum - cdf_min) /
                                                static_cast<double>(n - cdf_min));
                else
                    lut[v] = static_cast<float>(v);
            }
        }
    }

    GeoRaster out(w, h, SampleDepth::U8);
    out.meta = src.meta;
    out.mask = src.mask;
    out.fill_value = src.fill_value;

    auto lut_at = [&](int tx, int ty) -> const std::array<float, 256>& {
        return luts[static_cast<std::size_t>(ty) * tiles_x + tx];
    };
    // Bilinear blend of the 4 surrounding tile mappings, clamped at borders.
    for (int y = 0; y < h; ++y) {
        int ty0 = 0;
        while (ty0 + 1 < tiles_y && centers_y[ty0 + 1] <= y)
            ++ty0;
        const int ty1 = std::min(ty0 + 1, tiles_y - 1);
        double fy = 0.0;
        if (y > centers_y[ty0] && ty1 != ty0)
            fy = (y - centers_y[ty0]) / (centers_y[ty1] - centers_y[ty0]);
        if (y < centers_y[0])
            fy = 0.0;

        for (int x = 0; x < w; ++x) {
            if (!src.is_valid_at(x, y)) {
                out.band(0).at(x, y) = band.at(x, y);
                continue;
            }
            int tx0 = 0;
            while (tx0 + 1 < tiles_x && centers_x[tx0 + 1] <= x)
                ++tx0;
            const int tx1 = std::min(tx0 + 1, tiles_x - 1);
            double fx = 0.0;
            if (x > centers_x[tx0] && tx1 != tx0)
                fx = (x - centers_x[tx0]) / (centers_x[tx1] - centers_x[tx0]);
            if (x < centers_x[0])
                fx = 0.0;

            const int v = static_cast<int>(band.at(x, y)) & 0xff;
            const double top = lut_at(tx0, ty0)[v] + fx * (lut_at(tx1, ty0)[v] - lut_at(tx0, ty0)[v]);
            const double bot = lut_at(tx0, ty1)[v] + fx * (lut_at(tx1, ty1)[v] - lut_at(tx0, ty1)[v]);
            out.band(0).at(x, y) = quantize_u8(top + fy * (bot - top));
        }
    }
    return out;
}

GeoRaster invert(const GeoRaster& src) {
    require_u8(src);
    GeoRaster out = src;
    for (ImageF& b : out.bands)
        for (float& v : b.pixels())
            v = 255.0f - v;
    return out;
}

GeoRaster dilate(const GeoRaster& src, int radius, StructuringElement shape) {
    if (radius < 1)
        throw ConfigInvalid("radius", "must be >= 1");
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (shape == StructuringElement::Square || dx * dx + dy * dy <= radius * radius)
                offsets.emplace_back(dx, dy);

    GeoRaster out = src;
    for (int b = 0; b < src.band_count(); ++b) {
        const ImageF& in = src.band(b);
        ImageF& o = out.band(b);
        for (int y = 0; y < src.height(); ++y) {
            for (int x = 0; x < src.width(); ++x) {
                float m = std::numeric_limits<float>::lowest();
                for (const auto& [dx, dy] : offsets)
                    m = std::max(m, in.at_clamped(x + dx, y + dy));
                o.at(x, y) = m;
            }
        }
    }
    return out;
}

PcaResult pca_stack(const std::vector<GeoRaster>& inputs, int keep) {
    const int k = static_cast<int>(inputs.size());
    if (k < 2)
        throw DimensionMismatch("pca_stack needs at least 2 input bands");
    if (keep < 1 || keep > k)
        throw ConfigInvalid("keep_components", "must be in [1, input count]");
    const int w = inputs[0].width(), h = inputs[0].height();
    for (const GeoRaster& r : inputs)
        if (r.width() != w || r.height() != h || r.band_count() != 1)
            throw DimensionMismatch("pca_stack inputs must be aligned single-band rasters");

    // Intersection of validity masks.
    ImageU8 joint(w, h, 1);
    bool any_mask = false;
    for (const GeoRaster& r : inputs) {
        if (!r.mask)
            continue;
        any_mask = true;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (!r.is_valid_at(x, y))
                    joint.at(x, y) = 0;
    }

    std::int64_t n = 0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (joint.at(x, y) == 0)
                continue;
            ++n;
            for (int b = 0; b < k; ++b)
                mean[b] += inputs[b].band(0).at(x, y);
        }
    }
    if (n == 0)
        throw EmptyValidRegion();
    mean /= static_cast<double>(n);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd d(k);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (joint.at(x, y) == 0)
                continue;
            for (int b = 0; b < k; ++b)
                d[b] = inputs[b].band(0).at(x, y) - mean[b];
            cov.noalias() += d * d.transpose();
        }
    }
    cov /= static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // Ascending from Eigen; we want descending.
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return es.eigenvalues()[a] > es.eigenvalues()[b]; });

    const double trace = std::max(0.0, es.eigenvalues().sum());
    PcaResult result;
    result.explained_variance.resize(k, 0.0);
    for (int i = 0; i < k; ++i) {
        const double ev = std::max(0.0, es.eigenvalues()[order[i]]);
        result.explained_variance[i] = trace > 0.0 ? ev / trace : 0.0;
    }

    for (int i = 0; i < keep; ++i) {
        Eigen::VectorXd vec = es.eigenvectors().col(order[i]);
        // Sign convention: largest-magnitude entry positive.
        int arg = 0;
        for (int b = 1; b < k; ++b)
            if (std::abs(vec[b]) > std::abs(vec[arg]))
                arg = b;
        if (vec[arg] < 0.0)
            vec = -vec;

        GeoRaster comp(w, h, SampleDepth::F32);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double proj = 0.0;
                for (int b = 0; b < k; ++b)
                    proj += vec[b] * (inputs[b].band(0).at(x, y) - mean[b]);
                comp.band(0).at(x, y) = static_cast<float>(proj);
            }
        }
        if (any_mask)
            comp.mask = joint;
        result.components.push_back(normalize_u8(comp));
    }
    return result;
}

GeoRaster histogram_match(const GeoRaster& src, const GeoRaster& reference) {
    require_u8(src);
    require_u8(reference);
    const auto hs = histogram_u8(src, 0);
    const auto hr = histogram_u8(reference, 0);
    const std::int64_t ns = valid_count(hs);
    const std::int64_t nr = valid_count(hr);
    if (ns == 0 || nr == 0)
        throw EmptyValidRegion();

    std::array<std::int64_t, 256> cum_s{}, cum_r{};
    std::int64_t a = 0, b = 0;
    for (int v = 0; v < 256; ++v) {
        a += hs[v];
        b += hr[v];
        cum_s[v] = a;
        cum_r[v] = b;
    }

    // out(v) = min{u : CDF_ref(u) >= CDF_src(v)}; compared in integers via
    // cross multiplication so no float CDF round-off creeps in.
    std::array<std::uint8_t, 256> lut{};
    int u = 0;
    for (int v = 0; v < 256; ++v) {
        while (u < 255 &&
               static_cast<__int128>(cum_r[u]) * ns < static_cast<__int128>(cum_s[v]) * nr)
            ++u;
        lut[v] = static_cast<std::uint8_t>(u);
    }

    GeoRaster out = src;
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
            if (src.is_valid_at(x, y))
                out.band(0).at(x, y) =
                    static_cast<float>(lut[static_cast<int>(src.band(0).at(x, y)) & 0xff]);
    return out;
}

GeoRaster shadow_normalize(const GeoRaster& src, double shadow_percentile,
                           double target_gain_cap) {
    require_u8(src);
    if (shadow_percentile <= 0.0 || shadow_percentile >= 50.0)
        throw ConfigInvalid("shadow_percentile", "must be in (0, 50)");
    if (target_gain_cap < 1.0)
        throw ConfigInvalid("target_gain_cap", "must be >= 1");

    // Threshold on the intensity range, not the data distribution, so images
    // with no dark content are untouched.
    const double threshold = shadow_percentile / 100.0 * 255.0;

    const auto hist = histogram_u8(src, 0);
    const std::int64_t n = valid_count(hist);
    if (n == 0)
        throw EmptyValidRegion();

    double shadow_sum = 0.0;
    std::int64_t shadow_n = 0;
    for (int v = 0; v < 256; ++v) {
        if (v < threshold) {
            shadow_sum += static_cast<double>(hist[v]) * v;
            shadow_n += hist[v];
        }
    }
    if (shadow_n == 0)
        return src;

    // Midpoint median over valid pixels.
    const std::int64_t lo_rank = (n - 1) / 2, hi_rank = n / 2;
    double median = 0.0;
    {
        std::int64_t cum = 0;
        int lo_val = -1, hi_val = -1;
        for (int v = 0; v < 256; ++v) {
            cum += hist[v];
            if (lo_val < 0 && cum > lo_rank)
                lo_val = v;
            if (hi_val < 0 && cum > hi_rank) {
                hi_val = v;
                break;
            }
        }
        median = 0.5 * (lo_val + hi_val);
    }

    const double shadow_mean = shadow_sum / static_cast<double>(shadow_n);
    const double gain = shadow_mean > 0.0
                            ? std::min(target_gain_cap, median / shadow_mean)
                            : target_gain_cap;

    // Feather weight: 1 below the threshold, linear to 0 across 2 gray levels.
    auto weight = [&](double v) {
        if (v < threshold)
            return 1.0;
        if (v < threshold + 2.0)
            return (threshold + 2.0 - v) / 2.0;
        return 0.0;
    };

    GeoRaster out = src;
    for (int y = 0; y < src.height(); ++y) {
        for (int x = 0; x < src.width(); ++x) {
            if (!src.is_valid_at(x, y))
                continue;
            const double v = src.band(0).at(x, y);
            const double w = weight(v);
            if (w <= 0.0)
                continue;
            const double g = 1.0 + (gain - 1.0) * w;
            out.band(0).at(x, y) = quantize_u8(v * g);
        }
    }
    return out;
}

GeoRaster log_transform(const GeoRaster& src) {
    require_u8(src);
    const double c = 255.0 / std::log(256.0);
    std::array<float, 256> lut;
    for (int v = 0; v < 256; ++v)
        lut[v] = quantize_u8(c * std::log(1.0 + v));
    GeoRaster out = src;
    for (int b = 0; b < src.band_count(); ++b)
        for (int y = 0; y < src.height(); ++y)
            for (int x = 0; x < src.width(); ++x)
                if (src.is_valid_at(x, y))
                    out.band(b).at(x, y) = lut[static_cast<int>(src.band(b).at(x, y)) & 0xff];
    return out;
}

int select_reference_band(const GeoRaster& stack, BandSelectStrategy strategy,
                          int fixed_index) {
    if (stack.band_count() < 1)
        throw ConfigInvalid("bands", "stack needs at least one band");
    if (strategy == BandSelectStrategy::Index) {
        if (fixed_index < 0 || fixed_index >= stack.band_count())
            throw ConfigInvalid("index", "band index out of range");
        return fixed_index;
    }

    int best = 0;
    double best_stat = std::numeric_limits<double>::lowest();
    for (int b = 0; b < stack.band_count(); ++b) {
        double lo = std::numeric_limits<double>::max();
        double hi = std::numeric_limits<double>::lowest();
        double sum = 0.0, sum2 = 0.0;
        std::int64_t n = 0;
        for (int y = 0; y < stack.height(); ++y) {
            for (int x = 0; x < stack.width(); ++x) {
                if (!stack.is_valid_at(x, y))
                    continue;
                const double v = stack.band(b).at(x, y);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
                sum += v;
                sum2 += v * v;
                ++n;
            }
        }
        if (n == 0)
            continue;
        double stat;
        if (strategy == BandSelectStrategy::MaxStddev) {
            const double m = sum / n;
            stat = std::sqrt(std::max(0.0, sum2 / n - m * m));
        } else {
            // 256 equal-width bins across the band's own range.
            std::array<std::int64_t, 256> hist{};
            const double range = hi - lo;
            for (int y = 0; y < stack.height(); ++y) {
                for (int x = 0; x < stack.width(); ++x) {
                    if (!stack.is_valid_at(x, y))
                        continue;
                    const double v = stack.band(b).at(x, y);
                    int bin = range > 0.0 ? static_cast<int>((v - lo) / range * 255.0) : 0;
                    ++hist[std::clamp(bin, 0, 255)];
                }
            }
            stat = 0.0;
            for (std::int64_t c : hist) {
                if (c > 0) {
                    const double p = static_cast<double>(c) / n;
                    stat -= p * std::log2(p);
                }
            }
        }
        if (stat > best_stat) {
            best_stat = stat;
            best = b;
        }
    }
    return best;
}

// ---------------------------------------------------------------- plans

namespace {

std::string kernel_name(InterpKernel k) {
    switch (k) {
        case InterpKernel::Nearest: return "nearest";
        case InterpKernel::Bilinear: return "bilinear";
        case InterpKernel::Bicubic: return "bicubic";
    }
    return "bilinear";
}

InterpKernel kernel_from_name(const std::string& s) {
    if (s == "nearest")
        return InterpKernel::Nearest;
    if (s == "bilinear")
        return InterpKernel::Bilinear;
    if (s == "bicubic")
        return InterpKernel::Bicubic;
    throw ConfigInvalid("kernel", "unknown kernel: " + s);
}

json step_to_json(const PreprocessStep& step) {
    json j;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ResampleStep>) {
                j["op"] = "resample";
                j["gsd"] = s.gsd;
                j["kernel"] = kernel_name(s.kernel);
            } else if constexpr (std::is_same_v<T, NormalizeU8Step>) {
                j["op"] = "normalize_u8";
            } else if constexpr (std::is_same_v<T, ClaheStep>) {
                j["op"] = "clahe";
                j["tiles_x"] = s.tiles_x;
                j["tiles_y"] = s.tiles_y;
                j["clip_limit"] = s.clip_limit;
            } else if constexpr (std::is_same_v<T, InvertStep>) {
                j["op"] = "invert";
            } else if constexpr (std::is_same_v<T, DilateStep>) {
                j["op"] = "dilate";
                j["radius"] = s.radius;
                j["shape"] = s.shape == StructuringElement::Disk ? "disk" : "square";
            } else if constexpr (std::is_same_v<T, PcaStackStep>) {
                j["op"] = "pca_stack";
                j["inputs"] = s.inputs;
                j["keep_components"] = s.keep_components;
            } else if constexpr (std::is_same_v<T, HistogramMatchStep>) {
                j["op"] = "histogram_match";
                j["reference_id"] = s.reference_id;
            } else if constexpr (std::is_same_v<T, ShadowNormalizeStep>) {
                j["op"] = "shadow_normalize";
                j["shadow_percentile"] = s.shadow_percentile;
                j["target_gain_cap"] = s.target_gain_cap;
            } else if constexpr (std::is_same_v<T, LogTransformStep>) {
                j["op"] = "log_transform";
            } else if constexpr (std::is_same_v<T, SelectBandStep>) {
                j["op"] = "select_band";
                switch (s.strategy) {
                    case BandSelectStrategy::MaxEntropy: j["strategy"] = "max_entropy"; break;
                    case BandSelectStrategy::MaxStddev: j["strategy"] = "max_stddev"; break;
                    case BandSelectStrategy::Index:
                        j["strategy"] = "index";
                        j["index"] = s.index;
                        break;
                }
            }
        },
        step);
    return j;
}

PreprocessStep step_from_json(const json& j) {
    const std::string op = j.at("op").get<std::string>();
    if (op == "resample") {
        ResampleStep s;
        s.gsd = j.at("gsd").get<double>();
        if (j.contains("kernel"))
            s.kernel = kernel_from_name(j["kernel"].get<std::string>());
        return s;
    }
    if (op == "normalize_u8")
        return NormalizeU8Step{};
    if (op == "clahe") {
        ClaheStep s;
        s.tiles_x = j.value("tiles_x", 8);
        s.tiles_y = j.value("tiles_y", 8);
        s.clip_limit = j.value("clip_limit", 2.0);
        return s;
    }
    if (op == "invert")
        return InvertStep{};
    if (op == "dilate") {
        DilateStep s;
        s.radius = j.value("radius", 1);
        s.shape = j.value("shape", std::string("square")) == "disk"
                      ? StructuringElement::Disk
                      : StructuringElement::Square;
        return s;
    }
    if (op == "pca_stack") {
        PcaStackStep s;
        if (j.contains("inputs"))
            s.inputs = j["inputs"].get<std::vector<std::string>>();
        s.keep_components = j.value("keep_components", 1);
        return s;
    }
    if (op == "histogram_match") {
        HistogramMatchStep s;
        s.reference_id = j.at("reference_id").get<std::string>();
        return s;
    }
    if (op == "shadow_normalize") {
        ShadowNormalizeStep s;
        s.shadow_percentile = j.value("shadow_percentile", 25.0);
        s.target_gain_cap = j.value("target_gain_cap", 4.0);
        return s;
    }
    if (op == "log_transform")
        return LogTransformStep{};
    if (op == "select_band") {
        SelectBandStep s;
        const std::string strat = j.value("strategy", std::string("max_entropy"));
        if (strat == "max_entropy")
            s.strategy = BandSelectStrategy::MaxEntropy;
        else if (strat == "max_stddev")
            s.strategy = BandSelectStrategy::MaxStddev;
        else if (strat == "index") {
            s.strategy = BandSelectStrategy::Index;
            s.index = j.value("index", 0);
        } else {
            throw ConfigInvalid("strategy", "unknown band selection strategy: " + strat);
        }
        return s;
    }
    throw ConfigInvalid("op", "unknown preprocessing op: " + op);
}

}  // namespace

void PreprocessPlan::validate() const {
    for (const PreprocessStep& step : steps) {
        std::visit(
            [](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ResampleStep>) {
                    if (s.gsd <= 0.0)
                        throw ConfigInvalid("gsd", "must be positive");
                } else if constexpr (std::is_same_v<T, ClaheStep>) {
                    if (s.tiles_x < 1 || s.tiles_y < 1)
                        throw ConfigInvalid("tiles", "tile counts must be >= 1");
                    if (s.clip_limit < 1.0)
                        throw ConfigInvalid("clip_limit", "must be >= 1.0");
                } else if constexpr (std::is_same_v<T, DilateStep>) {
                    if (s.radius < 1)
                        throw ConfigInvalid("radius", "must be >= 1");
                } else if constexpr (std::is_same_v<T, PcaStackStep>) {
                    if (s.keep_components < 1)
                        throw ConfigInvalid("keep_components", "must be >= 1");
                } else if constexpr (std::is_same_v<T, ShadowNormalizeStep>) {
                    if (s.shadow_percentile <= 0.0 || s.shadow_percentile >= 50.0)
                        throw ConfigInvalid("shadow_percentile", "must be in (0, 50)");
                    if (s.target_gain_cap < 1.0)
                        throw ConfigInvalid("target_gain_cap", "must be >= 1");
                }
            },
            step);
    }
}

PreprocessPlan PreprocessPlan::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigInvalid("plan", e.what());
    }
    const json& arr = j.is_array() ? j : j.at("steps");
    PreprocessPlan plan;
    for (const json& sj : arr)
        plan.steps.push_back(step_from_json(sj));
    plan.validate();
    return plan;
}

PreprocessPlan PreprocessPlan::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InputUnreadable(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

std::string PreprocessPlan::to_json_string() const {
    json arr = json::array();
    for (const PreprocessStep& step : steps)
        arr.push_back(step_to_json(step));
    return arr.dump(2);
}

GeoRaster apply_plan(const GeoRaster& input, const PreprocessPlan& plan) {
    plan.validate();
    GeoRaster current = input;
    for (const PreprocessStep& step : plan.steps) {
        current = std::visit(
            [&](const auto& s) -> GeoRaster {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, ResampleStep>) {
                    return resample(current, s.gsd, s.kernel);
                } else if constexpr (std::is_same_v<T, NormalizeU8Step>) {
                    return normalize_u8(current);
                } else if constexpr (std::is_same_v<T, ClaheStep>) {
                    return clahe(current, s.tiles_x, s.tiles_y, s.clip_limit);
                } else if constexpr (std::is_same_v<T, InvertStep>) {
                    return invert(current);
                } else if constexpr (std::is_same_v<T, DilateStep>) {
                    return dilate(current, s.radius, s.shape);
                } else if constexpr (std::is_same_v<T, PcaStackStep>) {
                    std::vector<GeoRaster> stack{current};
                    for (const std::string& path : s.inputs)
                        stack.push_back(read_raster(path));
                    PcaResult pca = pca_stack(stack, 1);
                    return pca.components[0];
                } else if constexpr (std::is_same_v<T, HistogramMatchStep>) {
                    return histogram_match(current, read_raster(s.reference_id));
                } else if constexpr (std::is_same_v<T, ShadowNormalizeStep>) {
                    return shadow_normalize(current, s.shadow_percentile, s.target_gain_cap);
                } else if constexpr (std::is_same_v<T, LogTransformStep>) {
                    return log_transform(current);
                } else if constexpr (std::is_same_v<T, SelectBandStep>) {
                    const int idx = select_reference_band(current, s.strategy, s.index);
                    GeoRaster out(current.width(), current.height(), current.depth);
                    out.bands[0] = current.band(idx);
                    out.meta = current.meta;
                    out.mask = current.mask;
                    out.fill_value = current.fill_value;
                    return out;
                }
            },
            step);
    }
    return current;
}

}  // namespace lunareg

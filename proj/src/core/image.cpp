#include "lunareg/core/image.hpp"

namespace lunareg {

float sample_nearest(const ImageF& img, double x, double y) {
    const int xi = static_cast<int>(round_half_up(x));
    const int yi = static_cast<int>(round_half_up(y));
    return img.at_clamped(xi, yi);
}

float sample_bilinear(const ImageF& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double v00 = img.at_clamped(x0, y0);
    const double v10 = img.at_clamped(x0 + 1, y0);
    const double v01 = img.at_clamped(x0, y0 + 1);
    const double v11 = img.at_clamped(x0 + 1, y0 + 1);
    const double top = v00 + fx * (v10 - v00);
    const double bot = v01 + fx * (v11 - v01);
    return static_cast<float>(top + fy * (bot - top));
}

namespace {

// Catmull-Rom weights.
inline double cubic_w(double t) {
    const double a = -0.5;
    t = std::abs(t);
    if (t <= 1.0)
        return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
    if (t < 2.0)
        return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
    return 0.0;
}

}  // namespace

float sample_bicubic(const ImageF& img, double x, double y) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    double acc = 0.0;
    for (int j = -1; j <= 2; ++j) {
        const double wy = cubic_w(y - (y0 + j));
        if (wy == 0.0)
            continue;
        double rowacc = 0.0;
        for (int i = -1; i <= 2; ++i) {
            const double wx = cubic_w(x - (x0 + i));
            if (wx != 0.0)
                rowacc += wx * img.at_clamped(x0 + i, y0 + j);
        }
        acc += wy * rowacc;
    }
    return static_cast<float>(acc);
}

float sample(const ImageF& img, double x, double y, InterpKernel kernel) {
    switch (kernel) {
        case InterpKernel::Nearest: return sample_nearest(img, x, y);
        case InterpKernel::Bilinear: return sample_bilinear(img, x, y);
        case InterpKernel::Bicubic: return sample_bicubic(img, x, y);
    }
    return 0.0f;
}

ImageF gaussian_blur(const ImageF& img, double sigma) {
    if (sigma <= 0.0 || img.empty())
        return img;

    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        kernel[i + radius] = v;
        sum += v;
    }
    for (double& v : kernel)
        v /= sum;

    const int w = img.width(), h = img.height();
    ImageF tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * img.at_clamped(x + i, y);
            tmp.at(x, y) = static_cast<float>(acc);
        }
    }
    ImageF out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp.at_clamped(x, y + i);
            out.at(x, y) = static_cast<float>(acc);
        }
    }
    return out;
}

void scharr_derivatives(const ImageF& img, ImageF& dx, ImageF& dy) {
    const int w = img.width(), h = img.height();
    dx = ImageF(w, h);
    dy = ImageF(w, h);
    // Normalized Scharr: smoothing taps (3, 10, 3)/16, difference taps (-1, 0, 1)/2.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m00 = img.at_clamped(x - 1, y - 1);
            const double m10 = img.at_clamped(x, y - 1);
            const double m20 = img.at_clamped(x + 1, y - 1);
            const double m01 = img.at_clamped(x - 1, y);
            const double m21 = img.at_clamped(x + 1, y);
            const double m02 = img.at_clamped(x - 1, y + 1);
            const double m12 = img.at_clamped(x, y + 1);
            const double m22 = img.at_clamped(x + 1, y + 1);
            dx.at(x, y) = static_cast<float>(
                (3.0 * (m20 - m00) + 10.0 * (m21 - m01) + 3.0 * (m22 - m02)) / 32.0);
            dy.at(x, y) = static_cast<float>(
                (3.0 * (m02 - m00) + 10.0 * (m12 - m10) + 3.0 * (m22 - m20)) / 32.0);
        }
    }
}

ImageF half_sample(const ImageF& img) {
    const int w = std::max(1, img.width() / 2);
    const int h = std::max(1, img.height() / 2);
    ImageF out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

ImageF to_float(const ImageU8& img, float scale) {
    ImageF out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
        out.pixels()[i] = static_cast<float>(img.pixels()[i]) * scale;
    return out;
}

ImageU8 to_u8(const ImageF& img, float scale) {
    ImageU8 out(img.width(), img.height());
    for (std::size_t i = 0; i < img.size(); ++i)
        out.pixels()[i] = quantize_u8(static_cast<double>(img.pixels()[i]) * scale);
    return out;
}

}  // namespace lunareg

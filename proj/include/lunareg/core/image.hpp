#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace lunareg {

/// Row-major single-channel grid. Pixel (x, y) addresses column x of row y;
/// continuous coordinates place the center of pixel (x, y) at exactly (x, y).
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        assert(width >= 0 && height >= 0);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) {
        assert(contains(x, y));
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    const T& at(int x, int y) const {
        assert(contains(x, y));
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    /// Edge-replicated read; any (x, y) is legal.
    T at_clamped(int x, int y) const {
        x = std::clamp(x, 0, width_ - 1);
        y = std::clamp(y, 0, height_ - 1);
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    bool contains(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
    const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    std::vector<T>& pixels() { return data_; }
    const std::vector<T>& pixels() const { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using ImageF = Image<float>;
using ImageU8 = Image<std::uint8_t>;

/// Round-half-up, the quantization convention used everywhere intensities
/// are written back to integer rasters.
inline double round_half_up(double v) { return std::floor(v + 0.5); }

inline std::uint8_t quantize_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(round_half_up(v), 0.0, 255.0));
}

enum class InterpKernel { Nearest, Bilinear, Bicubic };

float sample_nearest(const ImageF& img, double x, double y);
float sample_bilinear(const ImageF& img, double x, double y);
float sample_bicubic(const ImageF& img, double x, double y);
float sample(const ImageF& img, double x, double y, InterpKernel kernel);

/// Separable Gaussian blur with edge-replicated borders. sigma <= 0 copies.
ImageF gaussian_blur(const ImageF& img, double sigma);

/// 3x3 Scharr derivatives, edge replicated.
void scharr_derivatives(const ImageF& img, ImageF& dx, ImageF& dy);

/// Every-other-pixel decimation (even rows/columns).
ImageF half_sample(const ImageF& img);

ImageF to_float(const ImageU8& img, float scale = 1.0f);
ImageU8 to_u8(const ImageF& img, float scale = 1.0f);

}  // namespace lunareg

#include "lunareg/features/phase_congruency.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "lunareg/core/error.hpp"
#include "lunareg/features/sift.hpp"  // gray_unit

namespace lunareg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEpsilon = 1e-4;  ///< guards divisions by tiny amplitude sums

/// RAII FFTW buffers + plans for one image size.
class Fft {
public:
    Fft(int w, int h) : n_(static_cast<std::size_t>(w) * h) {
        in_ = fftw_alloc_complex(n_);
        out_ = fftw_alloc_complex(n_);
        fwd_ = fftw_plan_dft_2d(h, w, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(h, w, in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(in_);
        fftw_free(out_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::vector<std::complex<double>> forward(const ImageF& img) {
        for (std::size_t i = 0; i < n_; ++i) {
            in_[i][0] = img.data()[i];
            in_[i][1] = 0.0;
        }
        fftw_execute(fwd_);
        std::vector<std::complex<double>> spec(n_);
        for (std::size_t i = 0; i < n_; ++i)
            spec[i] = {out_[i][0], out_[i][1]};
        return spec;
    }

    /// Inverse transform, normalized by 1/N.
    std::vector<std::complex<double>> backward(const std::vector<std::complex<double>>& spec) {
        for (std::size_t i = 0; i < n_; ++i) {
            in_[i][0] = spec[i].real();
            in_[i][1] = spec[i].imag();
        }
        fftw_execute(bwd_);
        std::vector<std::complex<double>> result(n_);
        const double inv = 1.0 / static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i)
            result[i] = {out_[i][0] * inv, out_[i][1] * inv};
        return result;
    }

private:
    std::size_t n_;
    fftw_complex* in_;
    fftw_complex* out_;
    fftw_plan fwd_, bwd_;
};

double median_of(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        return 0.5 * (v[mid - 1] + hi);
    }
    return hi;
}

}  // namespace

void PhaseCongruencyParams::validate() const {
    if (n_scales < 1)
        throw ConfigInvalid("n_scales", "must be >= 1");
    if (n_orientations < 2 || n_orientations > 32)
        throw ConfigInvalid("n_orientations", "must be in [2, 32]");
    if (min_wavelength < 2.0)
        throw ConfigInvalid("min_wavelength", "must be >= 2");
    if (mult <= 1.0)
        throw ConfigInvalid("mult", "must be > 1");
    if (sigma_onf <= 0.0 || sigma_onf >= 1.0)
        throw ConfigInvalid("sigma_onf", "must be in (0,1)");
    if (noise_k < 0.0)
        throw ConfigInvalid("noise_k", "must be non-negative");
}

PhaseCongruencyResult phase_congruency(const GeoRaster& img,
                                       const PhaseCongruencyParams& params) {
    return phase_congruency(gray_unit(img), params);
}

PhaseCongruencyResult phase_congruency(const ImageF& gray,
                                       const PhaseCongruencyParams& params) {
    params.validate();
    const int w = gray.width(), h = gray.height();
    if (std::min(w, h) < 16)
        throw ImageTooSmall(16);
    const std::size_t n = static_cast<std::size_t>(w) * h;

    Fft fft(w, h);
    const std::vector<std::complex<double>> spectrum = fft.forward(gray);

    // Frequency-plane geometry (unshifted layout, normalized frequencies).
    std::vector<double> radius(n), sin_theta(n), cos_theta(n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = (x <= w / 2 ? x : x - w) / static_cast<double>(w);
            const double v = (y <= h / 2 ? y : y - h) / static_cast<double>(h);
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            radius[i] = std::sqrt(u * u + v * v);
            const double th = std::atan2(-v, u);  // image y axis points down
            sin_theta[i] = std::sin(th);
            cos_theta[i] = std::cos(th);
        }
    radius[0] = 1.0;  // silence log(0) at DC; filters are zeroed there anyway

    // Radial log-Gabor profiles with a high-frequency Butterworth rolloff.
    const double log_sigma = std::log(params.sigma_onf);
    std::vector<std::vector<double>> radial(params.n_scales, std::vector<double>(n));
    for (int s = 0; s < params.n_scales; ++s) {
        const double f0 = 1.0 / (params.min_wavelength * std::pow(params.mult, s));
        for (std::size_t i = 0; i < n; ++i) {
            const double lr = std::log(radius[i] / f0);
            const double lowpass = 1.0 / (1.0 + std::pow(radius[i] / 0.45, 30.0));
            radial[s][i] = std::exp(-(lr * lr) / (2.0 * log_sigma * log_sigma)) * lowpass;
        }
        radial[s][0] = 0.0;
    }

    const double theta_sigma = 0.65 * kPi / params.n_orientations;

    PhaseCongruencyResult out;
    out.pc_map = ImageF(w, h);
    out.mim = ImageU8(w, h);
    out.orientation_energy.assign(params.n_orientations, ImageF(w, h));

    std::vector<double> total_energy(n, 0.0), total_amplitude(n, 0.0);
    std::vector<double> best_amp(n, -1.0);
    std::vector<int> best_orient(n, 0);

    std::vector<double> sum_e(n), sum_o(n), sum_a(n), max_a(n);
    std::vector<std::complex<double>> filtered(n);
    std::vector<std::vector<std::complex<double>>> eo(params.n_scales);

    for (int o = 0; o < params.n_orientations; ++o) {
        const double alpha = o * kPi / params.n_orientations;
        const double ca = std::cos(alpha), sa = std::sin(alpha);

        // Angular falloff around this filter direction.
        std::vector<double> spread(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double ds = sin_theta[i] * ca - cos_theta[i] * sa;
            const double dc = cos_theta[i] * ca + sin_theta[i] * sa;
            const double dtheta = std::abs(std::atan2(ds, dc));
            spread[i] = std::exp(-(dtheta * dtheta) / (2.0 * theta_sigma * theta_sigma));
        }

        std::fill(sum_e.begin(), sum_e.end(), 0.0);
        std::fill(sum_o.begin(), sum_o.end(), 0.0);
        std::fill(sum_a.begin(), sum_a.end(), 0.0);
        std::fill(max_a.begin(), max_a.end(), 0.0);
        double tau = 0.0;

        for (int s = 0; s < params.n_scales; ++s) {
            for (std::size_t i = 0; i < n; ++i)
                filtered[i] = spectrum[i] * (radial[s][i] * spread[i]);
            eo[s] = fft.backward(filtered);

            std::vector<double> amp(n);
            for (std::size_t i = 0; i < n; ++i) {
                amp[i] = std::abs(eo[s][i]);
                sum_e[i] += eo[s][i].real();
                sum_o[i] += eo[s][i].imag();
                sum_a[i] += amp[i];
                max_a[i] = std::max(max_a[i], amp[i]);
            }
            if (s == 0)
                tau = median_of(amp) / std::sqrt(std::log(4.0));
        }

        // Rayleigh-model noise threshold from the smallest-scale response.
        const double inv_mult = 1.0 / params.mult;
        const double total_tau =
            tau * (1.0 - std::pow(inv_mult, params.n_scales)) / (1.0 - inv_mult);
        const double noise_mean = total_tau * std::sqrt(kPi / 2.0);
        const double noise_sigma = total_tau * std::sqrt((4.0 - kPi) / 2.0);
        const double threshold = noise_mean + params.noise_k * noise_sigma;

        ImageF& energy_map = out.orientation_energy[o];
        for (std::size_t i = 0; i < n; ++i) {
            const double x_energy =
                std::sqrt(sum_e[i] * sum_e[i] + sum_o[i] * sum_o[i]) + kEpsilon;
            const double mean_e = sum_e[i] / x_energy;
            const double mean_o = sum_o[i] / x_energy;

            // Project each scale's response on the mean phase vector and
            // penalize the deviation orthogonal to it.
            double energy = 0.0;
            for (int s = 0; s < params.n_scales; ++s) {
                const double re = eo[s][i].real();
                const double im = eo[s][i].imag();
                energy += re * mean_e + im * mean_o - std::abs(re * mean_o - im * mean_e);
            }
            energy = std::max(energy - threshold, 0.0);

            // Frequency-spread weighting: single-scale responses are damped.
            double width = 1.0;
            if (params.n_scales > 1)
                width = (sum_a[i] / (max_a[i] + kEpsilon) - 1.0) / (params.n_scales - 1);
            const double weight = 1.0 / (1.0 + std::exp(10.0 * (0.5 - width)));
            energy *= weight;

            energy_map.data()[i] = static_cast<float>(energy);
            total_energy[i] += energy;
            total_amplitude[i] += sum_a[i];

            if (sum_a[i] > best_amp[i]) {  // strict ">" keeps the lowest index on ties
                best_amp[i] = sum_a[i];
                best_orient[i] = o;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double pc = total_energy[i] / (total_amplitude[i] + kEpsilon);
        out.pc_map.data()[i] = static_cast<float>(std::clamp(pc, 0.0, 1.0));
        out.mim.data()[i] = static_cast<std::uint8_t>(best_orient[i] + 1);
    }
    return out;
}

}  // namespace lunareg

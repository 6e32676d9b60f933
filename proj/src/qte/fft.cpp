#include "qte/fft.hpp"

#include <numbers>

#include "qte/common.hpp"

namespace qte {

Radix2Fft::Radix2Fft(std::size_t n) : n_(n) {
    require(admissible(n), "FFT length must be a power of two >= 2");
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(n);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void Radix2Fft::transform(std::vector<std::complex<double>>& data, bool invert) const {
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = twiddles_[k * stride];
                if (invert) w = std::conj(w);
                const std::complex<double> u = data[start + k];
                const std::complex<double> t = w * data[start + k + len / 2];
                data[start + k] = u + t;
                data[start + k + len / 2] = u - t;
            }
        }
    }
    if (invert) {
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (auto& v : data) v *= inv_n;
    }
}

void Radix2Fft::forward(std::vector<std::complex<double>>& data) const {
    require(data.size() == n_, "FFT buffer size mismatch");
    transform(data, false);
}

void Radix2Fft::inverse(std::vector<std::complex<double>>& data) const {
    require(data.size() == n_, "FFT buffer size mismatch");
    transform(data, true);
}

std::vector<std::complex<double>> Radix2Fft::spectrum(std::span<const double> x) const {
    std::vector<std::complex<double>> data;
    spectrum_into(x, data);
    return data;
}

void Radix2Fft::spectrum_into(std::span<const double> x,
                              std::vector<std::complex<double>>& out) const {
    require(x.size() == n_, "FFT buffer size mismatch");
    out.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = {x[i], 0.0};
    transform(out, false);
}

void circular_cross_correlation(const Radix2Fft& fft,
                                std::span<const std::complex<double>> x_spec,
                                std::span<const std::complex<double>> y_spec,
                                std::vector<std::complex<double>>& scratch,
                                std::span<double> c_out) {
    const std::size_t n = fft.size();
    scratch.resize(n);
    for (std::size_t f = 0; f < n; ++f) scratch[f] = std::conj(x_spec[f]) * y_spec[f];
    fft.inverse(scratch);
    for (std::size_t k = 0; k < n; ++k) c_out[k] = scratch[k].real();
}

void circular_cross_correlation_direct(std::span<const double> x, std::span<const double> y,
                                       std::span<double> c_out) {
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += x[j] * y[(j + k) % n];
        c_out[k] = s;
    }
}

}  // namespace qte

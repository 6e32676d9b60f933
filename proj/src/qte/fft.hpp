#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qte {

/// Iterative radix-2 FFT with precomputed twiddles and bit-reversal table.
/// Only power-of-two lengths are admissible; callers fall back to direct
/// O(N^2) evaluation for other lengths.
class Radix2Fft {
public:
    explicit Radix2Fft(std::size_t n);

    static bool admissible(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

    std::size_t size() const { return n_; }

    /// In-place forward transform: X[f] = sum_j x[j] e^{-2*pi*i*jf/n}.
    void forward(std::vector<std::complex<double>>& data) const;

    /// In-place inverse transform, including the 1/n factor.
    void inverse(std::vector<std::complex<double>>& data) const;

    /// Spectrum of a real signal.
    std::vector<std::complex<double>> spectrum(std::span<const double> x) const;

    /// Same, into a reusable buffer.
    void spectrum_into(std::span<const double> x, std::vector<std::complex<double>>& out) const;

private:
    void transform(std::vector<std::complex<double>>& data, bool invert) const;

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddles_;  // e^{-2*pi*i*k/n}, k in [0, n/2)
};

/// Fills c[k] = sum_j x_spec-conjugated correlation, i.e. the circular
/// cross-correlation c[k] = sum_j x[j] * y[(j+k) mod n], computed as
/// IDFT(conj(X) .* Y). `scratch` must have size n.
void circular_cross_correlation(const Radix2Fft& fft,
                                std::span<const std::complex<double>> x_spec,
                                std::span<const std::complex<double>> y_spec,
                                std::vector<std::complex<double>>& scratch,
                                std::span<double> c_out);

/// Direct O(N^2) circular cross-correlation, for lengths with no FFT plan.
void circular_cross_correlation_direct(std::span<const double> x, std::span<const double> y,
                                       std::span<double> c_out);

}  // namespace qte

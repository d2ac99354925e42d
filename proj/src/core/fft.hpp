#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "core/errors.hpp"

namespace kinetic {

/// In-place iterative radix-2 FFT. n must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw ContractError("fft_pow2: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

/**
 * Periodic shift of a real sequence by a (fractional) number of samples via
 * trigonometric interpolation: out[i] = in[(i - shift) mod n], exact for
 * band-limited data and exactly l2-norm preserving.
 */
class FourierShifter {
public:
    explicit FourierShifter(std::size_t n) : n_(n), buf_(n) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw ConfigError("spectral transport requires a power-of-two axis size");
    }

    void shift(const double* in, double* out, double shift_samples) {
        const double pi = 3.14159265358979323846264338327950288;
        for (std::size_t i = 0; i < n_; ++i) buf_[i] = in[i];
        fft_pow2(buf_, false);
        for (std::size_t k = 0; k < n_; ++k) {
            // signed frequency; Nyquist bin kept real to preserve realness
            const std::size_t half = n_ / 2;
            double kk = (k <= half) ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n_);
            if (k == half) {
                buf_[k] *= std::cos(2.0 * pi * kk * shift_samples / static_cast<double>(n_));
                continue;
            }
            const double ang = -2.0 * pi * kk * shift_samples / static_cast<double>(n_);
            buf_[k] *= std::complex<double>(std::cos(ang), std::sin(ang));
        }
        fft_pow2(buf_, true);
        for (std::size_t i = 0; i < n_; ++i) out[i] = buf_[i].real();
    }

private:
    std::size_t n_;
    std::vector<std::complex<double>> buf_;
};

} // namespace kinetic

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ftlab::detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 Cooley-Tukey; size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft_radix2: size not a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
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
        const double s = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= s;
    }
}

// Arbitrary-size DFT via Bluestein's chirp-z reduction to a power-of-two
// convolution. Chirp phases use j^2 mod 2n to keep angles accurate for
// large j.
inline void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t j2 = (static_cast<std::uint64_t>(j) * j) % (2 * n);
        const double ang = sign * std::numbers::pi * static_cast<double>(j2) / static_cast<double>(n);
        chirp[j] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
    const std::size_t m = next_power_of_two(2 * n - 1);
    std::vector<std::complex<double>> p(m, {0.0, 0.0}), q(m, {0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) p[j] = a[j] * chirp[j];
    q[0] = std::conj(chirp[0]);
    for (std::size_t j = 1; j < n; ++j) q[j] = q[m - j] = std::conj(chirp[j]);
    fft_radix2(p, false);
    fft_radix2(q, false);
    for (std::size_t j = 0; j < m; ++j) p[j] *= q[j];
    fft_radix2(p, true);
    for (std::size_t j = 0; j < n; ++j) a[j] = p[j] * chirp[j];
    if (inverse) {
        const double s = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= s;
    }
}

// Forward DFT: X_k = sum_j x_j exp(-2*pi*i*j*k/n); inverse carries 1/n.
inline void fft(std::vector<std::complex<double>>& a, bool inverse = false) {
    if (a.empty()) return;
    if (is_power_of_two(a.size()))
        fft_radix2(a, inverse);
    else
        fft_bluestein(a, inverse);
}

}  // namespace ftlab::detail

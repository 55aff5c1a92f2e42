#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ftlab/rng.hpp"

namespace ftlab {

struct Kde1D {
    std::vector<double> z;        // evaluation grid
    std::vector<double> density;  // KDE values on z
    double bandwidth = 0.0;
    double sample_mean = 0.0;
    double sample_sd = 0.0;

    // Trapezoid mass over the evaluation grid.
    double normalization() const {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < z.size(); ++i)
            acc += 0.5 * (density[i] + density[i + 1]) * (z[i + 1] - z[i]);
        return acc;
    }
};

namespace detail {

inline double gaussian_kernel(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace detail

// Gaussian-kernel KDE with Silverman bandwidth 1.06 sigma N^{-1/5},
// evaluated on n_grid points spanning mean +- span_sigmas * sigma.
inline Kde1D kde_gaussian(const std::vector<double>& samples, std::size_t n_grid = 512,
                          double span_sigmas = 5.0) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("kde_gaussian: need at least two samples");
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    const double h = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);

    Kde1D out;
    out.bandwidth = h;
    out.sample_mean = mean;
    out.sample_sd = sd;
    out.z.resize(n_grid);
    out.density.assign(n_grid, 0.0);
    const double lo = mean - span_sigmas * sd, hi = mean + span_sigmas * sd;
    for (std::size_t i = 0; i < n_grid; ++i)
        out.z[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    const double inv = 1.0 / (static_cast<double>(n) * h);
    for (double v : samples) {
        // kernel support truncated at 8h: tail mass < 1e-15
        const double zi_lo = v - 8.0 * h, zi_hi = v + 8.0 * h;
        const double step = (hi - lo) / static_cast<double>(n_grid - 1);
        const auto i0 = static_cast<std::ptrdiff_t>(std::ceil((zi_lo - lo) / step));
        const auto i1 = static_cast<std::ptrdiff_t>(std::floor((zi_hi - lo) / step));
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, i0);
             i <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_grid) - 1, i1); ++i)
            out.density[static_cast<std::size_t>(i)] +=
                inv * detail::gaussian_kernel((out.z[static_cast<std::size_t>(i)] - v) / h);
    }
    return out;
}

// Pointwise bootstrap confidence halfwidth for a KDE, from multinomial
// resamples evaluated through a fine binned grid (linear in N per
// replicate instead of N x grid kernel sums).
inline std::vector<double> kde_bootstrap_band(const std::vector<double>& samples,
                                              const Kde1D& base, std::size_t n_boot,
                                              double confidence, std::uint64_t seed) {
    const std::size_t n = samples.size();
    const double h = base.bandwidth;
    const std::size_t nb = 4096;
    const double lo = base.z.front() - 8.0 * h;
    const double hi = base.z.back() + 8.0 * h;
    const double bw = (hi - lo) / static_cast<double>(nb);

    std::vector<std::uint32_t> sample_bin(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = static_cast<std::ptrdiff_t>((samples[i] - lo) / bw);
        sample_bin[i] = static_cast<std::uint32_t>(
            std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(nb) - 1));
    }

    // Per z-gridpoint kernel weights against bin centres, shared by all
    // replicates.
    struct Row {
        std::size_t first;
        std::vector<double> w;
    };
    std::vector<Row> rows(base.z.size());
    const double inv = 1.0 / (static_cast<double>(n) * h);
    for (std::size_t i = 0; i < base.z.size(); ++i) {
        const double zi = base.z[i];
        const auto j0 = static_cast<std::ptrdiff_t>((zi - 8.0 * h - lo) / bw);
        const auto j1 = static_cast<std::ptrdiff_t>((zi + 8.0 * h - lo) / bw) + 1;
        const std::size_t f = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, j0));
        const std::size_t l =
            static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nb) - 1, j1));
        rows[i].first = f;
        rows[i].w.resize(l - f + 1);
        for (std::size_t j = f; j <= l; ++j) {
            const double c = lo + (static_cast<double>(j) + 0.5) * bw;
            rows[i].w[j - f] = inv * detail::gaussian_kernel((zi - c) / h);
        }
    }

    std::vector<std::vector<double>> reps(n_boot);
    std::vector<double> counts(nb);
    for (std::size_t b = 0; b < n_boot; ++b) {
        RngStream rng(seed, b);
        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto pick = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(n));
            counts[sample_bin[std::min(pick, n - 1)]] += 1.0;
        }
        reps[b].resize(base.z.size());
        for (std::size_t i = 0; i < base.z.size(); ++i) {
            double acc = 0.0;
            const auto& row = rows[i];
            for (std::size_t j = 0; j < row.w.size(); ++j)
                acc += row.w[j] * counts[row.first + j];
            reps[b][i] = acc;
        }
    }

    std::vector<double> band(base.z.size());
    std::vector<double> col(n_boot);
    const double alpha = 0.5 * (1.0 - confidence);
    for (std::size_t i = 0; i < base.z.size(); ++i) {
        for (std::size_t b = 0; b < n_boot; ++b) col[b] = reps[b][i];
        std::sort(col.begin(), col.end());
        const auto q = [&](double p) {
            const double r = p * static_cast<double>(n_boot - 1);
            const auto k = static_cast<std::size_t>(r);
            const double frac = r - static_cast<double>(k);
            return k + 1 < n_boot ? col[k] * (1.0 - frac) + col[k + 1] * frac : col[k];
        };
        band[i] = 0.5 * (q(1.0 - alpha) - q(alpha));
    }
    return band;
}

// Product-kernel 2D KDE with per-axis Silverman bandwidth
// sigma_i N^{-1/6}, evaluated pointwise.
struct Kde2D {
    std::vector<std::array<double, 2>> samples;
    std::array<double, 2> bandwidth{};

    static Kde2D fit(std::vector<std::array<double, 2>> pts) {
        if (pts.size() < 2) throw std::invalid_argument("Kde2D: need at least two samples");
        Kde2D k;
        const double n = static_cast<double>(pts.size());
        for (int c = 0; c < 2; ++c) {
            double mean = 0.0, var = 0.0;
            for (const auto& p : pts) mean += p[c];
            mean /= n;
            for (const auto& p : pts) var += (p[c] - mean) * (p[c] - mean);
            var /= (n - 1.0);
            k.bandwidth[c] = std::sqrt(var) * std::pow(n, -1.0 / 6.0);
        }
        k.samples = std::move(pts);
        return k;
    }

    double operator()(double x, double y) const {
        const double hx = bandwidth[0], hy = bandwidth[1];
        double acc = 0.0;
        for (const auto& p : samples)
            acc += detail::gaussian_kernel((x - p[0]) / hx) *
                   detail::gaussian_kernel((y - p[1]) / hy);
        return acc / (static_cast<double>(samples.size()) * hx * hy);
    }
};

}  // namespace ftlab

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ftlab/detail/quadrature.hpp"
#include "ftlab/time_grid.hpp"

namespace ftlab {

// Normalization of the H > 1/2 Volterra kernel,
// c_H = sqrt(H (2H-1) / Beta(2-2H, H-1/2)).
inline double volterra_c_H(double H) {
    if (!(H > 0.5 && H < 1.0))
        throw std::domain_error("volterra_c_H: requires H in (1/2, 1)");
    return std::sqrt(H * (2.0 * H - 1.0) / std::beta(2.0 - 2.0 * H, H - 0.5));
}

namespace detail {

// Head of int_s^{s+h} (u-s)^{H-3/2} u^{H-1/2} du with u^{H-1/2}
// expanded locally around u = s; valid for h << s.
inline double volterra_head(double s, double h, double H) {
    const double a = H - 0.5;
    return std::pow(s, a) * std::pow(h, a) / a +
           a * std::pow(s, a - 1.0) * std::pow(h, a + 1.0) / (a + 1.0);
}

// int_s^t (u-s)^{H-3/2} u^{H-1/2} du: analytic head over a tiny first
// subinterval, then Gauss-Legendre on geometrically growing pieces
// away from the integrable endpoint singularity. Works in the
// distance variable x = u - s so the singular factor never suffers
// subtractive cancellation near s.
inline double volterra_inner_integral(double t, double s, double H) {
    const double len = t - s;
    const double h0 = std::min(len * 0x1.0p-40, 0.01 * s);
    double total = volterra_head(s, h0, H);
    const auto f = [s, H](double x) {
        return std::pow(x, H - 1.5) * std::pow(s + x, H - 0.5);
    };
    double lo = h0, width = h0;
    while (lo < len) {
        const double hi = std::min(len, lo + width);
        total += gl16().integrate(f, lo, hi);
        lo = hi;
        width *= 2.0;
    }
    return total;
}

}  // namespace detail

// Volterra kernel K_H(t, s) of the Wiener-integral representation of
// fBm. Supported for H = 1/2 (identically 1) and H > 1/2; for
// H < 1/2 the representation's constant is not pinned, so this
// reports unsupported rather than guess a normalization.
inline double kernel_K(double t, double s, double H) {
    if (!(H > 0.0 && H < 1.0))
        throw std::domain_error("kernel_K: Hurst index must lie in (0, 1)");
    if (!(s > 0.0 && s < t))
        throw std::domain_error("kernel_K: requires 0 < s < t");
    if (H == 0.5) return 1.0;
    if (H < 0.5)
        throw std::domain_error("kernel_K: unsupported for H < 1/2");
    return volterra_c_H(H) * std::pow(s, 0.5 - H) * detail::volterra_inner_integral(t, s, H);
}

namespace detail {

// K_H(t_j, s) for all grid nodes t_j > s in one upward sweep; the
// inner integral is accumulated cell by cell so the whole row costs
// O(n) quadrature panels.
inline std::vector<double> volterra_row(const TimeGrid& grid, double H, double s) {
    const std::size_t n = grid.n_steps();
    std::vector<double> row(n + 1, 0.0);
    if (H == 0.5) {
        for (std::size_t j = 0; j <= n; ++j) row[j] = grid.node(j) > s ? 1.0 : 0.0;
        return row;
    }
    const double c = volterra_c_H(H) * std::pow(s, 0.5 - H);
    const auto f = [s, H](double u) {
        return std::pow(u - s, H - 1.5) * std::pow(u, H - 0.5);
    };
    double acc = 0.0;
    bool started = false;
    for (std::size_t j = 1; j <= n; ++j) {
        const double tj = grid.node(j);
        if (!(tj > s)) continue;
        if (!started) {
            acc = volterra_inner_integral(tj, s, H);
            started = true;
        } else {
            acc += gl8().integrate(f, grid.node(j - 1), tj);
        }
        row[j] = c * acc;
    }
    return row;
}

}  // namespace detail

}  // namespace ftlab

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ftlab {

namespace detail {

inline std::size_t eps_to_lag(double eps, double dt) {
    if (!(eps > 0.0)) throw std::invalid_argument("symmetric integral: epsilon must be > 0");
    const double ratio = eps / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio)
        throw std::invalid_argument(
            "symmetric integral: epsilon must be a positive multiple of the grid step");
    return static_cast<std::size_t>(rounded);
}

}  // namespace detail

// Trapezoid evaluation of the epsilon-symmetric integral
// int_0^t Y_s (X_{s+eps} - X_{s-eps}) / (2 eps) ds
// with X extended constantly outside [0, t].
inline double symmetric_integral(const std::vector<double>& y, const std::vector<double>& x,
                                 double dt, double eps) {
    if (y.size() != x.size() || y.size() < 2)
        throw std::invalid_argument("symmetric integral: Y and X must share the grid");
    const std::size_t n = y.size() - 1;
    const std::size_t m = detail::eps_to_lag(eps, dt);
    const auto x_ext = [&](std::ptrdiff_t k) {
        if (k < 0) return x.front();
        if (k > static_cast<std::ptrdiff_t>(n)) return x.back();
        return x[static_cast<std::size_t>(k)];
    };
    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
        const double diff = x_ext(static_cast<std::ptrdiff_t>(k + m)) -
                            x_ext(static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(m));
        acc += w * y[k] * diff;
    }
    return acc * dt / (2.0 * eps);
}

struct SymmetricIntegralLimit {
    std::array<double, 3> eps_values{};  // eps0, eps0/2, eps0/4
    std::array<double, 3> values{};
    double extrapolated = 0.0;
};

// Limit estimate by Richardson extrapolation over eps in
// {eps0, eps0/2, eps0/4}, eliminating the O(eps) and O(eps^2) terms.
inline SymmetricIntegralLimit symmetric_integral_limit(const std::vector<double>& y,
                                                       const std::vector<double>& x,
                                                       double dt, double eps0) {
    const std::size_t m = detail::eps_to_lag(eps0, dt);
    if (m % 4 != 0)
        throw std::invalid_argument(
            "symmetric integral: extrapolation needs epsilon divisible by 4 grid steps");
    SymmetricIntegralLimit out;
    out.eps_values = {eps0, 0.5 * eps0, 0.25 * eps0};
    for (int i = 0; i < 3; ++i) out.values[i] = symmetric_integral(y, x, dt, out.eps_values[i]);
    out.extrapolated = (8.0 * out.values[2] - 6.0 * out.values[1] + out.values[0]) / 3.0;
    return out;
}

}  // namespace ftlab

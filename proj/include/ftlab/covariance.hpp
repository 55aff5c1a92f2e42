#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "ftlab/time_grid.hpp"

namespace ftlab {

inline void check_hurst(double H) {
    if (!(H > 0.0 && H < 1.0))
        throw std::domain_error("Hurst index must lie in (0, 1)");
}

// R_H(t, s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
inline double fbm_covariance(double t, double s, double H) {
    check_hurst(H);
    if (t < 0.0 || s < 0.0)
        throw std::domain_error("fbm_covariance: times must be nonnegative");
    const double a = 2.0 * H;
    return 0.5 * (std::pow(t, a) + std::pow(s, a) - std::pow(std::abs(t - s), a));
}

// Covariance matrix of (B_{t_1}, ..., B_{t_n}); t_0 = 0 is excluded
// since B_0 = 0 identically.
inline Eigen::MatrixXd gram_matrix(const TimeGrid& grid, double H) {
    check_hurst(H);
    const auto n = static_cast<Eigen::Index>(grid.n_steps());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double tj = grid.node(static_cast<std::size_t>(j) + 1);
        for (Eigen::Index k = 0; k <= j; ++k) {
            const double tk = grid.node(static_cast<std::size_t>(k) + 1);
            const double v = fbm_covariance(tj, tk, H);
            g(j, k) = v;
            g(k, j) = v;
        }
    }
    return g;
}

}  // namespace ftlab

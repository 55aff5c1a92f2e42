#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ftlab/detail/quadrature.hpp"
#include "ftlab/fbm.hpp"

namespace testsupport {

struct MomentStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    std::size_t n = 0;
};

inline MomentStats moments(const std::vector<double>& xs) {
    MomentStats s;
    s.n = xs.size();
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(s.n);
    for (double x : xs) s.variance += (x - s.mean) * (x - s.mean);
    s.variance /= static_cast<double>(s.n - 1);
    return s;
}

// Empirical second-moment matrix (1/N) sum B B^T over an ensemble of
// fBm paths, on nodes t_1..t_n.
inline Eigen::MatrixXd empirical_gram(const ftlab::FbmSampler& sampler, std::size_t n_paths,
                                      std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(sampler.grid().n_steps());
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const ftlab::FbmPath path = sampler.sample(seed, p);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k <= j; ++k)
                acc(j, k) += path.values[static_cast<std::size_t>(j) + 1] *
                             path.values[static_cast<std::size_t>(k) + 1];
    }
    acc /= static_cast<double>(n_paths);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = j + 1; k < n; ++k) acc(j, k) = acc(k, j);
    return acc;
}

// Max over entries of |emp - exact| / SE, with the Gaussian fourth-moment
// standard error SE = sqrt((G_jj G_kk + G_jk^2) / N).
inline double max_gram_z(const Eigen::MatrixXd& emp, const Eigen::MatrixXd& exact,
                         std::size_t n_paths) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < exact.rows(); ++j) {
        for (Eigen::Index k = 0; k <= j; ++k) {
            const double se = std::sqrt(
                (exact(j, j) * exact(k, k) + exact(j, k) * exact(j, k)) /
                static_cast<double>(n_paths));
            worst = std::max(worst, std::abs(emp(j, k) - exact(j, k)) / se);
        }
    }
    return worst;
}

// Independent oracle for the H > 1/2 Volterra kernel: tanh-sinh
// quadrature in distance-to-endpoint form, so the integrable
// singularity at u = s is resolved without cancellation. Entirely
// separate machinery from the implementation's analytic-head scheme.
inline double kernel_K_oracle(double t, double s, double H) {
    const double len = t - s;
    // int_0^len d^{H-3/2} (s+d)^{H-1/2} dd; node distance from the
    // singular endpoint is 1 - tanh(z) = 2 / (exp(2z) + 1), exact for
    // distances far below double-subtraction resolution.
    const double h = 1.0 / 128.0;
    double sum = 0.0;
    for (int k = -4000; k <= 4000; ++k) {
        const double y = k * h;
        const double z = M_PI_2 * std::sinh(y);
        if (std::abs(z) > 350.0) continue;  // weight underflows
        const double d = len / (std::exp(2.0 * z) + 1.0);
        if (d <= 0.0 || d >= len) continue;
        const double w = len * M_PI_2 * std::cosh(y) /
                         (2.0 * std::pow(std::cosh(z), 2));
        sum += w * std::pow(d, H - 1.5) * std::pow(s + d, H - 0.5);
    }
    const double c_h = std::sqrt(H * (2.0 * H - 1.0) / std::beta(2.0 - 2.0 * H, H - 0.5));
    return c_h * std::pow(s, 0.5 - H) * sum * h;
}

}  // namespace testsupport

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ftlab {

// Drift b(t, x) together with its spatial Jacobian and certified
// bounds. The flow and Malliavin layers rely on sup_norm_b_prime being
// a true bound; presets certify it analytically.
struct DriftField {
    std::size_t dim = 1;
    std::function<void(double, std::span<const double>, std::span<double>)> b;
    // Row-major d x d Jacobian, jac[i*dim + j] = d b^i / d x_j.
    std::function<void(double, std::span<const double>, std::span<double>)> b_prime;
    double sup_norm_b_prime = 0.0;
    double sup_norm_b = std::numeric_limits<double>::infinity();
    bool divergence_free = false;
    std::string name;
};

inline DriftField make_drift_1d(std::string name,
                                std::function<double(double, double)> b,
                                std::function<double(double, double)> b_prime,
                                double sup_norm_b, double sup_norm_b_prime,
                                bool divergence_free = false) {
    DriftField d;
    d.dim = 1;
    d.name = std::move(name);
    d.b = [f = std::move(b)](double t, std::span<const double> x, std::span<double> out) {
        out[0] = f(t, x[0]);
    };
    d.b_prime = [f = std::move(b_prime)](double t, std::span<const double> x,
                                          std::span<double> out) {
        out[0] = f(t, x[0]);
    };
    d.sup_norm_b = sup_norm_b;
    d.sup_norm_b_prime = sup_norm_b_prime;
    d.divergence_free = divergence_free;
    return d;
}

struct DriftValidation {
    double max_jacobian_rel_error = 0.0;  // finite differences vs b_prime
    double max_jacobian_norm = 0.0;       // max row-sum norm over samples
    bool within_certified_bound = true;
};

// Self-consistency check on sampled (t, x): central finite differences
// of b against the declared Jacobian, and the Jacobian norm against
// the certified bound.
inline DriftValidation validate_drift(const DriftField& drift,
                                      std::span<const double> times,
                                      const std::vector<std::vector<double>>& points,
                                      double fd_step = 1e-5) {
    DriftValidation r;
    const std::size_t d = drift.dim;
    std::vector<double> jac(d * d), bp(d), bm(d), xp(d), xm(d);
    for (double t : times) {
        for (const auto& x : points) {
            if (x.size() != d) throw std::invalid_argument("validate_drift: bad point dim");
            drift.b_prime(t, x, jac);
            double norm = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < d; ++j) row += std::abs(jac[i * d + j]);
                norm = std::max(norm, row);
            }
            r.max_jacobian_norm = std::max(r.max_jacobian_norm, norm);
            for (std::size_t j = 0; j < d; ++j) {
                xp.assign(x.begin(), x.end());
                xm.assign(x.begin(), x.end());
                xp[j] += fd_step;
                xm[j] -= fd_step;
                drift.b(t, xp, bp);
                drift.b(t, xm, bm);
                for (std::size_t i = 0; i < d; ++i) {
                    const double fd = (bp[i] - bm[i]) / (2.0 * fd_step);
                    const double scale = std::max(1.0, std::abs(jac[i * d + j]));
                    r.max_jacobian_rel_error = std::max(
                        r.max_jacobian_rel_error, std::abs(fd - jac[i * d + j]) / scale);
                }
            }
        }
    }
    r.within_certified_bound = r.max_jacobian_norm <= drift.sup_norm_b_prime * (1.0 + 1e-12);
    return r;
}

}  // namespace ftlab

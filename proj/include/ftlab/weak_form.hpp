#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftlab/drift.hpp"
#include "ftlab/fbm.hpp"
#include "ftlab/flow.hpp"
#include "ftlab/symmetric_integral.hpp"
#include "ftlab/transport.hpp"

namespace ftlab {

// Smooth compactly supported test function.
struct TestFunction {
    std::function<double(double)> phi;
    std::function<double(double)> phi_prime;
    double support_lo = -1.0;
    double support_hi = 1.0;
    std::string name;
};

inline TestFunction bump_test_function(double center = 0.0, double halfwidth = 1.0) {
    const auto phi = [center, halfwidth](double x) {
        const double u = (x - center) / halfwidth;
        if (std::abs(u) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u));
    };
    const auto phi_prime = [center, halfwidth, phi](double x) {
        const double u = (x - center) / halfwidth;
        if (std::abs(u) >= 1.0) return 0.0;
        const double q = 1.0 - u * u;
        return phi(x) * (-2.0 * u / (q * q)) / halfwidth;
    };
    return TestFunction{phi, phi_prime, center - halfwidth, center + halfwidth,
                        "bump"};
}

struct WeakFormOptions {
    std::size_t n_space = 801;  // Simpson nodes over the padded window
    double eps_factor = 4.0;    // eps0 = eps_factor * dt
    FlowOptions flow{};
};

struct WeakFormResult {
    double residual = 0.0;
    double lhs = 0.0;
    double term_init = 0.0;
    double term_drift = 0.0;
    double term_slope = 0.0;  // the b'(s,x) commutator-style term
    double term_noise = 0.0;
    double scale = 0.0;     // largest term magnitude
    double dt = 0.0;
    double dx = 0.0;
    double eps0 = 0.0;
    bool coverage_ok = true;
    SymmetricIntegralLimit noise_detail;
};

// Evaluates both sides of the weak formulation for
// u(s, x) = u0(Y_{0,s}(x)). All spatial integrals are pushed forward
// along the characteristics: with x = X_{0,s}(y),
//   int u(s,x) g(x) dx  =  int u0(y) g(X_{0,s}(y)) X'_{0,s}(y) dy,
// so one forward solve per quadrature node y covers every time slice.
// The y-window pads supp(phi) by 4 (||b|| T + max |B|) so its image
// covers the support at all times.
inline WeakFormResult weak_form_residual(const InitialDatum& u0, const DriftField& drift,
                                         const FbmVectorPath& driving,
                                         const TestFunction& phi, std::size_t t_index,
                                         const WeakFormOptions& opts = {}) {
    if (drift.dim != 1)
        throw std::invalid_argument("weak_form_residual: defined for d = 1");
    if (!std::isfinite(drift.sup_norm_b))
        throw std::invalid_argument(
            "weak_form_residual: drift needs a finite certified sup norm");
    if (t_index < 1 || t_index > driving.grid.n_steps())
        throw std::invalid_argument("weak_form_residual: bad t_index");

    const TimeGrid& grid = driving.grid;
    const double dt = grid.dt();
    const auto& bvals = driving.components[0].values;
    double max_b = 0.0;
    for (std::size_t k = 0; k <= t_index; ++k) max_b = std::max(max_b, std::abs(bvals[k]));
    const double pad = 4.0 * (drift.sup_norm_b * grid.t_end() + max_b);

    const std::size_t ny = std::max<std::size_t>(3, opts.n_space | 1);
    const double y_lo = phi.support_lo - pad;
    const double y_hi = phi.support_hi + pad;
    const double dx = (y_hi - y_lo) / static_cast<double>(ny - 1);

    WeakFormResult out;
    out.dt = dt;
    out.dx = dx;
    out.eps0 = opts.eps_factor * dt;

    std::vector<double> drift_term(t_index + 1, 0.0);
    std::vector<double> slope_term(t_index + 1, 0.0);
    std::vector<double> noise_term(t_index + 1, 0.0);
    std::vector<double> bbuf(1), bpbuf(1);

    for (std::size_t j = 0; j < ny; ++j) {
        const double y = y_lo + dx * static_cast<double>(j);
        const double w =
            (j == 0 || j == ny - 1) ? dx / 3.0 : (j % 2 == 1 ? 4.0 * dx / 3.0 : 2.0 * dx / 3.0);
        const double u0y = u0.u0(y);
        out.term_init += w * u0y * phi.phi(y);

        const double yv[1] = {y};
        const FlowPath fwd = forward_flow(drift, driving, 0, t_index, yv, opts.flow);
        const VariationPath var = variation_along(drift, fwd);
        for (std::size_t k = 0; k <= t_index; ++k) {
            const double xk = fwd.at(k)[0];
            if (j == 0 && xk > phi.support_lo) out.coverage_ok = false;
            if (j == ny - 1 && xk < phi.support_hi) out.coverage_ok = false;
            const double pk = phi.phi(xk);
            const double ppk = phi.phi_prime(xk);
            if (pk == 0.0 && ppk == 0.0) continue;
            const double jk = var.jacobian(k)[0];
            const double common = w * u0y * jk;
            if (k == t_index) out.lhs += common * pk;
            const double sk = grid.node(k);
            const double xview[1] = {xk};
            drift.b(sk, xview, bbuf);
            drift.b_prime(sk, xview, bpbuf);
            drift_term[k] += common * bbuf[0] * ppk;
            slope_term[k] += common * bpbuf[0] * pk;
            noise_term[k] += common * ppk;
        }
    }

    const auto time_trapezoid = [&](const std::vector<double>& f) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= t_index; ++k)
            acc += ((k == 0 || k == t_index) ? 0.5 : 1.0) * f[k];
        return acc * dt;
    };
    out.term_drift = time_trapezoid(drift_term);
    out.term_slope = time_trapezoid(slope_term);

    std::vector<double> driver(bvals.begin(), bvals.begin() + static_cast<std::ptrdiff_t>(t_index + 1));
    out.noise_detail = symmetric_integral_limit(noise_term, driver, dt, out.eps0);
    out.term_noise = out.noise_detail.extrapolated;

    out.residual = out.lhs - out.term_init - out.term_drift - out.term_slope - out.term_noise;
    out.scale = std::max({std::abs(out.lhs), std::abs(out.term_init), std::abs(out.term_drift),
                          std::abs(out.term_slope), std::abs(out.term_noise)});
    return out;
}

}  // namespace ftlab

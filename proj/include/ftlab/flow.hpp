#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftlab/drift.hpp"
#include "ftlab/errors.hpp"
#include "ftlab/fbm.hpp"
#include "ftlab/time_grid.hpp"

namespace ftlab {

struct FlowOptions {
    double rtol = 1e-6;          // per-run error budget for the drift integral
    bool estimate_error = true;  // step-doubling estimate (and richer solution)
};

namespace detail {

// Fixed-step RK4 on the grid with rough forcing handled outside the
// stepper (the caller's RHS interpolates the driving path linearly).
// With estimate_error the solution is the two-half-steps composite and
// the full-step comparison provides the usual /15 local estimate.
template <class Rhs>
inline double integrate_on_grid(std::size_t dim, double t0, double dt, std::size_t n_steps,
                                std::span<const double> v0, Rhs&& rhs,
                                std::vector<double>& nodes, const FlowOptions& opts,
                                double total_time) {
    nodes.assign((n_steps + 1) * dim, 0.0);
    std::copy(v0.begin(), v0.end(), nodes.begin());
    std::vector<double> y(v0.begin(), v0.end());
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), yf(dim), yh(dim);

    const auto rk4_step = [&](double r, std::span<const double> yin, double h,
                              std::span<double> yout) {
        rhs(r, yin, k1);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = yin[i] + 0.5 * h * k1[i];
        rhs(r + 0.5 * h, tmp, k2);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = yin[i] + 0.5 * h * k2[i];
        rhs(r + 0.5 * h, tmp, k3);
        for (std::size_t i = 0; i < dim; ++i) tmp[i] = yin[i] + h * k3[i];
        rhs(r + h, tmp, k4);
        for (std::size_t i = 0; i < dim; ++i)
            yout[i] = yin[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    };

    double err_total = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double r = t0 + dt * static_cast<double>(k);
        if (!opts.estimate_error) {
            rk4_step(r, y, dt, yf);
            y.assign(yf.begin(), yf.end());
        } else {
            rk4_step(r, y, dt, yf);
            rk4_step(r, y, 0.5 * dt, tmp);
            std::vector<double> mid(tmp);
            rk4_step(r + 0.5 * dt, mid, 0.5 * dt, yh);
            double local = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < dim; ++i) {
                local = std::max(local, std::abs(yh[i] - yf[i]) / 15.0);
                scale = std::max(scale, std::abs(yh[i]));
            }
            const double budget = opts.rtol * scale * (dt / total_time);
            if (local > budget) {
                std::ostringstream msg;
                msg << "flow solver: RK4 local error " << local
                    << " exceeds step budget " << budget << "; refine the time grid";
                throw numeric_error(msg.str());
            }
            err_total += local;
            y.assign(yh.begin(), yh.end());
        }
        std::copy(y.begin(), y.end(), nodes.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim));
    }
    return err_total;
}

inline void check_flow_args(const DriftField& drift, const FbmVectorPath& driving,
                            std::size_t s_index, std::size_t t_index,
                            std::span<const double> x0) {
    if (drift.dim != driving.dim())
        throw std::invalid_argument("flow: drift and driving dimensions differ");
    if (x0.size() != drift.dim)
        throw std::invalid_argument("flow: start point has wrong dimension");
    if (s_index > t_index || t_index > driving.grid.n_steps())
        throw std::invalid_argument("flow: bad index range");
}

}  // namespace detail

// Trajectory of X_{s, t_k}(x0) for k = s_index..t_index.
struct FlowPath {
    TimeGrid grid;
    std::size_t s_index = 0;
    std::size_t t_index = 0;
    std::size_t dim = 1;
    std::vector<double> x0;
    std::vector<double> values;  // (t_index - s_index + 1) x dim, row-major
    double error_estimate = 0.0;

    std::span<const double> at(std::size_t k) const {
        return {values.data() + (k - s_index) * dim, dim};
    }
    std::span<const double> end_point() const { return at(t_index); }
};

// Time-reversed inverse flow R_{t,x}(u_k) = Y_{t-u_k, t}(x), k = 0..t_index.
struct InverseFlowPath {
    TimeGrid grid;
    std::size_t t_index = 0;
    std::size_t dim = 1;
    std::vector<double> x;
    std::vector<double> values;  // (t_index + 1) x dim
    double error_estimate = 0.0;

    std::span<const double> at_u(std::size_t k) const { return {values.data() + k * dim, dim}; }
    // Y_{s,t}(x), recovered as R(t - s).
    std::span<const double> y_at(std::size_t s_index) const { return at_u(t_index - s_index); }
    std::span<const double> end_point() const { return at_u(t_index); }
};

// First-variation (Jacobian) process along X_{0, t_k}(x0).
struct VariationPath {
    TimeGrid grid;
    std::size_t t_index = 0;
    std::size_t dim = 1;
    std::vector<double> x0;
    std::vector<double> values;  // (t_index + 1) x dim x dim

    std::span<const double> jacobian(std::size_t k) const {
        return {values.data() + k * dim * dim, dim * dim};
    }
    double determinant(std::size_t k) const {
        const auto j = jacobian(k);
        if (dim == 1) return j[0];
        if (dim == 2) return j[0] * j[3] - j[1] * j[2];
        Eigen::Map<const Eigen::MatrixXd> m(j.data(), static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
        return m.transpose().determinant();
    }
};

// Solves X = x0 + int b + increments through the shifted random ODE
// Z = X - increments, so the noise enters exactly and only the drift
// integral is discretized.
inline FlowPath forward_flow(const DriftField& drift, const FbmVectorPath& driving,
                             std::size_t s_index, std::size_t t_index,
                             std::span<const double> x0, const FlowOptions& opts = {}) {
    detail::check_flow_args(drift, driving, s_index, t_index, x0);
    const std::size_t d = drift.dim;
    FlowPath out{driving.grid, s_index, t_index, d,
                 std::vector<double>(x0.begin(), x0.end()), {}, 0.0};
    const std::size_t m = t_index - s_index;
    if (m == 0) {
        out.values.assign(x0.begin(), x0.end());
        return out;
    }
    const double dt = driving.grid.dt();
    const double t0 = driving.grid.node(s_index);

    // G_k = B_{t_{s+k}} - B_{t_s}, per component; linear in between.
    std::vector<double> incr((m + 1) * d);
    for (std::size_t c = 0; c < d; ++c) {
        const auto& b = driving.components[c].values;
        for (std::size_t k = 0; k <= m; ++k) incr[k * d + c] = b[s_index + k] - b[s_index];
    }
    std::vector<double> xbuf(d);
    const auto rhs = [&](double r, std::span<const double> z, std::span<double> dz) {
        const double pos = (r - t0) / dt;
        const auto kf = std::min(static_cast<double>(m - 1), std::max(0.0, std::floor(pos)));
        const std::size_t k = static_cast<std::size_t>(kf);
        const double theta = pos - kf;
        for (std::size_t i = 0; i < d; ++i) {
            const double g =
                incr[k * d + i] + theta * (incr[(k + 1) * d + i] - incr[k * d + i]);
            xbuf[i] = z[i] + g;
        }
        drift.b(r, xbuf, dz);
    };
    std::vector<double> z_nodes;
    out.error_estimate = detail::integrate_on_grid(d, t0, dt, m, x0, rhs, z_nodes, opts,
                                                   driving.grid.t_end());
    out.values.resize((m + 1) * d);
    for (std::size_t k = 0; k <= m; ++k)
        for (std::size_t i = 0; i < d; ++i)
            out.values[k * d + i] = z_nodes[k * d + i] + incr[k * d + i];
    return out;
}

// Backward flow via the time-reversed process R, so the integrator
// always runs forward in u.
inline InverseFlowPath inverse_flow(const DriftField& drift, const FbmVectorPath& driving,
                                    std::size_t t_index, std::span<const double> x,
                                    const FlowOptions& opts = {}) {
    detail::check_flow_args(drift, driving, 0, t_index, x);
    const std::size_t d = drift.dim;
    InverseFlowPath out{driving.grid, t_index, d, std::vector<double>(x.begin(), x.end()),
                        {}, 0.0};
    if (t_index == 0) {
        out.values.assign(x.begin(), x.end());
        return out;
    }
    const double dt = driving.grid.dt();
    const std::size_t m = t_index;

    // G_k = B_t - B_{t - u_k}; R = S - G with S' = -b(u, S - G(u)).
    std::vector<double> rev((m + 1) * d);
    for (std::size_t c = 0; c < d; ++c) {
        const auto& b = driving.components[c].values;
        for (std::size_t k = 0; k <= m; ++k) rev[k * d + c] = b[t_index] - b[t_index - k];
    }
    std::vector<double> xbuf(d);
    const auto rhs = [&](double u, std::span<const double> s, std::span<double> ds) {
        const double pos = u / dt;
        const auto kf = std::min(static_cast<double>(m - 1), std::max(0.0, std::floor(pos)));
        const std::size_t k = static_cast<std::size_t>(kf);
        const double theta = pos - kf;
        for (std::size_t i = 0; i < d; ++i) {
            const double g = rev[k * d + i] + theta * (rev[(k + 1) * d + i] - rev[k * d + i]);
            xbuf[i] = s[i] - g;
        }
        drift.b(u, xbuf, ds);
        for (std::size_t i = 0; i < d; ++i) ds[i] = -ds[i];
    };
    std::vector<double> s_nodes;
    out.error_estimate = detail::integrate_on_grid(d, 0.0, dt, m, x, rhs, s_nodes, opts,
                                                   driving.grid.t_end());
    out.values.resize((m + 1) * d);
    for (std::size_t k = 0; k <= m; ++k)
        for (std::size_t i = 0; i < d; ++i)
            out.values[k * d + i] = s_nodes[k * d + i] - rev[k * d + i];
    return out;
}

// First-variation process along an already-computed trajectory. In
// one dimension the variational equation integrates in closed form to
// exp of the drift-slope integral along the trajectory; in higher
// dimension the matrix ODE is stepped with RK4.
inline VariationPath variation_along(const DriftField& drift, const FlowPath& xpath) {
    if (xpath.s_index != 0)
        throw std::invalid_argument("variation_along: trajectory must start at s = 0");
    const std::size_t d = drift.dim;
    const std::size_t t_index = xpath.t_index;
    VariationPath out{xpath.grid, t_index, d,
                      std::vector<double>(xpath.x0.begin(), xpath.x0.end()), {}};
    out.values.assign((t_index + 1) * d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) out.values[i * d + i] = 1.0;
    if (t_index == 0) return out;
    const double dt = xpath.grid.dt();

    if (d == 1) {
        std::vector<double> slope(t_index + 1);
        std::vector<double> bp(1);
        for (std::size_t k = 0; k <= t_index; ++k) {
            drift.b_prime(xpath.grid.node(k), xpath.at(k), bp);
            slope[k] = bp[0];
        }
        double acc = 0.0;
        for (std::size_t k = 1; k <= t_index; ++k) {
            acc += 0.5 * dt * (slope[k - 1] + slope[k]);
            out.values[k] = std::exp(acc);
        }
        return out;
    }

    std::vector<double> xbuf(d), jac(d * d);
    const auto rhs = [&](double r, std::span<const double> j, std::span<double> dj) {
        const double pos = r / dt;
        const auto kf =
            std::min(static_cast<double>(t_index - 1), std::max(0.0, std::floor(pos)));
        const std::size_t k = static_cast<std::size_t>(kf);
        const double theta = pos - kf;
        const auto xa = xpath.at(k), xb = xpath.at(k + 1);
        for (std::size_t i = 0; i < d; ++i) xbuf[i] = xa[i] + theta * (xb[i] - xa[i]);
        drift.b_prime(r, xbuf, jac);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t c = 0; c < d; ++c) {
                double acc = 0.0;
                for (std::size_t l = 0; l < d; ++l) acc += jac[i * d + l] * j[l * d + c];
                dj[i * d + c] = acc;
            }
    };
    std::vector<double> j_nodes;
    std::vector<double> j0(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) j0[i * d + i] = 1.0;
    detail::integrate_on_grid(d * d, 0.0, dt, t_index, j0, rhs, j_nodes,
                              FlowOptions{.rtol = 1e-6, .estimate_error = false},
                              xpath.grid.t_end());
    out.values = std::move(j_nodes);
    return out;
}

inline VariationPath flow_jacobian(const DriftField& drift, const FbmVectorPath& driving,
                                   std::size_t t_index, std::span<const double> x0,
                                   const FlowOptions& opts = {}) {
    detail::check_flow_args(drift, driving, 0, t_index, x0);
    return variation_along(drift, forward_flow(drift, driving, 0, t_index, x0, opts));
}

// Numerical inversion of x -> X_{0,t}(x). One-dimensional flows are
// strictly increasing, so a sign-change bracket plus safeguarded
// secant steps converges; d >= 2 uses damped Newton with the
// variational Jacobian.
inline std::vector<double> invert_pointwise(const DriftField& drift,
                                            const FbmVectorPath& driving,
                                            std::size_t t_index, std::span<const double> y,
                                            const FlowOptions& opts = {}) {
    detail::check_flow_args(drift, driving, 0, t_index, y);
    const std::size_t d = drift.dim;
    if (t_index == 0) return std::vector<double>(y.begin(), y.end());
    const double tol = 1e-8 * (1.0 + std::sqrt(std::inner_product(y.begin(), y.end(),
                                                                  y.begin(), 0.0)));

    if (d == 1) {
        const double bt = driving.components[0].values[t_index];
        const auto g = [&](double x) {
            const double x0[1] = {x};
            return forward_flow(drift, driving, 0, t_index, x0, opts).end_point()[0] - y[0];
        };
        double a = y[0] - bt;
        double ga = g(a);
        if (std::abs(ga) < tol) return {a};
        double b = a, gb = ga;
        double step = 0.5 * (1.0 + std::abs(y[0]));
        bool found = false;
        for (int i = 0; i < 80; ++i) {   // monotone increasing: move against the sign
            if (ga > 0.0) { b = a; gb = ga; a -= step; ga = g(a); }
            else          { a = b; ga = gb; b += step; gb = g(b); }
            step *= 2.0;
            if (ga <= 0.0 && gb >= 0.0) { found = true; break; }
        }
        if (!found) throw numeric_error("invert_pointwise: bracket not found");
        // Illinois-damped regula falsi with bisection fallback.
        double fa = ga, fb = gb;
        for (int it = 0; it < 200; ++it) {
            const double denom = fb - fa;
            double xm = std::abs(denom) > 0.0 ? b - fb * (b - a) / denom : 0.5 * (a + b);
            if (!(xm > a && xm < b)) xm = 0.5 * (a + b);
            const double fm = g(xm);
            if (std::abs(fm) < tol) return {xm};
            if (fm < 0.0) { a = xm; fa = fm; fb *= 0.5; }
            else          { b = xm; fb = fm; fa *= 0.5; }
            if (b - a < 1e-15 * (1.0 + std::abs(a))) return {0.5 * (a + b)};
        }
        throw numeric_error("invert_pointwise: no convergence in 200 iterations");
    }

    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i)
        x[i] = y[i] - driving.components[i].values[t_index];
    const auto residual = [&](const std::vector<double>& xq, std::vector<double>& f) {
        const FlowPath p = forward_flow(drift, driving, 0, t_index, xq, opts);
        const auto e = p.end_point();
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            f[i] = e[i] - y[i];
            nrm += f[i] * f[i];
        }
        return std::sqrt(nrm);
    };
    std::vector<double> f(d), xt(d);
    double fn = residual(x, f);
    for (int it = 0; it < 60; ++it) {
        if (fn < tol) return x;
        const VariationPath var = flow_jacobian(drift, driving, t_index, x, opts);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>
            jm(var.jacobian(t_index).data(), static_cast<Eigen::Index>(d),
               static_cast<Eigen::Index>(d));
        Eigen::Map<const Eigen::VectorXd> fv(f.data(), static_cast<Eigen::Index>(d));
        const Eigen::VectorXd delta = jm.partialPivLu().solve(fv);
        double lambda = 1.0;
        bool accepted = false;
        std::vector<double> ft(d);
        for (int h = 0; h < 40; ++h) {
            for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] - lambda * delta(static_cast<Eigen::Index>(i));
            const double fn_try = residual(xt, ft);
            if (fn_try < fn) {
                x = xt;
                f = ft;
                fn = fn_try;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw numeric_error("invert_pointwise: Newton line search stalled, |F|=" +
                                std::to_string(fn));
    }
    throw numeric_error("invert_pointwise: Newton did not converge, |F|=" +
                        std::to_string(fn));
}

// Wraps a scalar path as a one-component vector path.
inline FbmVectorPath as_vector(const FbmPath& path) {
    return FbmVectorPath{path.grid, HurstVector({path.hurst}), {path}, path.seed};
}

}  // namespace ftlab

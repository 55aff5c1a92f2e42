#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ftlab/drift.hpp"
#include "ftlab/fbm.hpp"
#include "ftlab/flow.hpp"
#include "ftlab/step_function.hpp"
#include "ftlab/transport.hpp"

namespace ftlab {

// D_alpha Y_{s,t}(x) on the grid: -exp(-int_s^alpha b'(r, Y_{r,t}) dr)
// for alpha in [s, t], zero outside. One cumulative-trapezoid sweep of
// the stored inverse-flow trajectory yields all alpha at once.
struct MalliavinTrace {
    TimeGrid grid;
    std::size_t s_index = 0;
    std::size_t t_index = 0;
    double x = 0.0;
    std::vector<double> node_values;  // alpha-index 0..t_index; zero below s_index

    double at(std::size_t alpha_index) const {
        if (alpha_index > t_index) return 0.0;
        return node_values[alpha_index];
    }
};

inline MalliavinTrace malliavin_trace(const DriftField& drift, const InverseFlowPath& path,
                                      std::size_t s_index = 0) {
    if (drift.dim != 1)
        throw std::invalid_argument("malliavin_trace: closed form is one-dimensional");
    if (s_index > path.t_index)
        throw std::invalid_argument("malliavin_trace: s_index beyond the horizon");
    const std::size_t t_index = path.t_index;
    MalliavinTrace tr{path.grid, s_index, t_index, path.x[0],
                      std::vector<double>(t_index + 1, 0.0)};
    const double dt = path.grid.dt();
    std::vector<double> slope(t_index + 1), bp(1);
    for (std::size_t j = 0; j <= t_index; ++j) {
        drift.b_prime(path.grid.node(j), path.y_at(j), bp);
        slope[j] = bp[0];
    }
    double acc = 0.0;  // int_s^alpha b'(r, Y_{r,t}) dr
    tr.node_values[s_index] = -1.0;
    for (std::size_t a = s_index + 1; a <= t_index; ++a) {
        acc += 0.5 * dt * (slope[a - 1] + slope[a]);
        tr.node_values[a] = -std::exp(-acc);
    }
    return tr;
}

inline double derivative_Y(const DriftField& drift, const InverseFlowPath& path,
                           std::size_t s_index, std::size_t alpha_index) {
    if (alpha_index < s_index || alpha_index > path.t_index) return 0.0;
    return malliavin_trace(drift, path, s_index).at(alpha_index);
}

// Chain rule: D_alpha u(t,x) = u0'(Y_{0,t}(x)) D_alpha Y_{0,t}(x).
inline double derivative_u(const InitialDatum& u0, const DriftField& drift,
                           const InverseFlowPath& path, std::size_t alpha_index) {
    return u0.u0_prime(path.end_point()[0]) * derivative_Y(drift, path, 0, alpha_index);
}

// (exp(-T ||b'||), exp(T ||b'||)): almost-sure envelope of the
// magnitude of D_alpha Y over [0, T].
inline std::pair<double, double> derivative_bound_constants(const DriftField& drift, double T) {
    const double e = T * drift.sup_norm_b_prime;
    return {std::exp(-e), std::exp(e)};
}

struct InnerProductResult {
    double value = 0.0;
    double hurst = 0.5;
    double quadrature_error_estimate = 0.0;
};

namespace detail {

// Inner product of two step functions in the canonical space of fBm:
// L^2 pairing at H = 1/2, and for H > 1/2 the weighted double integral
// with alpha_H |u-v|^{2H-2}. The weight is integrated exactly per cell
// pair: with psi(x) = |x|^{2H} / 2, the cell-pair mass at lag m is
// psi((m+1)w) - 2 psi(mw) + psi((m-1)w), which already carries alpha_H.
inline double weighted_double_sum(const StepFunction& f, const StepFunction& g, double H) {
    const std::size_t n = f.n_cells();
    const double w = f.cell_width;
    const double a = 2.0 * H;
    std::vector<double> lag(n);
    const auto psi = [a, w](double m) { return 0.5 * std::pow(m * w, a); };
    for (std::size_t m = 0; m < n; ++m) {
        const double md = static_cast<double>(m);
        lag[m] = psi(md + 1.0) - 2.0 * psi(md) + (m == 0 ? psi(1.0) : psi(md - 1.0));
    }
    // Accumulated over unordered pairs so the pairing is exactly
    // symmetric in its arguments.
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += lag[0] * f.values[i] * g.values[i];
    for (std::size_t m = 1; m < n; ++m) {
        double s = 0.0;
        for (std::size_t i = 0; i + m < n; ++i)
            s += f.values[i] * g.values[i + m] + f.values[i + m] * g.values[i];
        acc += lag[m] * s;
    }
    return acc;
}

inline StepFunction coarsen2(const StepFunction& f) {
    StepFunction c;
    c.cell_width = 2.0 * f.cell_width;
    c.values.resize(f.n_cells() / 2);
    for (std::size_t k = 0; k < c.values.size(); ++k)
        c.values[k] = 0.5 * (f.values[2 * k] + f.values[2 * k + 1]);
    return c;
}

}  // namespace detail

inline InnerProductResult h_inner_product(const StepFunction& f, const StepFunction& g,
                                          double H) {
    if (!(H >= 0.5 && H < 1.0))
        throw std::domain_error(
            "h_inner_product: supported for H in [1/2, 1); the H < 1/2 canonical space "
            "is out of the supported surface");
    if (f.n_cells() != g.n_cells() || f.cell_width != g.cell_width)
        throw std::invalid_argument("h_inner_product: step functions must share the grid");
    if (f.n_cells() == 0) return {0.0, H, 0.0};

    const auto pairing = [H](const StepFunction& a, const StepFunction& b) {
        if (H == 0.5) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.n_cells(); ++k) acc += a.values[k] * b.values[k];
            return acc * a.cell_width;
        }
        return detail::weighted_double_sum(a, b, H);
    };

    InnerProductResult r;
    r.hurst = H;
    r.value = pairing(f, g);
    if (f.n_cells() % 2 == 0 && f.n_cells() >= 4)
        r.quadrature_error_estimate =
            std::abs(r.value - pairing(detail::coarsen2(f), detail::coarsen2(g)));
    return r;
}

// Step-function restriction of a Malliavin trace to [0, t].
inline StepFunction trace_step_function(const MalliavinTrace& trace) {
    return StepFunction::from_nodes(
        trace.grid.dt(),
        std::span<const double>(trace.node_values.data(), trace.t_index + 1));
}

// <D Y_{0,t}(x), D~ Y_{0,t}(x)>_H with the second trace driven by the
// OU-coupled path.
inline InnerProductResult cross_inner_product(const DriftField& drift,
                                              const FbmVectorPath& driving,
                                              const FbmVectorPath& coupled,
                                              std::size_t t_index, double x, double H,
                                              const FlowOptions& opts = {}) {
    if (drift.dim != 1)
        throw std::invalid_argument("cross_inner_product: one-dimensional only");
    const double xv[1] = {x};
    const InverseFlowPath inv1 = inverse_flow(drift, driving, t_index, xv, opts);
    const InverseFlowPath inv2 = inverse_flow(drift, coupled, t_index, xv, opts);
    const StepFunction f = trace_step_function(malliavin_trace(drift, inv1));
    const StepFunction g = trace_step_function(malliavin_trace(drift, inv2));
    return h_inner_product(f, g, H);
}

}  // namespace ftlab

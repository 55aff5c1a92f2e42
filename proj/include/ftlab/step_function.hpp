#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ftlab {

// Piecewise-constant function on uniform cells [k w, (k+1) w). Used as
// the quadrature representation for canonical-space inner products;
// indicators of grid-aligned intervals are represented exactly.
struct StepFunction {
    double cell_width = 0.0;
    std::vector<double> values;

    std::size_t n_cells() const { return values.size(); }
    double domain_end() const { return cell_width * static_cast<double>(values.size()); }

    // Cell averages of a nodal sample (trapezoid-consistent).
    static StepFunction from_nodes(double cell_width, std::span<const double> nodes) {
        if (nodes.size() < 2)
            throw std::invalid_argument("StepFunction: need at least two nodes");
        StepFunction f;
        f.cell_width = cell_width;
        f.values.resize(nodes.size() - 1);
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
            f.values[k] = 0.5 * (nodes[k] + nodes[k + 1]);
        return f;
    }

    // Indicator of [a, b] as cell coverage fractions; exact for
    // grid-aligned endpoints.
    static StepFunction indicator(double cell_width, std::size_t n_cells, double a, double b) {
        if (!(b >= a)) throw std::invalid_argument("StepFunction: indicator needs a <= b");
        StepFunction f;
        f.cell_width = cell_width;
        f.values.assign(n_cells, 0.0);
        for (std::size_t k = 0; k < n_cells; ++k) {
            const double lo = cell_width * static_cast<double>(k);
            const double hi = lo + cell_width;
            const double overlap = std::min(hi, b) - std::max(lo, a);
            if (overlap > 0.0) f.values[k] = overlap / cell_width;
        }
        return f;
    }
};

}  // namespace ftlab

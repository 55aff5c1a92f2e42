#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ftlab::detail {

// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton
// iteration on the Legendre recurrence (accurate to ~1e-15).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        if (n < 1) throw std::invalid_argument("GaussLegendre: n >= 1 required");
        nodes.resize(n);
        weights.resize(n);
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }

    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(c + h * nodes[i]);
        return s * h;
    }
};

inline const GaussLegendre& gl16() {
    static const GaussLegendre rule(16);
    return rule;
}

inline const GaussLegendre& gl8() {
    static const GaussLegendre rule(8);
    return rule;
}

}  // namespace ftlab::detail

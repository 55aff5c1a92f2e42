#pragma once

#include <cmath>
#include <stdexcept>

namespace ftlab {

// Parameters of the Gaussian density envelope: centring m and mean
// absolute deviation estimated by Monte Carlo, and the almost-sure
// bounds on the coupled Malliavin inner product standing in for the
// squared gamma constants.
struct EnvelopeParams {
    double m = 0.0;
    double abs_dev = 0.0;
    double gamma_low_sq = 1.0;
    double gamma_high_sq = 1.0;

    void validate() const {
        if (!(gamma_low_sq > 0.0) || !(gamma_high_sq >= gamma_low_sq))
            throw std::invalid_argument("EnvelopeParams: need 0 < gamma_low_sq <= gamma_high_sq");
        if (!(abs_dev >= 0.0))
            throw std::invalid_argument("EnvelopeParams: abs_dev must be nonnegative");
    }
};

struct EnvelopeBounds {
    double lower = 0.0;
    double upper = 0.0;
};

// Density bounds at z:
//   lower = abs_dev / (2 gamma_high^2) exp(-(z-m)^2 / (2 gamma_low^2))
//   upper = abs_dev / (2 gamma_low^2)  exp(-(z-m)^2 / (2 gamma_high^2))
// The prefactor/exponent pairing is as printed in the source bound;
// far in the tails the two curves can cross, so ordering claims are
// restricted to the central region by callers.
inline EnvelopeBounds gaussian_envelope(const EnvelopeParams& p, double z) {
    p.validate();
    const double q = (z - p.m) * (z - p.m);
    return EnvelopeBounds{
        p.abs_dev / (2.0 * p.gamma_high_sq) * std::exp(-q / (2.0 * p.gamma_low_sq)),
        p.abs_dev / (2.0 * p.gamma_low_sq) * std::exp(-q / (2.0 * p.gamma_high_sq))};
}

}  // namespace ftlab

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ftlab/covariance.hpp"
#include "ftlab/fbm.hpp"
#include "ftlab/flow.hpp"
#include "ftlab/malliavin.hpp"

using namespace ftlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

DriftField zero_drift() {
    return make_drift_1d("zero", [](double, double) { return 0.0; },
                         [](double, double) { return 0.0; }, 0.0, 0.0, true);
}

DriftField sin_drift() {
    return make_drift_1d("sin", [](double, double x) { return std::sin(x); },
                         [](double, double x) { return std::cos(x); }, 1.0, 1.0);
}

DriftField unit_slope_drift() {  // b(t,x) = x, so b' is identically 1
    return make_drift_1d("linear", [](double, double x) { return x; },
                         [](double, double) { return 1.0; },
                         std::numeric_limits<double>::infinity(), 1.0);
}

InverseFlowPath inverse_path(const DriftField& drift, double H, std::size_t n,
                             std::uint64_t seed, double x) {
    const auto driving = as_vector(sample_fbm(TimeGrid(1.0, n), H, seed, FbmMethod::cholesky));
    const double xv[1] = {x};
    return inverse_flow(drift, driving, n, xv);
}

}  // namespace

TEST_CASE("malliavin derivative of the inverse flow: closed-form cases") {
    const std::size_t n = 128;
    {
        const auto drift = zero_drift();
        const auto path = inverse_path(drift, 0.75, n, 41, 0.3);
        const auto tr = malliavin_trace(drift, path, 0);
        for (std::size_t a = 0; a <= n; ++a) CHECK(tr.at(a) == -1.0);

        const auto tr_mid = malliavin_trace(drift, path, n / 2);
        CHECK(tr_mid.at(n / 4) == 0.0);  // alpha < s
        CHECK(tr_mid.at(n / 2) == -1.0);
        CHECK(tr_mid.at(n) == -1.0);
        CHECK(derivative_Y(drift, path, n / 2, n / 4) == 0.0);
    }
    {
        // b' == 1 makes the exponent integral alpha - s exactly.
        const auto drift = unit_slope_drift();
        const auto path = inverse_path(drift, 0.5, n, 42, -0.7);
        CHECK_THAT(derivative_Y(drift, path, 0, n / 2), WithinRel(-std::exp(-0.5), 1e-12));
        CHECK_THAT(derivative_Y(drift, path, 0, n), WithinRel(-std::exp(-1.0), 1e-12));
        CHECK(derivative_Y(drift, path, 0, 0) == -1.0);
    }
}

TEST_CASE("derivative bound constants") {
    const auto z = derivative_bound_constants(zero_drift(), 1.0);
    CHECK(z.first == 1.0);
    CHECK(z.second == 1.0);
    const auto u = derivative_bound_constants(unit_slope_drift(), 1.0);
    CHECK_THAT(u.first, WithinRel(std::exp(-1.0), 1e-15));
    CHECK_THAT(u.second, WithinRel(std::exp(1.0), 1e-15));
    const auto s2 = derivative_bound_constants(sin_drift(), 2.0);
    CHECK_THAT(s2.first, WithinRel(std::exp(-2.0), 1e-15));
    CHECK_THAT(s2.second, WithinRel(std::exp(2.0), 1e-15));
}

TEST_CASE("trace values are pathwise inside the exponential envelope") {
    const auto drift = sin_drift();
    const auto [lo, hi] = derivative_bound_constants(drift, 1.0);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto path = inverse_path(drift, seed % 2 ? 0.5 : 0.75, 64, 100 + seed,
                                       -1.0 + 0.1 * static_cast<double>(seed));
        const auto tr = malliavin_trace(drift, path, 0);
        for (std::size_t a = 0; a <= 64; ++a) {
            CHECK(tr.at(a) < 0.0);
            CHECK(-tr.at(a) >= lo);
            CHECK(-tr.at(a) <= hi);
        }
    }
}

TEST_CASE("chain-rule derivative of the solution") {
    const std::size_t n = 128;
    const auto drift = zero_drift();
    const auto driving = as_vector(sample_fbm(TimeGrid(1.0, n), 0.75, 43, FbmMethod::cholesky));
    const double bt = driving.components[0].values.back();
    const double xv[1] = {0.0};
    const auto path = inverse_flow(drift, driving, n, xv);

    InitialDatum identity{[](double y) { return y; }, [](double) { return 1.0; },
                          true, 1.0, 1.0, "identity"};
    CHECK(derivative_u(identity, drift, path, n / 3) ==
          derivative_Y(drift, path, 0, n / 3));

    InitialDatum cubic{[](double y) { return y * y * y; },
                       [](double y) { return 3.0 * y * y; }, false, 0.0, 0.0, "cubic"};
    CHECK_THAT(derivative_u(cubic, drift, path, n / 2),
               WithinRel(-3.0 * bt * bt, 1e-12));
}

TEST_CASE("chain-rule derivative obeys the interval bound for monotone data") {
    InitialDatum arctan_shift{[](double y) { return y + 0.5 * std::atan(y); },
                              [](double y) { return 1.0 + 0.5 / (1.0 + y * y); },
                              true, 1.0, 1.5, "arctan-shift"};
    const auto drift = sin_drift();
    const auto [lo, hi] = derivative_bound_constants(drift, 1.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto path = inverse_path(drift, 0.75, 64, 500 + seed, 0.4);
        for (std::size_t a : {std::size_t(0), std::size_t(32), std::size_t(64)}) {
            const double d = derivative_u(arctan_shift, drift, path, a);
            CHECK(-d >= arctan_shift.c_low * lo);
            CHECK(-d <= arctan_shift.c_high * hi);
        }
    }
}

TEST_CASE("inner product reproduces the fbm covariance on indicators") {
    const std::size_t n = 1 << 10;
    for (double H : {0.55, 0.75, 0.9}) {
        const double dt = 2.0 / static_cast<double>(n);
        // || 1_{[0,t]} ||^2 = t^{2H} on the function's own grid
        for (double t : {0.5, 1.0, 2.0}) {
            const auto ind = StepFunction::indicator(dt, n, 0.0, t);
            const auto r = h_inner_product(ind, ind, H);
            CHECK_THAT(r.value, WithinRel(std::pow(t, 2.0 * H), 1e-10));
        }
        // <1_{[0,1]}, 1_{[0,2]}> = R_H(1, 2)
        const auto f = StepFunction::indicator(dt, n, 0.0, 1.0);
        const auto g = StepFunction::indicator(dt, n, 0.0, 2.0);
        const auto r = h_inner_product(f, g, H);
        CHECK_THAT(r.value, WithinRel(fbm_covariance(1.0, 2.0, H), 1e-4));
    }
    // H = 0.75 closed form: R_H(1,2) = sqrt(2)
    const double dt = 2.0 / static_cast<double>(n);
    const auto f = StepFunction::indicator(dt, n, 0.0, 1.0);
    const auto g = StepFunction::indicator(dt, n, 0.0, 2.0);
    CHECK_THAT(h_inner_product(f, g, 0.75).value, WithinRel(std::sqrt(2.0), 1e-10));
    // Brownian case: L^2 pairing of indicators
    CHECK_THAT(h_inner_product(f, f, 0.5).value, WithinAbs(1.0, 1e-14));
    CHECK_THAT(h_inner_product(f, g, 0.5).value, WithinAbs(1.0, 1e-14));
}

TEST_CASE("inner product is symmetric and bilinear, rejects H < 1/2") {
    const std::size_t n = 256;
    const double dt = 1.0 / static_cast<double>(n);
    StepFunction f, g, h;
    f.cell_width = g.cell_width = h.cell_width = dt;
    f.values.resize(n);
    g.values.resize(n);
    h.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = (static_cast<double>(k) + 0.5) * dt;
        f.values[k] = std::exp(u);
        g.values[k] = std::sin(3.0 * u);
        h.values[k] = 1.0 - u * u;
    }
    for (double H : {0.5, 0.75}) {
        CHECK(h_inner_product(f, g, H).value == h_inner_product(g, f, H).value);
        StepFunction af_plus_g = f;
        for (std::size_t k = 0; k < n; ++k)
            af_plus_g.values[k] = 2.5 * f.values[k] + g.values[k];
        const double lhs = h_inner_product(af_plus_g, h, H).value;
        const double rhs =
            2.5 * h_inner_product(f, h, H).value + h_inner_product(g, h, H).value;
        CHECK_THAT(lhs, WithinRel(rhs, 1e-12));
    }
    CHECK_THROWS_AS(h_inner_product(f, g, 0.49), std::domain_error);
    StepFunction other = f;
    other.cell_width *= 2.0;
    CHECK_THROWS_AS(h_inner_product(f, other, 0.75), std::invalid_argument);
}

TEST_CASE("weighted quadrature self-converges at order >= 1") {
    const auto eval = [](std::size_t n) {
        const double dt = 1.0 / static_cast<double>(n);
        StepFunction f, g;
        f.cell_width = g.cell_width = dt;
        f.values.resize(n);
        g.values.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double u = (static_cast<double>(k) + 0.5) * dt;
            f.values[k] = std::exp(u);
            g.values[k] = std::cos(2.0 * u);
        }
        return h_inner_product(f, g, 0.75).value;
    };
    const double ref = eval(1 << 13);
    const double e1 = std::abs(eval(64) - ref);
    const double e2 = std::abs(eval(128) - ref);
    const double e3 = std::abs(eval(256) - ref);
    CHECK(std::log2(e1 / e2) >= 1.0);
    CHECK(std::log2(e2 / e3) >= 1.0);
    // and the built-in error estimate is in the right ballpark
    const std::size_t n = 256;
    const double dt = 1.0 / static_cast<double>(n);
    StepFunction f;
    f.cell_width = dt;
    f.values.assign(n, 1.0);
    CHECK(h_inner_product(f, f, 0.75).quadrature_error_estimate < 1e-10);
}

TEST_CASE("coupled inner product: indicator identity and pathwise bounds") {
    const std::size_t n = 256;
    const TimeGrid grid(1.0, n);
    const auto drift0 = zero_drift();
    {
        const FbmSampler sampler(grid, 0.75, FbmMethod::cholesky);
        const auto w = as_vector(sampler.sample(900, 0));
        const auto wp = as_vector(sampler.sample(900, 1));
        for (double theta : {0.0, 0.3, 2.0}) {
            const auto coupled = ou_couple(w, wp, theta);
            const auto r = cross_inner_product(drift0, w, coupled, n, 0.2, 0.75);
            CHECK_THAT(r.value, WithinRel(1.0, 1e-11));  // t^{2H} with t = 1
        }
        const auto r_half = cross_inner_product(drift0, w, ou_couple(w, wp, 0.7), n / 2,
                                                0.2, 0.75);
        CHECK_THAT(r_half.value, WithinRel(std::pow(0.5, 1.5), 1e-11));
    }
    {
        const auto drift = sin_drift();
        const auto [lo, hi] = derivative_bound_constants(drift, 1.0);
        for (double H : {0.5, 0.75}) {
            const FbmSampler sampler(grid, H, FbmMethod::cholesky);
            RngStream theta_rng(7, 0);
            for (std::uint64_t i = 0; i < 25; ++i) {
                const auto w = as_vector(sampler.sample(901, 2 * i));
                const auto wp = as_vector(sampler.sample(901, 2 * i + 1));
                const auto coupled = ou_couple(w, wp, theta_rng.exponential());
                const auto r = cross_inner_product(drift, w, coupled, n, 0.4, H);
                CHECK(r.value >= lo * lo * (1.0 - 1e-12));
                CHECK(r.value <= hi * hi * (1.0 + 1e-12));
            }
            // theta = 0 coupling degenerates to the squared H-norm
            const auto w = as_vector(sampler.sample(902, 0));
            const auto r0 = cross_inner_product(drift, w, w, n, 0.4, H);
            CHECK(r0.value >= lo * lo * (1.0 - 1e-12));
            CHECK(r0.value <= hi * hi * (1.0 + 1e-12));
        }
    }
}

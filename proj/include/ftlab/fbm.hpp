#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ftlab/covariance.hpp"
#include "ftlab/detail/fft.hpp"
#include "ftlab/errors.hpp"
#include "ftlab/rng.hpp"
#include "ftlab/time_grid.hpp"
#include "ftlab/volterra_kernel.hpp"

namespace ftlab {

enum class FbmMethod { cholesky, circulant, volterra };

inline const char* to_string(FbmMethod m) {
    switch (m) {
        case FbmMethod::cholesky: return "cholesky";
        case FbmMethod::circulant: return "circulant";
        case FbmMethod::volterra: return "volterra";
    }
    return "?";
}

inline FbmMethod fbm_method_from_string(const std::string& s) {
    if (s == "cholesky") return FbmMethod::cholesky;
    if (s == "circulant") return FbmMethod::circulant;
    if (s == "volterra") return FbmMethod::volterra;
    throw config_error("unknown fbm method: " + s);
}

// Cholesky is exact with O(n^3) setup; the circulant embedding is
// exact as well and O(n log n) per path, so it takes over on long
// grids.
inline FbmMethod default_fbm_method(std::size_t n_steps) {
    return n_steps <= 1024 ? FbmMethod::cholesky : FbmMethod::circulant;
}

struct FbmProvenance {
    FbmMethod requested = FbmMethod::cholesky;
    FbmMethod used = FbmMethod::cholesky;
    bool circulant_fallback = false;    // embedding too indefinite, used Cholesky
    int clipped_eigenvalues = 0;        // tiny negatives zeroed in the embedding
    double min_eigenvalue_ratio = 0.0;  // min(lambda)/max(lambda) observed
};

struct FbmPath {
    TimeGrid grid;
    double hurst;
    std::vector<double> values;  // size n_steps+1, values[0] == 0
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    FbmProvenance provenance;
};

struct HurstVector {
    std::vector<double> components;

    explicit HurstVector(std::vector<double> h) : components(std::move(h)) {
        if (components.empty())
            throw std::invalid_argument("HurstVector: needs at least one component");
        for (double H : components) check_hurst(H);
    }
    std::size_t dim() const { return components.size(); }
};

struct FbmVectorPath {
    TimeGrid grid;
    HurstVector hurst;
    std::vector<FbmPath> components;
    std::uint64_t seed = 0;

    std::size_t dim() const { return components.size(); }
};

// Reusable per-(grid, H, method) sampler; the factorization is built
// once and shared read-only across an ensemble.
class FbmSampler {
public:
    FbmSampler(const TimeGrid& grid, double H, FbmMethod method)
        : grid_(grid), hurst_(H), requested_(method), used_(method) {
        check_hurst(H);
        switch (method) {
            case FbmMethod::cholesky: build_cholesky(); break;
            case FbmMethod::circulant: build_circulant(); break;
            case FbmMethod::volterra: build_volterra(); break;
        }
    }

    const TimeGrid& grid() const { return grid_; }
    double hurst() const { return hurst_; }

    FbmProvenance provenance() const {
        FbmProvenance p;
        p.requested = requested_;
        p.used = used_;
        p.circulant_fallback = requested_ == FbmMethod::circulant && used_ == FbmMethod::cholesky;
        p.clipped_eigenvalues = clipped_;
        p.min_eigenvalue_ratio = min_eig_ratio_;
        return p;
    }

    FbmPath sample(std::uint64_t seed, std::uint64_t stream = 0) const {
        RngStream rng(seed, stream);
        FbmPath path{grid_, hurst_, std::vector<double>(grid_.n_nodes(), 0.0),
                     seed, stream, provenance()};
        switch (used_) {
            case FbmMethod::cholesky: sample_cholesky(rng, path.values); break;
            case FbmMethod::circulant: sample_circulant(rng, path.values); break;
            case FbmMethod::volterra: sample_volterra(rng, path.values); break;
        }
        return path;
    }

private:
    void build_cholesky() {
        const Eigen::MatrixXd g = gram_matrix(grid_, hurst_);
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success)
            throw numeric_error("fbm gram matrix not positive definite at working tolerance");
        chol_ = llt.matrixL();
        used_ = FbmMethod::cholesky;
    }

    // Davies-Harte: embed the fractional Gaussian noise covariance in a
    // circulant of size 2n and sample through its spectral square root.
    void build_circulant() {
        const std::size_t n = grid_.n_steps();
        if (n < 2) {  // embedding degenerates; exact direct sampling instead
            build_cholesky();
            return;
        }
        const double dt = grid_.dt();
        const double a = 2.0 * hurst_;
        const double scale = std::pow(dt, a);
        const auto gamma = [&](std::size_t k) {
            const double kd = static_cast<double>(k);
            return 0.5 * scale *
                   (std::pow(kd + 1.0, a) - 2.0 * std::pow(kd, a) +
                    std::pow(std::abs(kd - 1.0), a));
        };
        const std::size_t m = 2 * n;
        std::vector<std::complex<double>> c(m);
        for (std::size_t k = 0; k <= n; ++k) c[k] = gamma(k);
        for (std::size_t k = n + 1; k < m; ++k) c[k] = gamma(m - k);
        detail::fft(c, false);
        double max_eig = 0.0, min_eig = 0.0;
        for (const auto& z : c) {
            max_eig = std::max(max_eig, z.real());
            min_eig = std::min(min_eig, z.real());
        }
        min_eig_ratio_ = max_eig > 0.0 ? min_eig / max_eig : 0.0;
        if (min_eig < -1e-12 * max_eig) {
            build_cholesky();
            return;
        }
        sqrt_lambda_.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            double lam = c[k].real();
            if (lam < 0.0) {
                lam = 0.0;
                ++clipped_;
            }
            sqrt_lambda_[k] = std::sqrt(lam);
        }
        used_ = FbmMethod::circulant;
    }

    void build_volterra() {
        const std::size_t n = grid_.n_steps();
        const double H = hurst_;
        if (H < 0.5)
            throw std::domain_error(
                "volterra sampling unsupported for H < 1/2 (kernel normalization not pinned)");
        volterra_k_.assign(n * n, 0.0);
        if (H == 0.5) {
            for (std::size_t j = 1; j <= n; ++j)
                for (std::size_t k = 0; k < j; ++k) volterra_k_[(j - 1) * n + k] = 1.0;
            used_ = FbmMethod::volterra;
            return;
        }
        const double dt = grid_.dt();
        // First cell's evaluation point matches the L^2 mean of the
        // singular s^{1/2-H} factor over the cell; midpoints elsewhere.
        const double s0 = dt * std::pow(2.0 - 2.0 * H, 1.0 / (2.0 * H - 1.0));
        for (std::size_t k = 0; k < n; ++k) {
            const double sk = k == 0 ? s0 : (static_cast<double>(k) + 0.5) * dt;
            const std::vector<double> row = detail::volterra_row(grid_, H, sk);
            for (std::size_t j = k + 1; j <= n; ++j) volterra_k_[(j - 1) * n + k] = row[j];
        }
        // Rescale each row so Var B_{t_j} = t_j^{2H} holds exactly in the
        // discretization; off-diagonal covariances inherit the correction.
        for (std::size_t j = 1; j <= n; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < j; ++k) {
                const double kj = volterra_k_[(j - 1) * n + k];
                v += kj * kj;
            }
            v *= dt;
            const double alpha = std::sqrt(std::pow(grid_.node(j), 2.0 * H) / v);
            for (std::size_t k = 0; k < j; ++k) volterra_k_[(j - 1) * n + k] *= alpha;
        }
        used_ = FbmMethod::volterra;
    }

    void sample_cholesky(RngStream& rng, std::vector<double>& values) const {
        const auto n = chol_.rows();
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.gaussian();
        for (Eigen::Index j = 0; j < n; ++j) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k <= j; ++k) acc += chol_(j, k) * z(k);
            values[static_cast<std::size_t>(j) + 1] = acc;
        }
    }

    void sample_circulant(RngStream& rng, std::vector<double>& values) const {
        const std::size_t m = sqrt_lambda_.size();
        const std::size_t n = m / 2;
        const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
        const double inv_sqrt_2m = inv_sqrt_m / std::sqrt(2.0);
        std::vector<std::complex<double>> a(m);
        a[0] = sqrt_lambda_[0] * inv_sqrt_m * rng.gaussian();
        a[n] = sqrt_lambda_[n] * inv_sqrt_m * rng.gaussian();
        for (std::size_t k = 1; k < n; ++k) {
            const double u = rng.gaussian();
            const double w = rng.gaussian();
            const double s = sqrt_lambda_[k] * inv_sqrt_2m;
            a[k] = std::complex<double>(s * u, s * w);
            a[m - k] = std::conj(a[k]);
        }
        detail::fft(a, false);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += a[j].real();
            values[j + 1] = acc;
        }
    }

    void sample_volterra(RngStream& rng, std::vector<double>& values) const {
        const std::size_t n = grid_.n_steps();
        const double sqrt_dt = std::sqrt(grid_.dt());
        std::vector<double> dw(n);
        for (std::size_t k = 0; k < n; ++k) dw[k] = sqrt_dt * rng.gaussian();
        for (std::size_t j = 1; j <= n; ++j) {
            double acc = 0.0;
            const double* row = &volterra_k_[(j - 1) * n];
            for (std::size_t k = 0; k < j; ++k) acc += row[k] * dw[k];
            values[j] = acc;
        }
    }

    TimeGrid grid_;
    double hurst_;
    FbmMethod requested_;
    FbmMethod used_;
    Eigen::MatrixXd chol_;
    std::vector<double> sqrt_lambda_;
    std::vector<double> volterra_k_;
    int clipped_ = 0;
    double min_eig_ratio_ = 0.0;
};

inline FbmPath sample_fbm(const TimeGrid& grid, double H, std::uint64_t seed,
                          FbmMethod method, std::uint64_t stream = 0) {
    return FbmSampler(grid, H, method).sample(seed, stream);
}

// Independent components; component i draws from stream base_stream+i.
inline FbmVectorPath sample_fbm_vector(const TimeGrid& grid, const HurstVector& hurst,
                                       std::uint64_t seed, FbmMethod method,
                                       std::uint64_t base_stream = 0) {
    FbmVectorPath v{grid, hurst, {}, seed};
    v.components.reserve(hurst.dim());
    for (std::size_t i = 0; i < hurst.dim(); ++i)
        v.components.push_back(
            sample_fbm(grid, hurst.components[i], seed, method, base_stream + i));
    return v;
}

// Restriction of a path to every factor-th node; the coarse path is an
// exact sample of the same process, which refinement studies rely on.
inline FbmPath subsample(const FbmPath& path, std::size_t factor) {
    const std::size_t n = path.grid.n_steps();
    if (factor == 0 || n % factor != 0)
        throw std::invalid_argument("subsample: factor must divide n_steps");
    FbmPath out = path;
    out.grid = TimeGrid(path.grid.t_end(), n / factor);
    out.values.resize(n / factor + 1);
    for (std::size_t k = 0; k <= n / factor; ++k) out.values[k] = path.values[k * factor];
    return out;
}

inline FbmVectorPath subsample(const FbmVectorPath& path, std::size_t factor) {
    FbmVectorPath out{TimeGrid(path.grid.t_end(), path.grid.n_steps() / factor),
                      path.hurst, {}, path.seed};
    for (const auto& c : path.components) out.components.push_back(subsample(c, factor));
    return out;
}

// Ornstein-Uhlenbeck interpolation between a path and an independent
// fresh copy: exp(-theta) * path + sqrt(1 - exp(-2 theta)) * fresh.
// The marginal law is preserved for every theta >= 0.
inline FbmPath ou_couple(const FbmPath& path, const FbmPath& fresh, double theta) {
    if (theta < 0.0) throw std::domain_error("ou_couple: theta must be nonnegative");
    if (path.grid != fresh.grid || path.hurst != fresh.hurst)
        throw std::invalid_argument("ou_couple: paths must share grid and Hurst index");
    const double c1 = std::exp(-theta);
    const double c2 = std::sqrt(std::max(0.0, 1.0 - c1 * c1));
    FbmPath out = path;
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = c1 * path.values[k] + c2 * fresh.values[k];
    return out;
}

inline FbmVectorPath ou_couple(const FbmVectorPath& path, const FbmVectorPath& fresh,
                               double theta) {
    if (path.dim() != fresh.dim())
        throw std::invalid_argument("ou_couple: dimension mismatch");
    FbmVectorPath out = path;
    for (std::size_t i = 0; i < path.dim(); ++i)
        out.components[i] = ou_couple(path.components[i], fresh.components[i], theta);
    return out;
}

}  // namespace ftlab

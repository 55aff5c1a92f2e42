#pragma once

#include <cstddef>
#include <stdexcept>

namespace ftlab {

// Uniform grid t_k = k * t_end / n_steps, k = 0..n_steps.
class TimeGrid {
public:
    TimeGrid(double t_end, std::size_t n_steps)
        : t_end_(t_end), n_steps_(n_steps) {
        if (!(t_end > 0.0))
            throw std::invalid_argument("TimeGrid: t_end must be positive");
        if (n_steps < 1)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double t_end() const { return t_end_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t n_nodes() const { return n_steps_ + 1; }
    double dt() const { return t_end_ / static_cast<double>(n_steps_); }
    double node(std::size_t k) const {
        return t_end_ * static_cast<double>(k) / static_cast<double>(n_steps_);
    }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.t_end_ == b.t_end_ && a.n_steps_ == b.n_steps_;
    }
    friend bool operator!=(const TimeGrid& a, const TimeGrid& b) { return !(a == b); }

private:
    double t_end_;
    std::size_t n_steps_;
};

}  // namespace ftlab

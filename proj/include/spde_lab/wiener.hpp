#ifndef SPDE_LAB_WIENER_HPP
#define SPDE_LAB_WIENER_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "hilbert.hpp"
#include "random.hpp"

namespace spde_lab {

/// Uniform grid t_k = t0 + k dt, k = 0..steps.
class TimeGrid {
public:
    TimeGrid(double t0, double dt, std::size_t steps) : t0_(t0), dt_(dt), steps_(steps) {
        if (!(t0 >= 0.0) || !std::isfinite(t0)) {
            throw invalid_input("time grid start must be nonnegative");
        }
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw invalid_input("time step must be positive");
        }
        if (steps == 0) {
            throw invalid_input("time grid needs at least one step");
        }
    }

    /// Grid on [0, t_final] with step closest to dt that divides the interval evenly.
    static TimeGrid covering(double t_final, double dt) {
        if (!(t_final > 0.0) || !(dt > 0.0)) {
            throw invalid_input("covering grid needs positive t_final and dt");
        }
        const auto steps = static_cast<std::size_t>(std::llround(t_final / dt));
        const std::size_t n = steps == 0 ? 1 : steps;
        return TimeGrid(0.0, t_final / static_cast<double>(n), n);
    }

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    std::size_t steps() const noexcept { return steps_; }
    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
    double t_final() const noexcept { return time(steps_); }

    /// Index of the grid point nearest to t.
    std::size_t index_of(double t) const {
        const double k = std::round((t - t0_) / dt_);
        if (k < 0.0 || k > static_cast<double>(steps_)) {
            throw invalid_input("time outside the grid");
        }
        return static_cast<std::size_t>(k);
    }

private:
    double t0_;
    double dt_;
    std::size_t steps_;
};

/**
 * One realization of a truncated Q-Wiener process
 *   W_t = sum_n sqrt(q_n) W_n(t) e_n.
 * Increments are stored raw (variance dt, not scaled by sqrt(q_n)) so a
 * path can be re-evaluated under another spectrum of the same size.
 */
class WienerPath {
public:
    WienerPath(TimeGrid grid, CovarianceSpectrum spec, DirichletBasis basis, std::vector<double> increments)
        : grid_(grid), spec_(std::move(spec)), basis_(basis), increments_(std::move(increments)),
          cumulative_((grid_.steps() + 1) * spec_.size(), 0.0) {
        const std::size_t n = spec_.size();
        for (std::size_t k = 0; k < grid_.steps(); ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                cumulative_[(k + 1) * n + i] = cumulative_[k * n + i] + increments_[k * n + i];
            }
        }
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    const CovarianceSpectrum& spectrum() const noexcept { return spec_; }
    const DirichletBasis& basis() const noexcept { return basis_; }
    std::size_t n_modes() const noexcept { return spec_.size(); }

    /// Raw increment W_n(t_{k+1}) - W_n(t_k); mode is 1-based.
    double increment(std::size_t k, std::size_t mode) const { return increments_[k * n_modes() + mode - 1]; }

    /// Standard scalar Brownian motion W_n(t_k); mode is 1-based.
    double mode_value(std::size_t k, std::size_t mode) const { return cumulative_[k * n_modes() + mode - 1]; }

    /// Coefficients <W_{t_k}, e_n> = sqrt(q_n) W_n(t_k).
    HilbertVector state(std::size_t k) const {
        require_step(k);
        HilbertVector out(n_modes());
        for (std::size_t i = 0; i < n_modes(); ++i) {
            out[i] = std::sqrt(spec_[i]) * cumulative_[k * n_modes() + i];
        }
        return out;
    }

    void require_step(std::size_t k) const {
        if (k > grid_.steps()) {
            throw invalid_input("step index beyond the grid");
        }
    }

private:
    TimeGrid grid_;
    CovarianceSpectrum spec_;
    DirichletBasis basis_;
    std::vector<double> increments_;  // [steps x N]
    std::vector<double> cumulative_;  // [(steps + 1) x N]
};

/// Draws mode n's increments from stream.child(n), so each mode's path is
/// independent of the truncation level.
inline WienerPath sample_path(const CovarianceSpectrum& spec, const DirichletBasis& basis, const TimeGrid& grid,
                              const RandomStream& stream) {
    basis.require_dimension(spec.size());
    const std::size_t n = spec.size();
    const std::size_t steps = grid.steps();
    const double scale = std::sqrt(grid.dt());
    std::vector<double> increments(steps * n);
    for (std::size_t i = 0; i < n; ++i) {
        NormalSource normal(stream.child(i + 1));
        for (std::size_t k = 0; k < steps; ++k) {
            increments[k * n + i] = scale * normal();
        }
    }
    return WienerPath(grid, spec, basis, std::move(increments));
}

/// W_{t_k}(x) = sum_n sqrt(q_n) W_n(t_k) e_n(x).
inline double field_value(const WienerPath& path, double x, std::size_t k) {
    path.require_step(k);
    path.basis().require_inside(x);
    double s = 0.0;
    for (std::size_t n = 1; n <= path.n_modes(); ++n) {
        const double q = path.spectrum()[n - 1];
        if (q != 0.0) {
            s += std::sqrt(q) * path.mode_value(k, n) * path.basis().eigenfunction(n, x);
        }
    }
    return s;
}

/**
 * Discrete Ito integral with left-endpoint evaluation:
 *   coefficient n = sqrt(q_n) sum_k Phi_n(t_k) (W_n(t_{k+1}) - W_n(t_k)).
 * `integrand(mode, k)` returns Phi_n(t_k) (mode is 1-based).
 */
template <class Integrand>
HilbertVector ito_integral(const WienerPath& path, Integrand&& integrand) {
    HilbertVector out(path.n_modes());
    for (std::size_t n = 1; n <= path.n_modes(); ++n) {
        double s = 0.0;
        for (std::size_t k = 0; k < path.grid().steps(); ++k) {
            s += integrand(n, k) * path.increment(k, n);
        }
        out[n - 1] = std::sqrt(path.spectrum()[n - 1]) * s;
    }
    return out;
}

}  // namespace spde_lab

#endif  // SPDE_LAB_WIENER_HPP

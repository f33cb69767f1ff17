#ifndef SPDE_LAB_LYAPUNOV_HPP
#define SPDE_LAB_LYAPUNOV_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include "hilbert.hpp"
#include "random.hpp"
#include "wiener.hpp"

namespace spde_lab {

/**
 * Deterministic system u_t = u_xx + alpha u and its stochastic counterpart
 * dv = (v_xx + beta v) dt + gamma v dw on (0, 1), both started from f.
 */
struct LyapunovProblem {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    HilbertVector f;

    std::size_t n_modes() const noexcept { return f.size(); }
    static double lambda(std::size_t n) noexcept {
        const double k = static_cast<double>(n) * std::numbers::pi;
        return k * k;
    }
};

/// Relative threshold below which a coefficient of f counts as zero.
inline constexpr double kLeadingModeTolerance = 1e-12;

/// Smallest mode n with |f_n| > tol ||f|| (1-based).
inline std::size_t leading_mode(const HilbertVector& f, double tol = kLeadingModeTolerance) {
    const double threshold = tol * f.norm();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (std::abs(f[i]) > threshold) {
            return i + 1;
        }
    }
    throw invalid_input("Lyapunov exponent needs a nonzero initial condition");
}

/// lambda^u(f) = -lambda_{n0} + alpha, n0 the leading excited mode.
inline double exponent_deterministic(const LyapunovProblem& prob) {
    return -LyapunovProblem::lambda(leading_mode(prob.f)) + prob.alpha;
}

/// (beta - alpha) - gamma^2 / 2: the shift from the deterministic to the stochastic exponent.
inline double stochastic_shift(double alpha, double beta, double gamma) { return (beta - alpha) - 0.5 * gamma * gamma; }

/// lambda^v(f) = lambda^u(f) + (beta - alpha) - gamma^2 / 2, almost surely.
inline double exponent_stochastic(const LyapunovProblem& prob) {
    return exponent_deterministic(prob) + stochastic_shift(prob.alpha, prob.beta, prob.gamma);
}

struct ExponentEstimate {
    double slope = 0.0;
    double std_error = 0.0;  // OLS standard error; residuals are serially correlated, so a diagnostic only
    double t_burn = 0.0;
    double t_final = 0.0;
    std::size_t points = 0;
    double residual_rms = 0.0;
};

/**
 * log ||v(t)|| for v_n(t) = exp(gamma w) exp((-lambda_n + beta - gamma^2/2) t) f_n,
 * evaluated by log-sum-exp over modes so it never under- or overflows.
 */
inline double log_norm(const LyapunovProblem& prob, double t, double w) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        if (prob.f[i] != 0.0) {
            peak = std::max(peak, 2.0 * (std::log(std::abs(prob.f[i])) - LyapunovProblem::lambda(i + 1) * t));
        }
    }
    if (peak == -std::numeric_limits<double>::infinity()) {
        throw invalid_input("Lyapunov path needs a nonzero initial condition");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        if (prob.f[i] != 0.0) {
            sum += std::exp(2.0 * (std::log(std::abs(prob.f[i])) - LyapunovProblem::lambda(i + 1) * t) - peak);
        }
    }
    const double drift = prob.beta - 0.5 * prob.gamma * prob.gamma;
    return prob.gamma * w + drift * t + 0.5 * (peak + std::log(sum));
}

/// log ||v(t_k)|| along one realization of the scalar Brownian motion drawn from `stream`.
inline std::vector<double> log_norm_path(const LyapunovProblem& prob, const TimeGrid& grid,
                                         const RandomStream& stream) {
    std::vector<double> out(grid.steps() + 1);
    NormalSource normal(stream);
    const double scale = std::sqrt(grid.dt());
    double w = grid.t0() > 0.0 ? std::sqrt(grid.t0()) * normal() : 0.0;
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        if (k > 0) {
            w += scale * normal();
        }
        out[k] = log_norm(prob, grid.time(k), w);
    }
    return out;
}

/// Least-squares slope of y against t over grid points with t_k >= t_burn.
inline ExponentEstimate fit_growth_rate(const TimeGrid& grid, const std::vector<double>& log_norms, double t_burn) {
    if (!(grid.t_final() > t_burn) || !(t_burn >= 0.0)) {
        throw invalid_input("regression window [t_burn, T] is empty");
    }
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        if (grid.time(k) >= t_burn) {
            ts.push_back(grid.time(k));
            ys.push_back(log_norms[k]);
        }
    }
    if (ts.size() < 3) {
        throw invalid_input("regression window holds fewer than three grid points");
    }
    const double n = static_cast<double>(ts.size());
    double tbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tbar += ts[i];
        ybar += ys[i];
    }
    tbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - tbar) * (ts[i] - tbar);
        sxy += (ts[i] - tbar) * (ys[i] - ybar);
    }
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * tbar;
    double ssr = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (intercept + slope * ts[i]);
        ssr += r * r;
    }
    ExponentEstimate est;
    est.slope = slope;
    est.std_error = std::sqrt(ssr / (n - 2.0) / sxx);
    est.t_burn = t_burn;
    est.t_final = grid.t_final();
    est.points = ts.size();
    est.residual_rms = std::sqrt(ssr / n);
    return est;
}

/// Default burn-in: the first tenth of the horizon.
inline double default_burn_in(const TimeGrid& grid) { return 0.1 * grid.t_final(); }

inline ExponentEstimate estimate_from_path(const LyapunovProblem& prob, const TimeGrid& grid,
                                           const RandomStream& stream, double t_burn) {
    leading_mode(prob.f);
    return fit_growth_rate(grid, log_norm_path(prob, grid, stream), t_burn);
}

/// Half-width 3 gamma / sqrt(T - t_burn) of the band the path estimate falls in.
inline double estimate_tolerance(double gamma, double t_final, double t_burn) {
    return 3.0 * std::abs(gamma) / std::sqrt(t_final - t_burn);
}

}  // namespace spde_lab

#endif  // SPDE_LAB_LYAPUNOV_HPP

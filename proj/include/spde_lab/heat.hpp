#ifndef SPDE_LAB_HEAT_HPP
#define SPDE_LAB_HEAT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "hilbert.hpp"
#include "random.hpp"
#include "wiener.hpp"

namespace spde_lab {

/**
 * u_t = u_xx + eps u dw/dt on (0, 1) with a scalar Brownian motion w and
 * zero Dirichlet data. Each mode is a geometric Brownian motion
 *   u_n(t) = a_n exp(b_n t + eps w_t),  b_n = -lambda_n - eps^2 / 2.
 */
struct HeatProblem {
    double epsilon = 0.0;
    HilbertVector a;

    HeatProblem(double eps, HilbertVector coeffs) : epsilon(eps), a(std::move(coeffs)) {
        if (a.size() == 0) {
            throw invalid_input("heat problem needs at least one mode");
        }
    }

    std::size_t n_modes() const noexcept { return a.size(); }
    DirichletBasis basis() const { return DirichletBasis(1.0, n_modes()); }
    double lambda(std::size_t n) const noexcept {
        const double k = static_cast<double>(n) * std::numbers::pi;
        return k * k;
    }
    double drift(std::size_t n) const noexcept { return -lambda(n) - 0.5 * epsilon * epsilon; }
};

/// Scalar Brownian path w(t_k) shared by all modes, and the resulting modal solution.
class HeatSample {
public:
    HeatSample(TimeGrid grid, std::vector<double> w, std::vector<double> u, std::size_t n_modes)
        : grid_(grid), w_(std::move(w)), u_(std::move(u)), n_(n_modes) {}

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t n_modes() const noexcept { return n_; }
    double w(std::size_t k) const { return w_[k]; }
    double u(std::size_t k, std::size_t mode) const { return u_[k * n_ + mode - 1]; }
    const std::vector<double>& brownian() const noexcept { return w_; }

private:
    TimeGrid grid_;
    std::vector<double> w_;
    std::vector<double> u_;
    std::size_t n_;
};

/// u_n(t_k) = a_n exp(b_n t_k + eps w(t_k)), exact in distribution at the grid points.
inline double heat_mode(const HeatProblem& prob, std::size_t mode, double t, double w) {
    return prob.a[mode - 1] * std::exp(prob.drift(mode) * t + prob.epsilon * w);
}

inline HeatSample sample_solution(const HeatProblem& prob, const TimeGrid& grid, const RandomStream& stream) {
    const std::size_t steps = grid.steps();
    const std::size_t n = prob.n_modes();
    std::vector<double> w(steps + 1, 0.0);
    NormalSource normal(stream);
    const double scale = std::sqrt(grid.dt());
    double acc = 0.0;
    if (grid.t0() > 0.0) {
        acc = std::sqrt(grid.t0()) * normal();
    }
    w[0] = acc;
    for (std::size_t k = 1; k <= steps; ++k) {
        acc += scale * normal();
        w[k] = acc;
    }
    std::vector<double> u((steps + 1) * n);
    for (std::size_t k = 0; k <= steps; ++k) {
        for (std::size_t m = 1; m <= n; ++m) {
            u[k * n + m - 1] = heat_mode(prob, m, grid.time(k), w[k]);
        }
    }
    return HeatSample(grid, std::move(w), std::move(u), n);
}

/// E u(., t) has coefficients a_n exp(-lambda_n t), independent of eps.
inline HilbertVector mean_closed_form(const HeatProblem& prob, double t) {
    if (!(t >= 0.0)) {
        throw invalid_input("heat mean needs t >= 0");
    }
    HilbertVector out(prob.n_modes());
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        out[i] = prob.a[i] * std::exp(-prob.lambda(i + 1) * t);
    }
    return out;
}

/// Cov(u(., t), u(., tau)) = sum a_n^2 exp(-lambda_n (t + tau)) [exp(eps^2 (t ^ tau)) - 1].
inline double covariance_closed_form(const HeatProblem& prob, double t, double tau) {
    if (!(t >= 0.0) || !(tau >= 0.0)) {
        throw invalid_input("heat covariance needs t, tau >= 0");
    }
    const double growth = std::expm1(prob.epsilon * prob.epsilon * std::min(t, tau));
    double total = 0.0;
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        total += prob.a[i] * prob.a[i] * std::exp(-prob.lambda(i + 1) * (t + tau)) * growth;
    }
    return total;
}

/// Var(u(., t)) = sum a_n^2 exp(-2 lambda_n t) [exp(eps^2 t) - 1]; the diagonal of the covariance.
inline double variance_closed_form(const HeatProblem& prob, double t) { return covariance_closed_form(prob, t, t); }

/// Corr(u(., t), u(., tau)); throws when either variance vanishes (eps = 0 or t tau = 0).
inline double correlation_closed_form(const HeatProblem& prob, double t, double tau) {
    if (!(t > 0.0) || !(tau > 0.0)) {
        throw invalid_input("heat correlation is degenerate unless t, tau > 0");
    }
    const double vt = variance_closed_form(prob, t);
    const double vtau = variance_closed_form(prob, tau);
    if (!(vt > 0.0) || !(vtau > 0.0)) {
        throw invalid_input("heat correlation is degenerate: zero variance");
    }
    return covariance_closed_form(prob, t, tau) / std::sqrt(vt * vtau);
}

}  // namespace spde_lab

#endif  // SPDE_LAB_HEAT_HPP

#ifndef SPDE_LAB_WAVE_HPP
#define SPDE_LAB_WAVE_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "hilbert.hpp"
#include "random.hpp"
#include "wiener.hpp"

namespace spde_lab {

/**
 * u_tt = c^2 u_xx + eps dW/dt on (0, l), zero Dirichlet data,
 * u(x, 0) = f, u_t(x, 0) = g. Modal data A_n = <f, e_n>,
 * B_n = <g, e_n> / mu_n with mu_n = c n pi / l.
 */
struct WaveProblem {
    double c = 1.0;
    double l = 1.0;
    double epsilon = 0.0;
    CovarianceSpectrum spectrum;
    HilbertVector A;
    HilbertVector B;

    WaveProblem(double c_, double l_, double eps, CovarianceSpectrum spec, HilbertVector a, HilbertVector b)
        : c(c_), l(l_), epsilon(eps), spectrum(std::move(spec)), A(std::move(a)), B(std::move(b)) {
        if (!(c > 0.0) || !(l > 0.0)) {
            throw invalid_input("wave speed and domain length must be positive");
        }
        if (A.size() != spectrum.size() || B.size() != spectrum.size()) {
            throw invalid_input("wave problem: modal data and spectrum sizes differ");
        }
    }

    std::size_t n_modes() const noexcept { return spectrum.size(); }
    DirichletBasis basis() const { return DirichletBasis(l, n_modes()); }

    /// Angular frequency mu_n = c n pi / l (1-based mode).
    double frequency(std::size_t n) const noexcept { return c * static_cast<double>(n) * std::numbers::pi / l; }
};

/// A_n = f_n, B_n = (l / (c n pi)) g_n.
inline std::pair<HilbertVector, HilbertVector> modal_data(const HilbertVector& f, const HilbertVector& g, double c,
                                                          double l) {
    if (!(c > 0.0) || !(l > 0.0)) {
        throw invalid_input("modal_data: c and l must be positive");
    }
    if (f.size() != g.size()) {
        throw invalid_input("modal_data: f and g sizes differ");
    }
    HilbertVector B(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        B[i] = l / (c * static_cast<double>(i + 1) * std::numbers::pi) * g[i];
    }
    return {f, std::move(B)};
}

namespace wave_detail {

/// x - sin(x), accurate for small x.
inline double x_minus_sin(double x) {
    if (std::abs(x) < 0.1) {
        const double x2 = x * x;
        return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
    }
    return x - std::sin(x);
}

/// Shared by the stochastic and deterministic evaluations so that a zero
/// noise weight reproduces the deterministic value bit for bit.
inline double combine(double a, double b, double cos_t, double sin_t) { return a * cos_t + b * sin_t; }

struct Phase {
    double cos;
    double sin;
};

// Kept out of line: compilers may fuse a cos/sin pair into sincos, which can
// differ from separate calls in the last bit, so every modal phase goes through
// this one body.
[[gnu::noinline]] inline Phase phase(double x) { return {std::cos(x), std::sin(x)}; }

}  // namespace wave_detail

/**
 * Covariance of (int sin(mu s) dW, int cos(mu s) dW) over [a, b]:
 * the three integrals of sin^2, cos^2 and sin*cos, written in a form free
 * of cancellation for short intervals.
 */
struct IncrementCovariance {
    double var_sin;
    double var_cos;
    double cov;

    static IncrementCovariance over(double mu, double a, double b) {
        const double dt = b - a;
        const double mid2 = mu * (a + b);  // 2 mu m, m the midpoint
        const double x = mu * dt;
        const double defect = wave_detail::x_minus_sin(x) / mu;  // dt - sin(mu dt) / mu
        const double s = std::sin(0.5 * mid2);
        const double c = std::cos(0.5 * mid2);
        const double cos2 = std::cos(mid2);
        IncrementCovariance out{};
        out.var_sin = std::max(0.0, dt * s * s + 0.5 * cos2 * defect);
        out.var_cos = std::max(0.0, dt * c * c - 0.5 * cos2 * defect);
        out.cov = std::sin(mid2) * std::sin(x) / (2.0 * mu);
        return out;
    }
};

/// Lower Cholesky factor of a 2x2 covariance; rank-1 fallback below the pivot tolerance.
struct Cholesky2 {
    double l11 = 0.0;
    double l21 = 0.0;
    double l22 = 0.0;

    static constexpr double kPivotTolerance = 1e-14;

    static Cholesky2 factor(const IncrementCovariance& cov) {
        Cholesky2 f;
        const double scale = cov.var_sin + cov.var_cos;
        if (cov.var_sin > kPivotTolerance * scale) {
            f.l11 = std::sqrt(cov.var_sin);
            f.l21 = cov.cov / f.l11;
            f.l22 = std::sqrt(std::max(0.0, cov.var_cos - f.l21 * f.l21));
        } else {
            f.l22 = std::sqrt(cov.var_cos);
        }
        return f;
    }
};

/**
 * Modal trajectories of one realization on a grid starting at t = 0:
 * displacement u_n, velocity v_n and the running integrals
 * Isin_n = int_0^t sin(mu_n s) dW_n, Icos_n = int_0^t cos(mu_n s) dW_n.
 */
class WaveSample {
public:
    WaveSample(TimeGrid grid, std::size_t n_modes)
        : grid_(grid), n_(n_modes), u_(size()), v_(size()), isin_(size()), icos_(size()) {}

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t n_modes() const noexcept { return n_; }

    double u(std::size_t k, std::size_t mode) const { return u_[k * n_ + mode - 1]; }
    double v(std::size_t k, std::size_t mode) const { return v_[k * n_ + mode - 1]; }
    double isin(std::size_t k, std::size_t mode) const { return isin_[k * n_ + mode - 1]; }
    double icos(std::size_t k, std::size_t mode) const { return icos_[k * n_ + mode - 1]; }

    HilbertVector displacement(std::size_t k) const {
        return HilbertVector(std::vector<double>(u_.begin() + static_cast<std::ptrdiff_t>(k * n_),
                                                 u_.begin() + static_cast<std::ptrdiff_t>((k + 1) * n_)));
    }

private:
    friend class WavePlan;
    std::size_t size() const { return (grid_.steps() + 1) * n_; }

    TimeGrid grid_;
    std::size_t n_;
    std::vector<double> u_, v_, isin_, icos_;
};

/**
 * Precomputed per-step trigonometric tables and increment factors for a
 * (problem, grid) pair. Sampling is exact in distribution at the grid points.
 */
class WavePlan {
public:
    WavePlan(const WaveProblem& prob, const TimeGrid& grid) : prob_(prob), grid_(grid) {
        if (grid.t0() != 0.0) {
            throw invalid_input("wave sampling needs a grid starting at t = 0");
        }
        const std::size_t n = prob.n_modes();
        const std::size_t steps = grid.steps();
        cos_.resize((steps + 1) * n);
        sin_.resize((steps + 1) * n);
        factors_.resize(steps * n);
        weight_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = prob.frequency(i + 1);
            weight_[i] = prob.epsilon * std::sqrt(prob.spectrum[i]) / mu;
            for (std::size_t k = 0; k <= steps; ++k) {
                const wave_detail::Phase ph = wave_detail::phase(mu * grid.time(k));
                cos_[k * n + i] = ph.cos;
                sin_[k * n + i] = ph.sin;
            }
            for (std::size_t k = 0; k < steps; ++k) {
                factors_[k * n + i] = Cholesky2::factor(IncrementCovariance::over(mu, grid.time(k), grid.time(k + 1)));
            }
        }
    }

    const WaveProblem& problem() const noexcept { return prob_; }
    const TimeGrid& grid() const noexcept { return grid_; }

    /// Mode n draws its standard normals from stream.child(n).
    WaveSample sample(const RandomStream& stream) const {
        const std::size_t n = prob_.n_modes();
        const std::size_t steps = grid_.steps();
        WaveSample out(grid_, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = prob_.frequency(i + 1);
            const double a = prob_.A[i];
            const double b = prob_.B[i];
            const double w = weight_[i];
            NormalSource normal(stream.child(i + 1));
            double is = 0.0, ic = 0.0;
            for (std::size_t k = 0; k <= steps; ++k) {
                if (k > 0) {
                    const Cholesky2& f = factors_[(k - 1) * n + i];
                    const double z1 = normal();
                    const double z2 = normal();
                    is += f.l11 * z1;
                    ic += f.l21 * z1 + f.l22 * z2;
                }
                const std::size_t at = k * n + i;
                const double ca = a - w * is;
                const double cb = b + w * ic;
                out.isin_[at] = is;
                out.icos_[at] = ic;
                out.u_[at] = wave_detail::combine(ca, cb, cos_[at], sin_[at]);
                out.v_[at] = mu * wave_detail::combine(cb, -ca, cos_[at], sin_[at]);
            }
        }
        return out;
    }

    /// Noise-free value A_n cos(mu_n t_k) + B_n sin(mu_n t_k) from the same tables.
    double deterministic_mode(std::size_t k, std::size_t mode) const {
        const std::size_t at = k * prob_.n_modes() + mode - 1;
        return wave_detail::combine(prob_.A[mode - 1], prob_.B[mode - 1], cos_[at], sin_[at]);
    }

private:
    WaveProblem prob_;
    TimeGrid grid_;
    std::vector<double> cos_, sin_;
    std::vector<Cholesky2> factors_;
    std::vector<double> weight_;  // eps sqrt(q_n) / mu_n
};

inline WaveSample sample_solution(const WaveProblem& prob, const TimeGrid& grid, const RandomStream& stream) {
    return WavePlan(prob, grid).sample(stream);
}

/// Modal coefficients of E u(., t): A_n cos(mu_n t) + B_n sin(mu_n t).
inline HilbertVector mean_modes(const WaveProblem& prob, double t) {
    HilbertVector out(prob.n_modes());
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        const double mu = prob.frequency(i + 1);
        const wave_detail::Phase ph = wave_detail::phase(mu * t);
        out[i] = wave_detail::combine(prob.A[i], prob.B[i], ph.cos, ph.sin);
    }
    return out;
}

/// E u(x, t) = sum [A_n cos(mu_n t) + B_n sin(mu_n t)] e_n(x).
inline double mean_solution(const WaveProblem& prob, double x, double t) {
    return prob.basis().evaluate(mean_modes(prob, t), x);
}

/**
 * Cov(u(., t), u(., s)) = E <u(t) - Eu(t), u(s) - Eu(s)>
 *   = sum eps^2 l^2 q_n / (2 c^2 n^2 pi^2) [ (t^s) cos(mu (t - s))
 *       + sin(mu (t + s - 2 (t^s))) / (2 mu) - sin(mu (t + s)) / (2 mu) ].
 */
inline double covariance_closed_form(const WaveProblem& prob, double t, double s) {
    if (!(t >= 0.0) || !(s >= 0.0)) {
        throw invalid_input("wave covariance needs t, s >= 0");
    }
    const double m = std::min(t, s);
    const double l = prob.l;
    const double c = prob.c;
    double total = 0.0;
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        const double q = prob.spectrum[i];
        if (q == 0.0) {
            continue;
        }
        const double npi = static_cast<double>(i + 1) * std::numbers::pi;
        const double mu = c * npi / l;
        const double weight = prob.epsilon * prob.epsilon * l * l * q / (2.0 * c * c * npi * npi);
        const double half_period = l / (2.0 * c * npi);
        total += weight * (m * std::cos(mu * (t - s)) + half_period * std::sin(mu * (t + s - 2.0 * m)) -
                           half_period * std::sin(mu * (t + s)));
    }
    return total;
}

/// Var(u(., t)) = sum eps^2 l^2 q_n / (2 c^2 n^2 pi^2) [t - l / (2 c n pi) sin(2 c n pi t / l)].
inline double variance_closed_form(const WaveProblem& prob, double t) {
    if (!(t >= 0.0)) {
        throw invalid_input("wave variance needs t >= 0");
    }
    const double l = prob.l;
    const double c = prob.c;
    double total = 0.0;
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        const double q = prob.spectrum[i];
        if (q == 0.0) {
            continue;
        }
        const double npi = static_cast<double>(i + 1) * std::numbers::pi;
        const double weight = prob.epsilon * prob.epsilon * l * l * q / (2.0 * c * c * npi * npi);
        total += weight * (t - l / (2.0 * c * npi) * std::sin(2.0 * c * npi * t / l));
    }
    return total;
}

/// E(t) = 1/2 sum [v_n^2 + c^2 lambda_n u_n^2] at step k (Parseval form of 1/2 int u_t^2 + c^2 u_x^2).
inline double energy(const WaveSample& sample, const WaveProblem& prob, std::size_t k) {
    if (k > sample.grid().steps()) {
        throw invalid_input("energy: step index beyond the grid");
    }
    double total = 0.0;
    for (std::size_t n = 1; n <= sample.n_modes(); ++n) {
        const double mu = prob.frequency(n);
        const double u = sample.u(k, n);
        const double v = sample.v(k, n);
        total += v * v + mu * mu * u * u;
    }
    return 0.5 * total;
}

/// Deterministic initial energy 1/2 sum mu_n^2 (A_n^2 + B_n^2).
inline double initial_energy(const WaveProblem& prob) {
    double total = 0.0;
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        const double mu = prob.frequency(i + 1);
        total += mu * mu * (prob.A[i] * prob.A[i] + prob.B[i] * prob.B[i]);
    }
    return 0.5 * total;
}

/**
 * Ensemble mean of the energy including the Ito drift of the forcing:
 * E E(t) = E(0) + eps^2 t Tr(Q) / 2.
 */
inline double energy_mean_closed_form(const WaveProblem& prob, double t) {
    return initial_energy(prob) + 0.5 * prob.epsilon * prob.epsilon * t * trace(prob.spectrum);
}

/**
 * Var(E(t)) = sum eps^2 q_n [A_n^2 mu_n^2 (t/2 - sin(2 mu_n t) / (4 mu_n))
 *                          + B_n^2 mu_n^2 (t/2 + sin(2 mu_n t) / (4 mu_n))
 *                          - A_n B_n mu_n (1 - cos(2 mu_n t)) / 2]
 *           + sum eps^4 q_n^2 [t^2 / 4 + (1 - cos(2 mu_n t)) / (8 mu_n^2)].
 */
inline double energy_variance_closed_form(const WaveProblem& prob, double t) {
    if (!(t >= 0.0)) {
        throw invalid_input("energy variance needs t >= 0");
    }
    const double e2 = prob.epsilon * prob.epsilon;
    double deterministic_part = 0.0;
    double noise_part = 0.0;
    for (std::size_t i = 0; i < prob.n_modes(); ++i) {
        const double q = prob.spectrum[i];
        if (q == 0.0) {
            continue;
        }
        const double mu = prob.frequency(i + 1);
        const double a = prob.A[i];
        const double b = prob.B[i];
        const double s2 = std::sin(2.0 * mu * t);
        const double one_minus_c2 = 1.0 - std::cos(2.0 * mu * t);
        deterministic_part += q * (a * a * mu * mu * (0.5 * t - s2 / (4.0 * mu)) +
                                   b * b * mu * mu * (0.5 * t + s2 / (4.0 * mu)) - 0.5 * a * b * mu * one_minus_c2);
        noise_part += q * q * (0.25 * t * t + one_minus_c2 / (8.0 * mu * mu));
    }
    return e2 * deterministic_part + e2 * e2 * noise_part;
}

}  // namespace spde_lab

#endif  // SPDE_LAB_WAVE_HPP

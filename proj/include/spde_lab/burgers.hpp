#ifndef SPDE_LAB_BURGERS_HPP
#define SPDE_LAB_BURGERS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "hilbert.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "wiener.hpp"

namespace spde_lab {

enum class NoiseKind {
    additive,        // sigma dW, W a Q-Wiener process
    multiplicative,  // sigma u dw, w a scalar Brownian motion
};

/**
 * u_t + u u_x = nu u_xx + noise on (0, l) with zero Dirichlet data.
 * poincare_c is the constant in ||u||^2 <= c ||u_x||^2; it may not be
 * smaller than the sharp value (l / pi)^2.
 */
struct BurgersProblem {
    double nu = 1.0;
    double l = 1.0;
    double sigma = 0.0;
    NoiseKind noise = NoiseKind::additive;
    std::optional<CovarianceSpectrum> spectrum;  // additive noise only
    HilbertVector u0;
    double poincare_c = 0.0;

    static double sharp_poincare(double length) { return (length / std::numbers::pi) * (length / std::numbers::pi); }

    static BurgersProblem additive(double nu, double l, double sigma, CovarianceSpectrum spec, HilbertVector u0,
                                   double poincare_c = 0.0) {
        BurgersProblem p{nu, l, sigma, NoiseKind::additive, std::move(spec), std::move(u0), poincare_c};
        p.validate();
        return p;
    }

    static BurgersProblem multiplicative(double nu, double l, double sigma, HilbertVector u0,
                                         double poincare_c = 0.0) {
        BurgersProblem p{nu, l, sigma, NoiseKind::multiplicative, std::nullopt, std::move(u0), poincare_c};
        p.validate();
        return p;
    }

    std::size_t n_modes() const noexcept { return u0.size(); }

    double lambda(std::size_t n) const noexcept {
        const double k = static_cast<double>(n) * std::numbers::pi / l;
        return k * k;
    }

    /// Tr(Q) for additive noise; 1 for the scalar multiplicative driver.
    double noise_trace() const { return spectrum ? trace(*spectrum) : 1.0; }

    void validate() {
        if (!(nu > 0.0) || !(l > 0.0) || !std::isfinite(sigma)) {
            throw invalid_input("Burgers problem needs nu > 0, l > 0 and finite sigma");
        }
        if (u0.size() == 0) {
            throw invalid_input("Burgers problem needs at least one mode");
        }
        if (noise == NoiseKind::additive) {
            if (!spectrum || spectrum->size() != u0.size()) {
                throw invalid_input("additive Burgers noise needs a spectrum with one entry per mode");
            }
        }
        const double sharp = sharp_poincare(l);
        if (poincare_c == 0.0) {
            poincare_c = sharp;
        }
        if (!(poincare_c >= sharp * (1.0 - 1e-12))) {
            throw invalid_input("Poincare constant must be at least (l/pi)^2");
        }
    }
};

/// Raised when a trajectory's energy exceeds the blow-up threshold or stops being finite.
class divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Limit of the additive mean-energy bound as t -> infinity: c sigma^2 l Tr(Q) / (2 nu).
inline double asymptotic_energy_additive(const BurgersProblem& prob) {
    return prob.poincare_c * prob.sigma * prob.sigma * prob.l * prob.noise_trace() / (2.0 * prob.nu);
}

/**
 * Gronwall bound for E||u(t)||^2 under additive noise, integrating
 *   d/dt E||u||^2 <= -(2 nu / c) E||u||^2 + sigma^2 l Tr(Q):
 *   e0 exp(-2 nu t / c) + (c sigma^2 l Tr(Q) / (2 nu)) (1 - exp(-2 nu t / c)).
 */
inline double energy_bound_additive(const BurgersProblem& prob, double t, double e0) {
    if (!(t >= 0.0)) {
        throw invalid_input("energy bound needs t >= 0");
    }
    const double rate = 2.0 * prob.nu / prob.poincare_c;
    const double decay = std::exp(-rate * t);
    return e0 * decay + asymptotic_energy_additive(prob) * (-std::expm1(-rate * t));
}

/// E||u(t)||^2 <= e0 exp((sigma^2 - 2 nu / c) t) under multiplicative noise.
inline double energy_bound_multiplicative(const BurgersProblem& prob, double t, double e0) {
    if (!(t >= 0.0)) {
        throw invalid_input("energy bound needs t >= 0");
    }
    return e0 * std::exp((prob.sigma * prob.sigma - 2.0 * prob.nu / prob.poincare_c) * t);
}

inline double energy_bound(const BurgersProblem& prob, double t, double e0) {
    return prob.noise == NoiseKind::additive ? energy_bound_additive(prob, t, e0)
                                             : energy_bound_multiplicative(prob, t, e0);
}

/// Chebyshev: P(||u(t)|| >= delta) <= min(1, bound(t) / delta^2).
inline double exit_probability_bound(const BurgersProblem& prob, double t, double e0, double delta) {
    if (!(delta > 0.0)) {
        throw invalid_input("exit probability needs delta > 0");
    }
    return std::min(1.0, energy_bound(prob, t, e0) / (delta * delta));
}

/// P(||u(t)|| < delta) >= 1 - exit bound.
inline double stay_probability_bound(const BurgersProblem& prob, double t, double e0, double delta) {
    return 1.0 - exit_probability_bound(prob, t, e0, delta);
}

/// Caveats attached to a bound evaluation (empty when there are none).
inline std::vector<std::string> bound_notes(const BurgersProblem& prob) {
    std::vector<std::string> notes;
    if (prob.noise == NoiseKind::additive && prob.l != 1.0) {
        notes.emplace_back(
            "additive bound carries the factor l*Tr(Q); the Ito correction for an L2(0,l)-valued "
            "Q-Wiener process is Tr(Q), so for l != 1 the bound is scaled by l");
    }
    return notes;
}

/**
 * Semi-implicit spectral Galerkin stepper on the sine basis.
 *
 * Diffusion is integrated exactly by the factor exp(-nu lambda_n dt); the
 * advection term is explicit in the skew-symmetric split
 *   N(u) = -(1/3) [u u_x + (u^2)_x]
 * evaluated on a collocation grid of M > 3N/2 cells (2/3-rule padding),
 * with (u^2)_x tested weakly against e_n'. The discrete form satisfies
 * <u, N(u)> = 0 up to roundoff. Noise enters as an Euler-Maruyama increment.
 */
class BurgersStepper {
public:
    BurgersStepper(const BurgersProblem& prob, double dt) : prob_(prob), dt_(dt), n_(prob.n_modes()) {
        if (!(dt > 0.0)) {
            throw invalid_input("Burgers step needs dt > 0");
        }
        const double limit = dt_max(prob);
        if (dt > limit) {
            throw invalid_input("Burgers step dt = " + std::to_string(dt) + " exceeds the advective limit " +
                                std::to_string(limit));
        }
        cells_ = (3 * n_) / 2 + 1;
        const std::size_t interior = cells_ - 1;
        h_ = prob.l / static_cast<double>(cells_);
        sin_table_.resize(interior * n_);
        dcos_table_.resize(interior * n_);
        sin_by_mode_.resize(interior * n_);
        dcos_by_mode_.resize(interior * n_);
        const double norm = std::sqrt(2.0 / prob.l);
        for (std::size_t j = 0; j < interior; ++j) {
            for (std::size_t i = 0; i < n_; ++i) {
                const double arg =
                    static_cast<double>(i + 1) * std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(cells_);
                const double k = static_cast<double>(i + 1) * std::numbers::pi / prob.l;
                sin_table_[j * n_ + i] = norm * std::sin(arg);
                dcos_table_[j * n_ + i] = norm * k * std::cos(arg);
                sin_by_mode_[i * interior + j] = sin_table_[j * n_ + i];
                dcos_by_mode_[i * interior + j] = dcos_table_[j * n_ + i];
            }
        }
        decay_.resize(n_);
        noise_scale_.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            decay_[i] = std::exp(-prob.nu * prob.lambda(i + 1) * dt);
            if (prob.noise == NoiseKind::additive) {
                noise_scale_[i] = prob.sigma * std::sqrt((*prob.spectrum)[i]);
            }
        }
        blowup_ = 1e6 * (prob.u0.norm2() + (prob.noise == NoiseKind::additive ? asymptotic_energy_additive(prob) : 0.0));
    }

    /**
     * Advective step limit 0.25 l / (N U), U = sqrt(2/l) sqrt(E) the amplitude
     * of a single mode carrying the natural energy scale E (the larger of the
     * initial energy and, for additive noise, the asymptotic bound).
     */
    static double dt_max(const BurgersProblem& prob) {
        double scale = prob.u0.norm2();
        if (prob.noise == NoiseKind::additive) {
            scale = std::max(scale, asymptotic_energy_additive(prob));
        }
        const double amplitude = std::sqrt(2.0 / prob.l) * std::sqrt(scale);
        if (amplitude == 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return 0.25 * prob.l / (static_cast<double>(prob.n_modes()) * amplitude);
    }

    double dt() const noexcept { return dt_; }
    std::size_t collocation_cells() const noexcept { return cells_; }
    double blowup_threshold() const noexcept { return blowup_; }
    const BurgersProblem& problem() const noexcept { return prob_; }

    /// Number of standard normals consumed per step.
    std::size_t draws_per_step() const noexcept { return prob_.noise == NoiseKind::additive ? n_ : 1; }

    /// Modal coefficients of the skew-symmetric advection term N(u).
    void nonlinearity(std::span<const double> u, std::span<double> out) const {
        const std::size_t interior = cells_ - 1;
        thread_local std::vector<double> uj, uxj;
        uj.assign(interior, 0.0);
        uxj.assign(interior, 0.0);
        // grid values; both passes are axpy loops so they vectorize without reordering any sum
        for (std::size_t i = 0; i < n_; ++i) {
            const double ui = u[i];
            const double* s = &sin_by_mode_[i * interior];
            const double* d = &dcos_by_mode_[i * interior];
            for (std::size_t j = 0; j < interior; ++j) {
                uj[j] += s[j] * ui;
                uxj[j] += d[j] * ui;
            }
        }
        std::fill(out.begin(), out.end(), 0.0);
        const double w = -h_ / 3.0;
        for (std::size_t j = 0; j < interior; ++j) {
            const double p = w * uj[j] * uxj[j];
            const double q = w * uj[j] * uj[j];
            const double* s = &sin_table_[j * n_];
            const double* d = &dcos_table_[j * n_];
            for (std::size_t i = 0; i < n_; ++i) {
                out[i] += p * s[i] - q * d[i];
            }
        }
    }

    HilbertVector nonlinearity(const HilbertVector& u) const {
        if (u.size() != n_) {
            throw invalid_input("nonlinearity: dimension mismatch");
        }
        HilbertVector out(n_);
        nonlinearity(u.coeffs(), out.coeffs());
        return out;
    }

    /**
     * Advance one step with the given Brownian increments (variance dt):
     * one per mode for additive noise, a single shared one for multiplicative.
     * Throws divergence_error past the blow-up threshold.
     */
    void step(HilbertVector& u, std::span<const double> increments) const {
        if (u.size() != n_ || increments.size() != draws_per_step()) {
            throw invalid_input("Burgers step: dimension mismatch");
        }
        thread_local std::vector<double> work;
        work.resize(n_);
        nonlinearity(u.coeffs(), work);
        double energy = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double next = u[i] + dt_ * work[i];
            if (prob_.noise == NoiseKind::additive) {
                next += noise_scale_[i] * increments[i];
            } else {
                next += prob_.sigma * u[i] * increments[0];
            }
            u[i] = decay_[i] * next;
            energy += u[i] * u[i];
        }
        if (!std::isfinite(energy) || energy > blowup_) {
            throw divergence_error("Burgers trajectory diverged: ||u||^2 = " + std::to_string(energy));
        }
    }

    /// Draws the increments from `normal` and advances one step.
    void step(HilbertVector& u, NormalSource& normal) const {
        thread_local std::vector<double> dw;
        dw.resize(draws_per_step());
        const double scale = std::sqrt(dt_);
        for (double& x : dw) {
            x = scale * normal();
        }
        step(u, dw);
    }

private:
    BurgersProblem prob_;
    double dt_;
    std::size_t n_;
    std::size_t cells_ = 0;
    double h_ = 0.0;
    double blowup_ = 0.0;
    std::vector<double> sin_table_;   // [interior x N]: e_n(x_j)
    std::vector<double> dcos_table_;  // [interior x N]: e_n'(x_j)
    std::vector<double> sin_by_mode_;   // [N x interior]
    std::vector<double> dcos_by_mode_;  // [N x interior]
    std::vector<double> decay_;
    std::vector<double> noise_scale_;
};

/// One step from `state`; convenience wrapper that rebuilds the collocation tables.
inline HilbertVector step(HilbertVector state, const BurgersProblem& prob, double dt, NormalSource& normal) {
    BurgersStepper(prob, dt).step(state, normal);
    return state;
}

/// Per-step ||u(t_k)||^2 of one sample.
struct EnergyTrace {
    TimeGrid grid;
    std::vector<double> e2;
};

inline EnergyTrace sample_energy_trace(const BurgersStepper& stepper, const TimeGrid& grid,
                                       const RandomStream& stream) {
    if (std::abs(grid.dt() - stepper.dt()) > 1e-15 * stepper.dt()) {
        throw invalid_input("energy trace: grid step differs from the stepper's");
    }
    EnergyTrace trace{grid, std::vector<double>(grid.steps() + 1)};
    HilbertVector u = stepper.problem().u0;
    NormalSource normal(stream);
    trace.e2[0] = u.norm2();
    for (std::size_t k = 1; k <= grid.steps(); ++k) {
        stepper.step(u, normal);
        trace.e2[k] = u.norm2();
    }
    return trace;
}

inline EnergyTrace sample_energy_trace(const BurgersProblem& prob, const TimeGrid& grid, const RandomStream& stream) {
    return sample_energy_trace(BurgersStepper(prob, grid.dt()), grid, stream);
}

/// Ensemble statistics of ||u(t_k)||^2 and, when a radius is given, of the exit indicator ||u|| >= delta.
struct EnergyEnsemble {
    SlotStats<EnsembleStats> energy;
    SlotStats<EnsembleStats> exits;
    std::size_t samples = 0;
    std::size_t diverged = 0;

    void merge(const EnergyEnsemble& o) {
        energy.merge(o.energy);
        exits.merge(o.exits);
        samples += o.samples;
        diverged += o.diverged;
    }
};

/**
 * Run `samples` trajectories, sample i driven by stream.child(i). Diverging
 * samples are counted in `diverged` and left out of the statistics.
 */
inline EnergyEnsemble simulate_energy_ensemble(const BurgersProblem& prob, const TimeGrid& grid, std::size_t samples,
                                               const RandomStream& stream, unsigned workers = 1,
                                               std::optional<double> delta = std::nullopt) {
    if (samples < 2) {
        throw invalid_input("energy ensemble needs at least two samples");
    }
    const BurgersStepper stepper(prob, grid.dt());
    const std::size_t slots = grid.steps() + 1;
    EnergyEnsemble identity{SlotStats<EnsembleStats>(slots), SlotStats<EnsembleStats>(delta ? slots : 0), 0, 0};
    const double radius2 = delta ? (*delta) * (*delta) : 0.0;
    return reduce_samples(samples, workers, identity, [&](std::size_t i, EnergyEnsemble& acc) {
        ++acc.samples;
        std::optional<EnergyTrace> trace;
        try {
            trace.emplace(sample_energy_trace(stepper, grid, stream.child(i)));
        } catch (const divergence_error&) {
            ++acc.diverged;
            return;
        }
        for (std::size_t k = 0; k < slots; ++k) {
            acc.energy[k].add(trace->e2[k]);
            if (delta) {
                acc.exits[k].add(trace->e2[k] >= radius2 ? 1.0 : 0.0);
            }
        }
    });
}

}  // namespace spde_lab

#endif  // SPDE_LAB_BURGERS_HPP

#ifndef SPDE_LAB_HILBERT_HPP
#define SPDE_LAB_HILBERT_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spde_lab {

/// Raised for inputs that violate an operation's preconditions.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Coefficients of a function in a truncated orthonormal basis,
 * h = sum_n <h, e_n> e_n for n = 1..N. Entry i holds mode n = i + 1.
 */
class HilbertVector {
public:
    HilbertVector() = default;
    explicit HilbertVector(std::size_t n_modes) : coeffs_(n_modes, 0.0) {}
    explicit HilbertVector(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

    /// Unit vector e_n (1-based mode index).
    static HilbertVector unit(std::size_t n_modes, std::size_t mode) {
        if (mode < 1 || mode > n_modes) {
            throw invalid_input("unit vector mode out of range");
        }
        HilbertVector v(n_modes);
        v.coeffs_[mode - 1] = 1.0;
        return v;
    }

    std::size_t size() const noexcept { return coeffs_.size(); }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    std::vector<double>& coeffs() noexcept { return coeffs_; }

    /// Squared norm via Parseval at the truncation level.
    double norm2() const noexcept {
        return std::inner_product(coeffs_.begin(), coeffs_.end(), coeffs_.begin(), 0.0);
    }
    double norm() const noexcept { return std::sqrt(norm2()); }

    bool operator==(const HilbertVector&) const = default;

private:
    std::vector<double> coeffs_;
};

inline double inner(const HilbertVector& a, const HilbertVector& b) {
    if (a.size() != b.size()) {
        throw invalid_input("inner product: dimension mismatch");
    }
    return std::inner_product(a.coeffs().begin(), a.coeffs().end(), b.coeffs().begin(), 0.0);
}

/**
 * Dirichlet sine basis on (0, l):
 *   e_n(x) = sqrt(2/l) sin(n pi x / l),  lambda_n = (n pi / l)^2,  n = 1..N.
 */
class DirichletBasis {
public:
    DirichletBasis(double length, std::size_t n_modes) : l_(length), n_(n_modes) {
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw invalid_input("basis length must be positive");
        }
        if (n_modes == 0) {
            throw invalid_input("basis needs at least one mode");
        }
    }

    double length() const noexcept { return l_; }
    std::size_t n_modes() const noexcept { return n_; }

    double eigenfunction(std::size_t n, double x) const {
        return std::sqrt(2.0 / l_) * std::sin(static_cast<double>(n) * std::numbers::pi * x / l_);
    }

    /// d/dx e_n(x).
    double eigenfunction_dx(std::size_t n, double x) const {
        const double k = static_cast<double>(n) * std::numbers::pi / l_;
        return std::sqrt(2.0 / l_) * k * std::cos(k * x);
    }

    double eigenvalue(std::size_t n) const {
        const double k = static_cast<double>(n) * std::numbers::pi / l_;
        return k * k;
    }

    bool contains(double x) const noexcept { return x >= 0.0 && x <= l_; }

    /// sum_n h_n e_n(x).
    double evaluate(const HilbertVector& h, double x) const {
        require_dimension(h.size());
        require_inside(x);
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            s += h[i] * eigenfunction(i + 1, x);
        }
        return s;
    }

    /// Default quadrature resolution: at least 8 points per mode.
    std::size_t default_intervals() const noexcept { return 8 * n_; }

    /**
     * Coefficients <f, e_n> by composite trapezoid on a uniform grid of
     * `intervals` cells. Exact (up to roundoff) for sine polynomials of degree
     * below 2 * intervals - N.
     */
    template <class F>
    HilbertVector project(F&& f, std::size_t intervals = 0) const {
        if (intervals == 0) {
            intervals = default_intervals();
        }
        const double h = l_ / static_cast<double>(intervals);
        std::vector<double> values(intervals + 1);
        for (std::size_t j = 0; j <= intervals; ++j) {
            values[j] = f(static_cast<double>(j) * h);
        }
        HilbertVector out(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= intervals; ++j) {
                const double w = (j == 0 || j == intervals) ? 0.5 : 1.0;
                s += w * values[j] * eigenfunction(i + 1, static_cast<double>(j) * h);
            }
            out[i] = h * s;
        }
        return out;
    }

    void require_dimension(std::size_t n) const {
        if (n != n_) {
            throw invalid_input("dimension mismatch: expected " + std::to_string(n_) +
                                " modes, got " + std::to_string(n));
        }
    }

    void require_inside(double x) const {
        if (!contains(x)) {
            throw invalid_input("coordinate outside the domain [0, l]");
        }
    }

private:
    double l_;
    std::size_t n_;
};

/// Composite trapezoid of f over [a, b] with `intervals` cells.
template <class F>
double trapezoid(F&& f, double a, double b, std::size_t intervals) {
    const double h = (b - a) / static_cast<double>(intervals);
    double s = 0.5 * (f(a) + f(b));
    for (std::size_t j = 1; j < intervals; ++j) {
        s += f(a + static_cast<double>(j) * h);
    }
    return h * s;
}

namespace decay {
struct FiniteRank {
    std::vector<double> leading;  // q_1..q_m; q_n = 0 for n > m
};
struct Power {
    double p;  // q_n = n^-p
};
struct Exponential {
    double r;  // q_n = exp(-r n)
};
struct Explicit {};
}  // namespace decay

using DecayLaw = std::variant<decay::FiniteRank, decay::Power, decay::Exponential, decay::Explicit>;

/**
 * Eigenvalues {q_n} of a trace-class covariance operator Q, aligned with
 * the basis index (entry i is mode n = i + 1).
 */
class CovarianceSpectrum {
public:
    /// Explicit list; its length is the truncation N.
    explicit CovarianceSpectrum(std::vector<double> q) : q_(std::move(q)), law_(decay::Explicit{}) {
        validate();
    }

    static CovarianceSpectrum finite_rank(std::vector<double> leading, std::size_t n_modes) {
        if (leading.size() > n_modes) {
            throw invalid_input("finite-rank spectrum has more entries than modes");
        }
        std::vector<double> q(n_modes, 0.0);
        std::copy(leading.begin(), leading.end(), q.begin());
        return CovarianceSpectrum(std::move(q), decay::FiniteRank{std::move(leading)});
    }

    static CovarianceSpectrum power(double p, std::size_t n_modes) {
        if (!(p > 1.0) || !std::isfinite(p)) {
            throw invalid_input("power law needs p > 1 for a trace-class covariance");
        }
        std::vector<double> q(n_modes);
        for (std::size_t i = 0; i < n_modes; ++i) {
            q[i] = std::pow(static_cast<double>(i + 1), -p);
        }
        return CovarianceSpectrum(std::move(q), decay::Power{p});
    }

    static CovarianceSpectrum exponential(double r, std::size_t n_modes) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw invalid_input("exponential law needs r > 0");
        }
        std::vector<double> q(n_modes);
        for (std::size_t i = 0; i < n_modes; ++i) {
            q[i] = std::exp(-r * static_cast<double>(i + 1));
        }
        return CovarianceSpectrum(std::move(q), decay::Exponential{r});
    }

    std::size_t size() const noexcept { return q_.size(); }
    double operator[](std::size_t i) const { return q_[i]; }
    const std::vector<double>& values() const noexcept { return q_; }
    const DecayLaw& law() const noexcept { return law_; }

    /// Mass beyond the truncation, sum_{n > N} q_n. Zero for finite-rank and explicit lists.
    double tail_mass() const {
        const auto n = static_cast<double>(q_.size());
        if (const auto* pw = std::get_if<decay::Power>(&law_)) {
            return power_tail(pw->p, q_.size());
        }
        if (const auto* ex = std::get_if<decay::Exponential>(&law_)) {
            return std::exp(-ex->r * (n + 1.0)) / (1.0 - std::exp(-ex->r));
        }
        return 0.0;
    }

    /// Sum_{n > N} n^-p via Euler-Maclaurin, after summing a short head directly.
    static double power_tail(double p, std::size_t n_modes) {
        std::size_t start = n_modes;
        double head = 0.0;
        for (; start < 16; ++start) {
            head += std::pow(static_cast<double>(start + 1), -p);
        }
        const double m = static_cast<double>(start);
        const double integral = std::pow(m, 1.0 - p) / (p - 1.0);
        const double tail = integral - 0.5 * std::pow(m, -p) + p * std::pow(m, -p - 1.0) / 12.0 -
                            p * (p + 1.0) * (p + 2.0) * std::pow(m, -p - 3.0) / 720.0;
        return head + tail;
    }

    bool operator==(const CovarianceSpectrum& o) const { return q_ == o.q_; }

private:
    CovarianceSpectrum(std::vector<double> q, DecayLaw law) : q_(std::move(q)), law_(std::move(law)) {
        validate();
    }

    void validate() const {
        if (q_.empty()) {
            throw invalid_input("spectrum needs at least one mode");
        }
        for (double v : q_) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw invalid_input("covariance eigenvalues must be finite and nonnegative");
            }
        }
    }

    std::vector<double> q_;
    DecayLaw law_;
};

/// Tr(Q) = sum_n q_n over the stored truncation.
inline double trace(const CovarianceSpectrum& spec) {
    return std::accumulate(spec.values().begin(), spec.values().end(), 0.0);
}

/// Q^gamma a = sum_n q_n^gamma <a, e_n> e_n; gamma = 0 returns a unchanged.
inline HilbertVector apply_q_gamma(const CovarianceSpectrum& spec, double gamma, const HilbertVector& a) {
    if (!(gamma >= 0.0)) {
        throw invalid_input("apply_q_gamma: gamma must be nonnegative");
    }
    if (a.size() != spec.size()) {
        throw invalid_input("apply_q_gamma: dimension mismatch");
    }
    if (gamma == 0.0) {
        return a;
    }
    HilbertVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double factor = gamma == 1.0 ? spec[i] : std::pow(spec[i], gamma);
        out[i] = factor * a[i];
    }
    return out;
}

/// Spatial correlation q(x, y) = sum_n q_n e_n(x) e_n(y).
inline double kernel(const CovarianceSpectrum& spec, const DirichletBasis& basis, double x, double y) {
    basis.require_dimension(spec.size());
    basis.require_inside(x);
    basis.require_inside(y);
    double s = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec[i] != 0.0) {
            s += spec[i] * basis.eigenfunction(i + 1, x) * basis.eigenfunction(i + 1, y);
        }
    }
    return s;
}

/// Smallest N whose tail mass is below rel_tol * Tr(Q) for a power or exponential law.
inline std::size_t suggest_modes(const DecayLaw& law, double rel_tol = 1e-6, std::size_t max_modes = 1u << 24) {
    auto build = [&](std::size_t n) {
        if (const auto* pw = std::get_if<decay::Power>(&law)) {
            return CovarianceSpectrum::power(pw->p, n);
        }
        if (const auto* ex = std::get_if<decay::Exponential>(&law)) {
            return CovarianceSpectrum::exponential(ex->r, n);
        }
        throw invalid_input("suggest_modes needs a power or exponential law");
    };
    std::size_t n = 1;
    while (n <= max_modes) {
        const auto s = build(n);
        if (s.tail_mass() < rel_tol * (trace(s) + s.tail_mass())) {
            // Refine downward by bisection between n/2 and n.
            std::size_t lo = n / 2, hi = n;
            while (hi - lo > 1) {
                const std::size_t mid = lo + (hi - lo) / 2;
                const auto sm = build(mid);
                if (sm.tail_mass() < rel_tol * (trace(sm) + sm.tail_mass())) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
        n *= 2;
    }
    throw invalid_input("suggest_modes: tail does not fall below tolerance");
}

namespace detail {
inline double parse_real(std::string_view text) {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    if (!text.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw invalid_input("malformed number in spectrum: '" + std::string(text) + "'");
    }
    return v;
}
}  // namespace detail

/**
 * Parse a spectrum specification:
 *   finite:q1,q2,...   leading eigenvalues, zero beyond
 *   power:p            q_n = n^-p
 *   exp:r              q_n = exp(-r n)
 */
inline CovarianceSpectrum parse_spectrum(std::string_view text, std::size_t n_modes) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw invalid_input("spectrum must look like kind:args, got '" + std::string(text) + "'");
    }
    const auto kind = text.substr(0, colon);
    const auto args = text.substr(colon + 1);
    if (kind == "finite") {
        std::vector<double> q;
        std::size_t pos = 0;
        while (pos <= args.size()) {
            const auto comma = args.find(',', pos);
            const auto end = comma == std::string_view::npos ? args.size() : comma;
            q.push_back(detail::parse_real(args.substr(pos, end - pos)));
            if (comma == std::string_view::npos) {
                break;
            }
            pos = comma + 1;
        }
        return CovarianceSpectrum::finite_rank(std::move(q), n_modes);
    }
    if (kind == "power") {
        return CovarianceSpectrum::power(detail::parse_real(args), n_modes);
    }
    if (kind == "exp") {
        return CovarianceSpectrum::exponential(detail::parse_real(args), n_modes);
    }
    throw invalid_input("unknown spectrum kind '" + std::string(kind) + "'");
}

}  // namespace spde_lab

#endif  // SPDE_LAB_HILBERT_HPP

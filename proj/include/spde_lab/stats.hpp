#ifndef SPDE_LAB_STATS_HPP
#define SPDE_LAB_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace spde_lab {

/**
 * Streaming mean/variance (Welford). Two accumulators combine with the
 * parallel update of Chan et al.; merge(a, empty) returns a unchanged.
 */
class EnsembleStats {
public:
    void add(double x) noexcept {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    void merge(const EnsembleStats& o) noexcept {
        if (o.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(o.count_);
        const double n = na + nb;
        const double delta = o.mean_ - mean_;
        mean_ += delta * nb / n;
        m2_ += o.m2_ + delta * delta * na * nb / n;
        count_ += o.count_;
    }

    std::size_t count() const noexcept { return count_; }
    double mean() const noexcept { return mean_; }
    double m2() const noexcept { return m2_; }

    /// Sample variance m2 / (count - 1); NaN below two samples.
    double variance() const noexcept {
        return count_ < 2 ? std::numeric_limits<double>::quiet_NaN() : m2_ / static_cast<double>(count_ - 1);
    }
    double stderr_mean() const noexcept { return std::sqrt(variance() / static_cast<double>(count_)); }

    /// sqrt(p (1 - p) / n) treating the samples as 0/1 indicators.
    double binomial_stderr() const noexcept {
        const double p = mean_;
        return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(count_));
    }

    bool operator==(const EnsembleStats&) const = default;

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline EnsembleStats merge(EnsembleStats a, const EnsembleStats& b) noexcept {
    a.merge(b);
    return a;
}

/// Bivariate Welford with co-moment, for sample covariances.
class CovarianceStats {
public:
    void add(double x, double y) noexcept {
        ++count_;
        const double n = static_cast<double>(count_);
        const double dx = x - mean_x_;
        mean_x_ += dx / n;
        const double dy = y - mean_y_;
        mean_y_ += dy / n;
        cxy_ += dx * (y - mean_y_);
        m2x_ += dx * (x - mean_x_);
        m2y_ += dy * (y - mean_y_);
    }

    void merge(const CovarianceStats& o) noexcept {
        if (o.count_ == 0) {
            return;
        }
        if (count_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count_);
        const double nb = static_cast<double>(o.count_);
        const double n = na + nb;
        const double dx = o.mean_x_ - mean_x_;
        const double dy = o.mean_y_ - mean_y_;
        mean_x_ += dx * nb / n;
        mean_y_ += dy * nb / n;
        cxy_ += o.cxy_ + dx * dy * na * nb / n;
        m2x_ += o.m2x_ + dx * dx * na * nb / n;
        m2y_ += o.m2y_ + dy * dy * na * nb / n;
        count_ += o.count_;
    }

    std::size_t count() const noexcept { return count_; }
    double mean_x() const noexcept { return mean_x_; }
    double mean_y() const noexcept { return mean_y_; }
    double covariance() const noexcept { return cxy_ / static_cast<double>(count_ - 1); }
    double correlation() const noexcept { return cxy_ / std::sqrt(m2x_ * m2y_); }

private:
    std::size_t count_ = 0;
    double mean_x_ = 0.0;
    double mean_y_ = 0.0;
    double cxy_ = 0.0;
    double m2x_ = 0.0;
    double m2y_ = 0.0;
};

/// A Monte Carlo estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

inline Estimate mean_estimate(std::span<const double> xs) {
    EnsembleStats s;
    for (double x : xs) {
        s.add(x);
    }
    return {s.mean(), s.stderr_mean()};
}

/**
 * Sample variance with the large-sample standard error
 * sqrt((m4 - m2^2) / n), m_k the central sample moments.
 */
inline Estimate variance_estimate(std::span<const double> xs) {
    if (xs.size() < 2) {
        throw std::invalid_argument("variance_estimate needs at least two samples");
    }
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d2 = (x - mean) * (x - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double var = m2 / (n - 1.0);
    m2 /= n;
    m4 /= n;
    return {var, std::sqrt(std::max(0.0, m4 - m2 * m2) / n)};
}

/**
 * Correlation of (x, y) about known means, with a delta-method standard
 * error from the influence function of the ratio estimator.
 */
inline Estimate correlation_estimate(std::span<const double> xs, std::span<const double> ys, double mean_x,
                                     double mean_y) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw std::invalid_argument("correlation_estimate needs matching samples");
    }
    const double n = static_cast<double>(xs.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const double vx = sxx / n, vy = syy / n, cxy = sxy / n;
    const double r = cxy / std::sqrt(vx * vy);
    EnsembleStats influence;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        influence.add(dx * dy / std::sqrt(vx * vy) - 0.5 * r * (dx * dx / vx + dy * dy / vy));
    }
    return {r, influence.stderr_mean()};
}

/**
 * r = mean(p) / sqrt(mean(a) mean(b)) for per-sample p = <X, Y>, a = |X|^2,
 * b = |Y|^2 of centred vectors X, Y, with a delta-method standard error.
 * For scalars this is correlation_estimate.
 */
inline Estimate ratio_correlation_estimate(std::span<const double> ps, std::span<const double> as,
                                           std::span<const double> bs) {
    if (ps.size() != as.size() || ps.size() != bs.size() || ps.size() < 2) {
        throw std::invalid_argument("ratio_correlation_estimate needs matching samples");
    }
    const double n = static_cast<double>(ps.size());
    double sp = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        sp += ps[i];
        sa += as[i];
        sb += bs[i];
    }
    const double mp = sp / n, ma = sa / n, mb = sb / n;
    const double norm = std::sqrt(ma * mb);
    const double r = mp / norm;
    EnsembleStats influence;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        influence.add(ps[i] / norm - 0.5 * r * (as[i] / ma + bs[i] / mb));
    }
    return {r, influence.stderr_mean()};
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("median of empty sample");
    }
    const auto mid = xs.begin() + static_cast<std::ptrdiff_t>(xs.size() / 2);
    std::nth_element(xs.begin(), mid, xs.end());
    if (xs.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(xs.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace spde_lab

#endif  // SPDE_LAB_STATS_HPP

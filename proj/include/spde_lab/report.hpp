#ifndef SPDE_LAB_REPORT_HPP
#define SPDE_LAB_REPORT_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stats.hpp"

namespace spde_lab {

/// How a closed-form value constrains the Monte Carlo estimate.
enum class Relation {
    equal,    // |z| <= 3
    at_most,  // z <= 3: the closed form is an upper bound
};

struct ReportRow {
    std::string label;
    double t = 0.0;
    double closed_form = 0.0;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double z = 0.0;
    bool pass = false;
};

inline constexpr double kZThreshold = 3.0;

/// Thrown when a zero-variance estimate disagrees with its closed form.
class deterministic_mismatch : public std::runtime_error {
public:
    explicit deterministic_mismatch(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Build a report row. With zero standard error the row passes only if the
 * estimate agrees with the closed form within `abs_tol` (z is then 0);
 * otherwise deterministic_mismatch is thrown. A nonzero standard error
 * gives z = (mc_mean - closed_form) / mc_stderr, also accepted when the
 * absolute discrepancy is within `abs_tol`.
 */
inline ReportRow compare(std::string label, double t, double closed_form, Estimate mc,
                         Relation relation = Relation::equal, double abs_tol = 0.0) {
    ReportRow row{std::move(label), t, closed_form, mc.value, mc.std_error, 0.0, false};
    const double diff = mc.value - closed_form;
    const bool within_tol = std::abs(diff) <= abs_tol || (relation == Relation::at_most && diff <= abs_tol);
    if (!(mc.std_error > 0.0)) {
        if (!within_tol) {
            throw deterministic_mismatch("deterministic mismatch in '" + row.label + "': closed form " +
                                         std::to_string(closed_form) + " vs estimate " + std::to_string(mc.value));
        }
        row.z = 0.0;
        row.pass = true;
        return row;
    }
    row.z = diff / mc.std_error;
    const bool z_ok = relation == Relation::equal ? std::abs(row.z) <= kZThreshold : row.z <= kZThreshold;
    row.pass = z_ok || within_tol;
    return row;
}

inline ReportRow compare(std::string label, double t, double closed_form, const EnsembleStats& stats,
                         Relation relation = Relation::equal, double abs_tol = 0.0) {
    if (stats.count() < 2) {
        throw std::invalid_argument("compare needs at least two samples");
    }
    return compare(std::move(label), t, closed_form, Estimate{stats.mean(), stats.stderr_mean()}, relation, abs_tol);
}

/// Like compare(), but records a zero-variance mismatch as a failed row instead of throwing.
inline ReportRow compare_or_fail(std::string label, double t, double closed_form, Estimate mc,
                                 Relation relation = Relation::equal, double abs_tol = 0.0) {
    try {
        return compare(label, t, closed_form, mc, relation, abs_tol);
    } catch (const deterministic_mismatch&) {
        return ReportRow{std::move(label), t, closed_form, mc.value, mc.std_error,
                         std::copysign(INFINITY, mc.value - closed_form), false};
    }
}

/// Shortest round-trip decimal form of a double.
inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

class ClosedFormReport {
public:
    void add(ReportRow row) { rows_.push_back(std::move(row)); }
    const std::vector<ReportRow>& rows() const noexcept { return rows_; }

    std::size_t passed() const {
        std::size_t n = 0;
        for (const auto& r : rows_) {
            n += r.pass ? 1 : 0;
        }
        return n;
    }
    std::size_t failed() const { return rows_.size() - passed(); }
    bool all_pass() const { return failed() == 0; }

    static constexpr const char* kHeader = "label,t,closed_form,mc_mean,mc_stderr,z,pass";

    void write_csv(std::ostream& os) const {
        os << kHeader << '\n';
        for (const auto& r : rows_) {
            os << r.label << ',' << format_real(r.t) << ',' << format_real(r.closed_form) << ','
               << format_real(r.mc_mean) << ',' << format_real(r.mc_stderr) << ',' << format_real(r.z) << ','
               << (r.pass ? "true" : "false") << '\n';
        }
    }

    void write_csv(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) {
            throw std::runtime_error("cannot open " + path);
        }
        write_csv(os);
    }

private:
    std::vector<ReportRow> rows_;
};

/// Column-oriented time series written as CSV (first column is t).
class SeriesTable {
public:
    explicit SeriesTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<double> values) {
        if (values.size() != columns_.size()) {
            throw std::invalid_argument("series row width mismatch");
        }
        rows_.push_back(std::move(values));
    }

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            os << (i ? "," : "") << columns_[i];
        }
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                os << (i ? "," : "") << format_real(row[i]);
            }
            os << '\n';
        }
    }

    void write_csv(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) {
            throw std::runtime_error("cannot open " + path);
        }
        write_csv(os);
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

}  // namespace spde_lab

#endif  // SPDE_LAB_REPORT_HPP

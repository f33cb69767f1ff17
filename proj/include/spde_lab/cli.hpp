#ifndef SPDE_LAB_CLI_HPP
#define SPDE_LAB_CLI_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "burgers.hpp"
#include "ensemble.hpp"
#include "heat.hpp"
#include "hilbert.hpp"
#include "lyapunov.hpp"
#include "random.hpp"
#include "report.hpp"
#include "stats.hpp"
#include "wave.hpp"
#include "wiener.hpp"

namespace spde_lab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStatisticalFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::array<std::string_view, 5> kSubcommands{"wiener", "wave", "heat", "lyapunov", "burgers"};

struct ExperimentConfig {
    std::string subcommand;
    std::string spectrum = "power:2";
    std::size_t modes = 16;
    double l = 1.0;
    double dt = 0.01;
    double t_final = 1.0;
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;

    double c = 1.0;
    double epsilon = 1.0;
    double sigma = 0.25;
    double nu = 0.5;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 1.0;
    double delta = 0.0;       // 0: no exit-probability check
    double poincare_c = 0.0;  // 0: sharp constant (l/pi)^2
    std::size_t mode = 1;
    std::string noise = "additive";

    std::string f = "1";  // wave initial displacement / lyapunov initial condition (modal coefficients)
    std::string g = "0";  // wave initial velocity
    std::string a = "1";  // heat initial condition
    std::string u0 = "0.1";
};

/// Per-subcommand defaults.
inline ExperimentConfig defaults_for(std::string_view sub) {
    ExperimentConfig cfg;
    cfg.subcommand = std::string(sub);
    cfg.out = "runs/" + cfg.subcommand;
    if (sub == "wiener") {
        cfg.modes = 64;
        cfg.dt = 0.01;
        cfg.t_final = 2.0;
    } else if (sub == "wave") {
        cfg.dt = 0.005;
        cfg.t_final = 2.0;
    } else if (sub == "heat") {
        cfg.modes = 1;
        cfg.epsilon = 0.5;
        cfg.t_final = 0.5;
    } else if (sub == "lyapunov") {
        cfg.modes = 0;  // enough to hold --mode or --f
        cfg.f = "";
        cfg.t_final = 100.0;
        cfg.samples = 16;
    } else if (sub == "burgers") {
        cfg.modes = 64;
        cfg.dt = 1e-3;
        cfg.t_final = 2.0;
        cfg.samples = 500;
    }
    return cfg;
}

/// Modal coefficients "c1,c2,..." padded with zeros to n_modes.
inline HilbertVector parse_coefficients(std::string_view text, std::size_t n_modes) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (!text.empty() && pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        values.push_back(spde_lab::detail::parse_real(text.substr(pos, end - pos)));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (values.size() > n_modes) {
        throw invalid_input("coefficient list '" + std::string(text) + "' is longer than the number of modes");
    }
    values.resize(n_modes, 0.0);
    return HilbertVector(std::move(values));
}

inline std::size_t count_coefficients(std::string_view text) {
    return text.empty() ? 0 : static_cast<std::size_t>(std::count(text.begin(), text.end(), ',')) + 1;
}

struct ExperimentResult {
    ClosedFormReport report;
    ClosedFormReport diagnostics;  // printed forms known to disagree; excluded from the exit status
    std::vector<std::pair<std::string, SeriesTable>> series;
    nlohmann::json details = nlohmann::json::object();
    std::vector<std::string> notes;
};

namespace detail {

enum : std::uint64_t { kWienerId = 1, kWaveId = 2, kHeatId = 3, kLyapunovId = 4, kBurgersId = 5, kAuxId = 1u << 20 };

/// Step indices of `count` evenly spaced probe times in (0, T].
inline std::vector<std::size_t> probe_steps(const TimeGrid& grid, std::size_t count = 5) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i <= count; ++i) {
        out.push_back(std::max<std::size_t>(1, (i * grid.steps() + count / 2) / count));
    }
    return out;
}

inline constexpr std::array<std::pair<std::size_t, std::size_t>, 5> kProbePairs{
    {{0, 1}, {1, 3}, {2, 4}, {0, 4}, {1, 2}}};

/// Test direction phi_n = 1/n for projected means.
inline HilbertVector probe_direction(std::size_t n_modes) {
    HilbertVector phi(n_modes);
    for (std::size_t i = 0; i < n_modes; ++i) {
        phi[i] = 1.0 / static_cast<double>(i + 1);
    }
    return phi;
}

/// Per-sample scalar observables, concatenated in sample order on merge.
struct Observations {
    std::vector<std::vector<double>> rows;
    void merge(const Observations& o) { rows.insert(rows.end(), o.rows.begin(), o.rows.end()); }
};

inline std::vector<double> column(const Observations& obs, std::size_t j) {
    std::vector<double> out;
    out.reserve(obs.rows.size());
    for (const auto& r : obs.rows) {
        out.push_back(r[j]);
    }
    return out;
}

inline void require_samples(std::size_t samples) {
    if (samples < 2) {
        throw invalid_input("at least two samples are needed for standard errors");
    }
}

}  // namespace detail

/**
 * Q-Wiener process: trace identity E|W_t|^2 = t Tr(Q), the bilinear
 * covariance E<W_t, a><W_s, b> = (t ^ s) <Qa, b> and the Ito isometry for
 * the deterministic integrand cos(t).
 * Series: norm2 (t, mc_mean, mc_stderr, closed_form) and path (t, W at x = l/4, l/2, 3l/4 for sample 0).
 */
inline ExperimentResult run_wiener(const ExperimentConfig& cfg) {
    detail::require_samples(cfg.samples);
    const CovarianceSpectrum spec = parse_spectrum(cfg.spectrum, cfg.modes);
    const DirichletBasis basis(cfg.l, cfg.modes);
    const TimeGrid grid = TimeGrid::covering(cfg.t_final, cfg.dt);
    const RandomStream root = RandomStream(cfg.seed).child(detail::kWienerId);
    const double tr = trace(spec);
    const std::size_t n = cfg.modes;
    const std::size_t k_t = grid.steps();
    const std::size_t k_s = std::max<std::size_t>(1, grid.steps() / 2);

    constexpr std::size_t kPairs = 5;
    std::vector<HilbertVector> as, bs;
    for (std::size_t p = 0; p < kPairs; ++p) {
        as.emplace_back(gaussian(root.child(detail::kAuxId).child(2 * p), n));
        bs.emplace_back(gaussian(root.child(detail::kAuxId).child(2 * p + 1), n));
    }
    double ito_closed = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        ito_closed += std::cos(grid.time(k)) * std::cos(grid.time(k)) * grid.dt();
    }
    ito_closed *= tr;

    struct Acc {
        SlotStats<EnsembleStats> norm2;
        std::vector<EnsembleStats> bilinear;
        EnsembleStats ratio;
        EnsembleStats ito;
        void merge(const Acc& o) {
            norm2.merge(o.norm2);
            for (std::size_t i = 0; i < bilinear.size(); ++i) {
                bilinear[i].merge(o.bilinear[i]);
            }
            ratio.merge(o.ratio);
            ito.merge(o.ito);
        }
    };
    const Acc identity{SlotStats<EnsembleStats>(grid.steps() + 1), std::vector<EnsembleStats>(kPairs), {}, {}};
    const Acc acc = reduce_samples(cfg.samples, cfg.workers, identity, [&](std::size_t i, Acc& a) {
        const WienerPath path = sample_path(spec, basis, grid, root.child(i));
        for (std::size_t k = 0; k <= grid.steps(); ++k) {
            a.norm2[k].add(path.state(k).norm2());
        }
        const HilbertVector wt = path.state(k_t);
        const HilbertVector ws = path.state(k_s);
        for (std::size_t p = 0; p < kPairs; ++p) {
            a.bilinear[p].add(inner(wt, as[p]) * inner(ws, bs[p]));
        }
        a.ratio.add(wt.norm2() / grid.time(k_t));
        a.ito.add(ito_integral(path, [&](std::size_t, std::size_t k) { return std::cos(grid.time(k)); }).norm2());
    });

    ExperimentResult res;
    res.report.add(compare_or_fail("trace_identity", grid.time(k_t), tr,
                                   Estimate{acc.ratio.mean(), acc.ratio.stderr_mean()}));
    for (std::size_t k : detail::probe_steps(grid)) {
        res.report.add(compare_or_fail("norm2", grid.time(k), grid.time(k) * tr,
                                       Estimate{acc.norm2[k].mean(), acc.norm2[k].stderr_mean()}));
    }
    for (std::size_t p = 0; p < kPairs; ++p) {
        const double closed = std::min(grid.time(k_t), grid.time(k_s)) * inner(apply_q_gamma(spec, 1.0, as[p]), bs[p]);
        res.report.add(compare_or_fail("bilinear_" + std::to_string(p + 1) + "(s=" + format_real(grid.time(k_s)) + ")",
                                       grid.time(k_t), closed,
                                       Estimate{acc.bilinear[p].mean(), acc.bilinear[p].stderr_mean()}));
    }
    res.report.add(
        compare_or_fail("ito_isometry", grid.time(k_t), ito_closed, Estimate{acc.ito.mean(), acc.ito.stderr_mean()}));

    SeriesTable norm2({"t", "mc_mean", "mc_stderr", "closed_form"});
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const auto& s = acc.norm2[k];
        norm2.add_row({grid.time(k), s.mean(), s.count() > 1 && s.m2() > 0.0 ? s.stderr_mean() : 0.0,
                       grid.time(k) * tr});
    }
    const WienerPath first = sample_path(spec, basis, grid, root.child(0));
    SeriesTable path({"t", "x_quarter", "x_half", "x_three_quarter"});
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        path.add_row({grid.time(k), field_value(first, 0.25 * cfg.l, k), field_value(first, 0.5 * cfg.l, k),
                      field_value(first, 0.75 * cfg.l, k)});
    }
    res.series.emplace_back("norm2", std::move(norm2));
    res.series.emplace_back("path", std::move(path));
    res.details["trace_q"] = tr;
    return res;
}

/**
 * Stochastic wave equation: projected mean, variance, covariance and the
 * energy mean and variance against their closed forms at five probe times.
 * Series: energy (t, mc_mean, mc_stderr, closed_form) and variance (t, mc_mean, mc_stderr, closed_form).
 */
inline ExperimentResult run_wave(const ExperimentConfig& cfg) {
    detail::require_samples(cfg.samples);
    const std::size_t n = cfg.modes;
    auto [A, B] = modal_data(parse_coefficients(cfg.f, n), parse_coefficients(cfg.g, n), cfg.c, cfg.l);
    const WaveProblem prob(cfg.c, cfg.l, cfg.epsilon, parse_spectrum(cfg.spectrum, n), A, B);
    const TimeGrid grid = TimeGrid::covering(cfg.t_final, cfg.dt);
    const WavePlan plan(prob, grid);
    const RandomStream root = RandomStream(cfg.seed).child(detail::kWaveId);
    const auto probes = detail::probe_steps(grid);
    const HilbertVector phi = detail::probe_direction(n);
    std::vector<HilbertVector> means;
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        means.push_back(mean_modes(prob, grid.time(k)));
    }

    // per-sample columns: [proj_p, dev2_p, energy_p] for each probe, then one per probe pair
    const std::size_t np = probes.size();
    struct Acc {
        SlotStats<EnsembleStats> energy;
        SlotStats<EnsembleStats> dev2;
        detail::Observations obs;
        void merge(const Acc& o) {
            energy.merge(o.energy);
            dev2.merge(o.dev2);
            obs.merge(o.obs);
        }
    };
    const Acc identity{SlotStats<EnsembleStats>(grid.steps() + 1), SlotStats<EnsembleStats>(grid.steps() + 1), {}};
    const Acc acc = reduce_samples(cfg.samples, cfg.workers, identity, [&](std::size_t i, Acc& a) {
        const WaveSample s = plan.sample(root.child(i));
        std::vector<HilbertVector> dev;
        for (std::size_t k = 0; k <= grid.steps(); ++k) {
            HilbertVector d = s.displacement(k);
            for (std::size_t m = 0; m < n; ++m) {
                d[m] -= means[k][m];
            }
            a.energy[k].add(energy(s, prob, k));
            a.dev2[k].add(d.norm2());
            dev.push_back(std::move(d));
        }
        std::vector<double> row;
        for (std::size_t p = 0; p < np; ++p) {
            const std::size_t k = probes[p];
            row.push_back(inner(s.displacement(k), phi));
            row.push_back(dev[k].norm2());
            row.push_back(energy(s, prob, k));
        }
        for (const auto& [i1, i2] : detail::kProbePairs) {
            row.push_back(inner(dev[probes[i1]], dev[probes[i2]]));
        }
        a.obs.rows.push_back(std::move(row));
    });

    ExperimentResult res;
    const double e0 = initial_energy(prob);
    for (std::size_t p = 0; p < np; ++p) {
        const double t = grid.time(probes[p]);
        res.report.add(compare_or_fail("mean", t, inner(mean_modes(prob, t), phi),
                                       mean_estimate(detail::column(acc.obs, 3 * p))));
    }
    for (std::size_t p = 0; p < np; ++p) {
        const double t = grid.time(probes[p]);
        res.report.add(compare_or_fail("variance", t, variance_closed_form(prob, t),
                                       mean_estimate(detail::column(acc.obs, 3 * p + 1))));
    }
    for (std::size_t q = 0; q < detail::kProbePairs.size(); ++q) {
        const auto [i1, i2] = detail::kProbePairs[q];
        const double t = grid.time(probes[i1]);
        const double s = grid.time(probes[i2]);
        res.report.add(compare_or_fail("covariance(s=" + format_real(s) + ")", t, covariance_closed_form(prob, t, s),
                                       mean_estimate(detail::column(acc.obs, 3 * np + q))));
    }
    for (std::size_t p = 0; p < np; ++p) {
        const double t = grid.time(probes[p]);
        const auto energies = detail::column(acc.obs, 3 * p + 2);
        res.report.add(compare_or_fail("energy_mean", t, energy_mean_closed_form(prob, t), mean_estimate(energies)));
        res.report.add(
            compare_or_fail("energy_variance", t, energy_variance_closed_form(prob, t), variance_estimate(energies)));
        res.diagnostics.add(compare_or_fail("energy_mean_conserved", t, e0, mean_estimate(energies)));
    }
    if (prob.epsilon != 0.0) {
        res.notes.emplace_back(
            "mean energy grows as E(0) + eps^2 t Tr(Q) / 2 (Ito drift of the forcing); the conserved form "
            "E(0) is listed under diagnostics");
    }

    SeriesTable energy_series({"t", "mc_mean", "mc_stderr", "closed_form"});
    SeriesTable variance_series({"t", "mc_mean", "mc_stderr", "closed_form"});
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const double t = grid.time(k);
        const auto se = [](const EnsembleStats& s) { return s.m2() > 0.0 ? s.stderr_mean() : 0.0; };
        energy_series.add_row({t, acc.energy[k].mean(), se(acc.energy[k]), energy_mean_closed_form(prob, t)});
        variance_series.add_row({t, acc.dev2[k].mean(), se(acc.dev2[k]), variance_closed_form(prob, t)});
    }
    res.series.emplace_back("energy", std::move(energy_series));
    res.series.emplace_back("variance", std::move(variance_series));
    res.details["initial_energy"] = e0;
    res.details["trace_q"] = trace(prob.spectrum);
    return res;
}

/**
 * Heat equation with scalar multiplicative noise: projected mean, variance,
 * covariance and correlation at probe times.
 * Series: moments (t, mean_mc, mean_closed_form, variance_mc, variance_closed_form).
 */
inline ExperimentResult run_heat(const ExperimentConfig& cfg) {
    detail::require_samples(cfg.samples);
    const std::size_t n = std::max(cfg.modes, count_coefficients(cfg.a));
    const HeatProblem prob(cfg.epsilon, parse_coefficients(cfg.a, n));
    const TimeGrid grid = TimeGrid::covering(cfg.t_final, cfg.dt);
    const RandomStream root = RandomStream(cfg.seed).child(detail::kHeatId);
    const auto probes = detail::probe_steps(grid);
    const HilbertVector phi = detail::probe_direction(n);
    std::vector<HilbertVector> means;
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        means.push_back(mean_closed_form(prob, grid.time(k)));
    }

    struct Acc {
        SlotStats<EnsembleStats> proj;
        SlotStats<EnsembleStats> dev2;
        detail::Observations obs;
        void merge(const Acc& o) {
            proj.merge(o.proj);
            dev2.merge(o.dev2);
            obs.merge(o.obs);
        }
    };
    const std::size_t np = probes.size();
    const Acc identity{SlotStats<EnsembleStats>(grid.steps() + 1), SlotStats<EnsembleStats>(grid.steps() + 1), {}};
    const Acc acc = reduce_samples(cfg.samples, cfg.workers, identity, [&](std::size_t i, Acc& a) {
        const HeatSample s = sample_solution(prob, grid, root.child(i));
        std::vector<HilbertVector> dev;
        for (std::size_t k = 0; k <= grid.steps(); ++k) {
            HilbertVector d(n);
            double proj = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                proj += s.u(k, m + 1) * phi[m];
                d[m] = s.u(k, m + 1) - means[k][m];
            }
            a.proj[k].add(proj);
            a.dev2[k].add(d.norm2());
            dev.push_back(std::move(d));
        }
        std::vector<double> row;
        for (std::size_t p = 0; p < np; ++p) {
            double proj = 0.0;
            for (std::size_t m = 0; m < n; ++m) {
                proj += s.u(probes[p], m + 1) * phi[m];
            }
            row.push_back(proj);
            row.push_back(dev[probes[p]].norm2());
        }
        for (const auto& [i1, i2] : detail::kProbePairs) {
            row.push_back(inner(dev[probes[i1]], dev[probes[i2]]));
        }
        a.obs.rows.push_back(std::move(row));
    });

    ExperimentResult res;
    for (std::size_t p = 0; p < np; ++p) {
        const double t = grid.time(probes[p]);
        res.report.add(compare_or_fail("mean", t, inner(mean_closed_form(prob, t), phi),
                                       mean_estimate(detail::column(acc.obs, 2 * p))));
    }
    for (std::size_t p = 0; p < np; ++p) {
        const double t = grid.time(probes[p]);
        res.report.add(compare_or_fail("variance", t, variance_closed_form(prob, t),
                                       mean_estimate(detail::column(acc.obs, 2 * p + 1))));
    }
    for (std::size_t q = 0; q < detail::kProbePairs.size(); ++q) {
        const auto [i1, i2] = detail::kProbePairs[q];
        const double t = grid.time(probes[i1]);
        const double s = grid.time(probes[i2]);
        const auto products = detail::column(acc.obs, 2 * np + q);
        res.report.add(compare_or_fail("covariance(s=" + format_real(s) + ")", t,
                                       covariance_closed_form(prob, t, s), mean_estimate(products)));
        if (prob.epsilon != 0.0) {
            res.report.add(compare_or_fail("correlation(s=" + format_real(s) + ")", t,
                                           correlation_closed_form(prob, t, s),
                                           ratio_correlation_estimate(products, detail::column(acc.obs, 2 * i1 + 1),
                                                                      detail::column(acc.obs, 2 * i2 + 1))));
        }
    }
    if (prob.epsilon != 0.0) {
        const double t = grid.time(probes.back());
        res.report.add(compare_or_fail("correlation_diagonal", t, 1.0,
                                       Estimate{correlation_closed_form(prob, t, t), 0.0}));
    }

    SeriesTable moments({"t", "mean_mc", "mean_closed_form", "variance_mc", "variance_closed_form"});
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const double t = grid.time(k);
        moments.add_row({t, acc.proj[k].mean(), inner(means[k], phi), acc.dev2[k].mean(),
                         variance_closed_form(prob, t)});
    }
    res.series.emplace_back("moments", std::move(moments));
    return res;
}

/**
 * Lyapunov exponents: regression slopes of log|v(t)| over [T/10, T] for
 * the deterministic (gamma = 0, beta = alpha) and stochastic systems.
 * The stochastic row's standard error is gamma / sqrt(T - t_burn), so
 * |z| <= 3 is the band 3 gamma / sqrt(T - t_burn).
 * Series: log_norm (t, stochastic path 0, deterministic path).
 */
inline ExperimentResult run_lyapunov(const ExperimentConfig& cfg) {
    if (cfg.samples < 1) {
        throw invalid_input("lyapunov needs at least one path");
    }
    if (cfg.mode < 1) {
        throw invalid_input("--mode is 1-based");
    }
    std::size_t n = std::max(cfg.modes, count_coefficients(cfg.f));
    HilbertVector f;
    if (cfg.f.empty()) {
        n = std::max(n, cfg.mode);
        f = HilbertVector::unit(n, cfg.mode);
    } else {
        f = parse_coefficients(cfg.f, n);
    }
    const LyapunovProblem prob{cfg.alpha, cfg.beta, cfg.gamma, f};
    const LyapunovProblem det{cfg.alpha, cfg.alpha, 0.0, f};
    const TimeGrid grid = TimeGrid::covering(cfg.t_final, cfg.dt);
    const double t_burn = default_burn_in(grid);
    const RandomStream root = RandomStream(cfg.seed).child(detail::kLyapunovId);

    const ExponentEstimate det_est = estimate_from_path(det, grid, root.child(detail::kAuxId), t_burn);
    const auto estimates = map_samples(cfg.samples, cfg.workers, [&](std::size_t i) {
        return estimate_from_path(prob, grid, root.child(i), t_burn);
    });
    std::vector<double> slopes;
    for (const auto& e : estimates) {
        slopes.push_back(e.slope);
    }
    const double med = median(slopes);
    const double lam_u = exponent_deterministic(prob);
    const double lam_v = exponent_stochastic(prob);
    const double det_tol = 1e-9 * std::max(1.0, std::abs(lam_u));

    ExperimentResult res;
    res.report.add(compare_or_fail("exponent_deterministic", grid.t_final(), lam_u, Estimate{det_est.slope, 0.0},
                                   Relation::equal, det_tol));
    const double scale = std::abs(cfg.gamma) / std::sqrt(grid.t_final() - t_burn);
    res.report.add(compare_or_fail("exponent_stochastic", grid.t_final(), lam_v, Estimate{med, scale},
                                   Relation::equal, scale == 0.0 ? det_tol : 0.0));

    const std::vector<double> path0 = log_norm_path(prob, grid, root.child(0));
    const std::vector<double> path_det = log_norm_path(det, grid, root.child(detail::kAuxId));
    SeriesTable series({"t", "log_norm", "log_norm_deterministic"});
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        series.add_row({grid.time(k), path0[k], path_det[k]});
    }
    res.series.emplace_back("log_norm", std::move(series));
    res.details["leading_mode"] = leading_mode(f);
    res.details["exponent_deterministic"] = lam_u;
    res.details["exponent_stochastic"] = lam_v;
    res.details["stochastic_shift"] = stochastic_shift(cfg.alpha, cfg.beta, cfg.gamma);
    res.details["t_burn"] = t_burn;
    res.details["tolerance_band"] = estimate_tolerance(cfg.gamma, grid.t_final(), t_burn);
    res.details["median_slope"] = med;
    res.details["slopes"] = slopes;
    std::vector<double> residuals;
    for (const auto& e : estimates) {
        residuals.push_back(e.residual_rms);
    }
    res.details["residual_rms"] = residuals;
    return res;
}

/**
 * Stochastic Burgers: ensemble mean energy against the Gronwall bound and,
 * with --delta, exit frequencies against the Chebyshev bound, at 20 report
 * times. Diverged samples produce a failing row.
 * Series: energy (t, mc_mean, mc_stderr, bound[, exit_frequency, exit_stderr, exit_bound]).
 */
inline ExperimentResult run_burgers(const ExperimentConfig& cfg) {
    detail::require_samples(cfg.samples);
    const std::size_t n = std::max(cfg.modes, count_coefficients(cfg.u0));
    const HilbertVector u0 = parse_coefficients(cfg.u0, n);
    BurgersProblem prob;
    if (cfg.noise == "additive") {
        prob = BurgersProblem::additive(cfg.nu, cfg.l, cfg.sigma, parse_spectrum(cfg.spectrum, n), u0, cfg.poincare_c);
    } else if (cfg.noise == "multiplicative") {
        prob = BurgersProblem::multiplicative(cfg.nu, cfg.l, cfg.sigma, u0, cfg.poincare_c);
    } else {
        throw invalid_input("--noise must be additive or multiplicative");
    }
    if (cfg.delta < 0.0) {
        throw invalid_input("--delta must be positive");
    }
    const std::optional<double> delta = cfg.delta > 0.0 ? std::optional<double>(cfg.delta) : std::nullopt;
    const TimeGrid grid = TimeGrid::covering(cfg.t_final, cfg.dt);
    const RandomStream root = RandomStream(cfg.seed).child(detail::kBurgersId);
    const EnergyEnsemble ens = simulate_energy_ensemble(prob, grid, cfg.samples, root, cfg.workers, delta);
    const double e0 = u0.norm2();
    const auto se = [](const EnsembleStats& s) { return s.count() > 1 && s.m2() > 0.0 ? s.stderr_mean() : 0.0; };

    ExperimentResult res;
    if (ens.diverged > 0) {
        res.report.add(compare_or_fail("diverged_samples", grid.t_final(), 0.0,
                                       Estimate{static_cast<double>(ens.diverged), 0.0}));
    }
    const std::size_t report_points = std::min<std::size_t>(20, grid.steps());
    for (std::size_t k : detail::probe_steps(grid, report_points)) {
        const double t = grid.time(k);
        res.report.add(compare_or_fail("energy_bound", t, energy_bound(prob, t, e0),
                                       Estimate{ens.energy[k].mean(), se(ens.energy[k])}, Relation::at_most));
        if (delta) {
            res.report.add(compare_or_fail("exit_probability", t, exit_probability_bound(prob, t, e0, *delta),
                                           Estimate{ens.exits[k].mean(), ens.exits[k].binomial_stderr()},
                                           Relation::at_most));
        }
    }

    std::vector<std::string> columns{"t", "mc_mean", "mc_stderr", "bound"};
    if (delta) {
        columns.insert(columns.end(), {"exit_frequency", "exit_stderr", "exit_bound"});
    }
    SeriesTable series(columns);
    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const double t = grid.time(k);
        std::vector<double> row{t, ens.energy[k].mean(), se(ens.energy[k]), energy_bound(prob, t, e0)};
        if (delta) {
            row.insert(row.end(), {ens.exits[k].mean(), ens.exits[k].binomial_stderr(),
                                   exit_probability_bound(prob, t, e0, *delta)});
        }
        series.add_row(std::move(row));
    }
    res.series.emplace_back("energy", std::move(series));
    res.notes = bound_notes(prob);
    res.details["initial_energy"] = e0;
    res.details["poincare_c"] = prob.poincare_c;
    res.details["dt_max"] = BurgersStepper::dt_max(prob);
    res.details["diverged"] = ens.diverged;
    res.details["samples_used"] = ens.samples - ens.diverged;
    if (prob.noise == NoiseKind::additive) {
        res.details["asymptotic_energy"] = asymptotic_energy_additive(prob);
    }
    return res;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.subcommand == "wiener") return run_wiener(cfg);
    if (cfg.subcommand == "wave") return run_wave(cfg);
    if (cfg.subcommand == "heat") return run_heat(cfg);
    if (cfg.subcommand == "lyapunov") return run_lyapunov(cfg);
    if (cfg.subcommand == "burgers") return run_burgers(cfg);
    throw invalid_input("unknown subcommand '" + cfg.subcommand + "'");
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
    return {{"subcommand", cfg.subcommand}, {"spectrum", cfg.spectrum}, {"modes", cfg.modes},
            {"l", cfg.l},                   {"dt", cfg.dt},             {"t-final", cfg.t_final},
            {"samples", cfg.samples},       {"seed", cfg.seed},         {"workers", cfg.workers},
            {"c", cfg.c},                   {"epsilon", cfg.epsilon},   {"sigma", cfg.sigma},
            {"nu", cfg.nu},                 {"alpha", cfg.alpha},       {"beta", cfg.beta},
            {"gamma", cfg.gamma},           {"delta", cfg.delta},       {"poincare-c", cfg.poincare_c},
            {"mode", cfg.mode},             {"noise", cfg.noise},       {"f", cfg.f},
            {"g", cfg.g},                   {"a", cfg.a},               {"u0", cfg.u0}};
}

inline nlohmann::json rows_json(const ClosedFormReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows()) {
        rows.push_back({{"label", r.label},
                        {"t", r.t},
                        {"closed_form", r.closed_form},
                        {"mc_mean", r.mc_mean},
                        {"mc_stderr", r.mc_stderr},
                        {"z", std::isfinite(r.z) ? nlohmann::json(r.z) : nlohmann::json(format_real(r.z))},
                        {"pass", r.pass}});
    }
    return rows;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// report.csv, series_<name>.csv, summary.json and config.toml under cfg.out.
inline void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& res, const std::string& config_toml) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.out);
    fs::create_directories(dir);
    res.report.write_csv((dir / "report.csv").string());
    for (const auto& [name, table] : res.series) {
        std::ofstream os(dir / ("series_" + name + ".csv"), std::ios::binary);
        if (!os) {
            throw std::runtime_error("cannot write series " + name);
        }
        table.write_csv(os);
    }
    nlohmann::json summary{{"subcommand", cfg.subcommand},
                           {"seed", cfg.seed},
                           {"samples", cfg.samples},
                           {"parameters", config_json(cfg)},
                           {"rows", res.report.rows().size()},
                           {"passed", res.report.passed()},
                           {"failed", res.report.failed()},
                           {"all_pass", res.report.all_pass()},
                           {"details", res.details},
                           {"notes", res.notes},
                           {"diagnostics", rows_json(res.diagnostics)},
                           {"nondeterministic", {{"timestamp_utc", utc_timestamp()}}}};
    std::ofstream js(dir / "summary.json", std::ios::binary);
    js << summary.dump(2) << '\n';
    std::ofstream toml(dir / "config.toml", std::ios::binary);
    toml << config_toml;
}

inline std::string usage() {
    return "usage: spde-lab <wiener|wave|heat|lyapunov|burgers> [options]\n"
           "       spde-lab <subcommand> --help\n";
}

/// Registers the flags of `sub` on `app`, bound to `cfg`.
inline void add_flags(CLI::App& app, ExperimentConfig& cfg, std::string_view sub) {
    app.set_config("--config", "", "TOML file whose keys match the flag names");
    app.option_defaults()->always_capture_default();
    app.add_option("--out", cfg.out, "output directory");
    app.add_option("--seed", cfg.seed, "master seed")->envname("SPDE_LAB_SEED");
    app.add_option("--workers", cfg.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--dt", cfg.dt, "time step")->check(CLI::PositiveNumber);
    app.add_option("--t-final", cfg.t_final, "time horizon")->check(CLI::PositiveNumber);
    app.add_option("--samples", cfg.samples, "ensemble size")->check(CLI::PositiveNumber);
    app.add_option("--modes", cfg.modes, "number of sine modes");
    if (sub == "wiener" || sub == "wave" || sub == "burgers") {
        app.add_option("--spectrum", cfg.spectrum, "finite:q1,q2,... | power:p | exp:r");
        app.add_option("--l", cfg.l, "domain length")->check(CLI::PositiveNumber);
    }
    if (sub == "wave") {
        app.add_option("--c", cfg.c, "wave speed")->check(CLI::PositiveNumber);
        app.add_option("--epsilon", cfg.epsilon, "noise intensity");
        app.add_option("--f", cfg.f, "initial displacement, modal coefficients");
        app.add_option("--g", cfg.g, "initial velocity, modal coefficients");
    }
    if (sub == "heat") {
        app.add_option("--epsilon", cfg.epsilon, "noise intensity");
        app.add_option("--a", cfg.a, "initial condition, modal coefficients");
    }
    if (sub == "lyapunov") {
        app.add_option("--alpha", cfg.alpha, "deterministic growth coefficient");
        app.add_option("--beta", cfg.beta, "stochastic growth coefficient");
        app.add_option("--gamma", cfg.gamma, "noise intensity");
        app.add_option("--mode", cfg.mode, "initial condition e_mode (1-based)")->check(CLI::PositiveNumber);
        app.add_option("--f", cfg.f, "initial condition, modal coefficients (overrides --mode)");
    }
    if (sub == "burgers") {
        app.add_option("--nu", cfg.nu, "viscosity")->check(CLI::PositiveNumber);
        app.add_option("--sigma", cfg.sigma, "noise intensity");
        app.add_option("--noise", cfg.noise, "additive | multiplicative")
            ->check(CLI::IsMember({"additive", "multiplicative"}));
        app.add_option("--delta", cfg.delta, "exit radius for the Chebyshev check (0 disables)");
        app.add_option("--poincare-c", cfg.poincare_c, "Poincare constant (0 selects (l/pi)^2)");
        app.add_option("--u0", cfg.u0, "initial condition, modal coefficients");
    }
}

/// Parses `args` (without the program and subcommand names) into a config.
inline ExperimentConfig parse_config(std::string_view sub, std::vector<std::string> args, std::string* config_toml = nullptr) {
    ExperimentConfig cfg = defaults_for(sub);
    CLI::App app("spde-lab " + std::string(sub), "spde-lab " + std::string(sub));
    add_flags(app, cfg, sub);
    std::reverse(args.begin(), args.end());
    app.parse(args);
    if (config_toml) {
        *config_toml = app.config_to_str(true, false);
    }
    return cfg;
}

/// Entry point: 0 when every comparison passes, 1 on a statistical failure, 2 on usage or configuration errors.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (argc < 2) {
        err << usage();
        return kExitUsage;
    }
    const std::string_view sub = argv[1];
    if (sub == "--help" || sub == "-h") {
        out << usage();
        return kExitOk;
    }
    if (std::find(kSubcommands.begin(), kSubcommands.end(), sub) == kSubcommands.end()) {
        err << "unknown subcommand '" << sub << "'\n" << usage();
        return kExitUsage;
    }
    ExperimentConfig cfg = defaults_for(sub);
    CLI::App app("spde-lab " + std::string(sub), "spde-lab " + std::string(sub));
    add_flags(app, cfg, sub);
    try {
        std::vector<std::string> args(argv + 2, argv + argc);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return kExitUsage;
    }
    ExperimentResult res;
    try {
        res = run_experiment(cfg);
        write_outputs(cfg, res, app.config_to_str(true, false));
    } catch (const invalid_input& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    for (const auto& note : res.notes) {
        err << "note: " << note << '\n';
    }
    out << cfg.subcommand << ": " << res.report.passed() << '/' << res.report.rows().size() << " comparisons pass -> "
        << cfg.out << '\n';
    return res.report.all_pass() ? kExitOk : kExitStatisticalFailure;
}

}  // namespace spde_lab::cli

#endif  // SPDE_LAB_CLI_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <oracles.hpp>
#include <spde_lab/ensemble.hpp>
#include <spde_lab/report.hpp>
#include <spde_lab/stats.hpp>
#include <spde_lab/wave.hpp>

using namespace spde_lab;

namespace {

constexpr double kPi = std::numbers::pi;

WaveProblem single_mode(double eps, std::size_t n_modes = 1, double a1 = 0.0, double b1 = 0.0) {
    HilbertVector A(n_modes), B(n_modes);
    A[0] = a1;
    B[0] = b1;
    return WaveProblem(1.0, 1.0, eps, CovarianceSpectrum::finite_rank({1.0}, n_modes), A, B);
}

WaveProblem power_problem(std::size_t n, double eps, double c = 1.0, double l = 1.0) {
    HilbertVector f(n), g(n);
    f[0] = 1.0;
    f[1] = -0.4;
    g[0] = 0.5;
    g[2] = 2.0;
    auto [A, B] = modal_data(f, g, c, l);
    return WaveProblem(c, l, eps, CovarianceSpectrum::power(2.0, n), A, B);
}

}  // namespace

TEST(ModalData, Examples) {
    auto [A0, B0] = modal_data(HilbertVector::unit(3, 1), HilbertVector(3), 1.0, 1.0);
    EXPECT_EQ(A0, HilbertVector::unit(3, 1));
    EXPECT_EQ(B0, HilbertVector(3));
    auto [A1, B1] = modal_data(HilbertVector(3), HilbertVector::unit(3, 2), 2.0, 1.0);
    EXPECT_DOUBLE_EQ(B1[1], 1.0 / (4.0 * kPi));
    EXPECT_THROW(modal_data(HilbertVector(2), HilbertVector(3), 1.0, 1.0), invalid_input);
}

TEST(Problem, FrequenciesIncrease) {
    const auto p = power_problem(10, 1.0, 2.0, 3.0);
    for (std::size_t n = 1; n < 10; ++n) {
        EXPECT_LT(p.frequency(n), p.frequency(n + 1));
    }
    EXPECT_DOUBLE_EQ(p.frequency(3), 2.0 * 3.0 * kPi / 3.0);
}

TEST(IncrementCovariance, MatchesQuadrature) {
    for (double mu : {0.5, kPi, 37.0}) {
        for (auto [a, b] : {std::pair{0.0, 0.01}, std::pair{1.3, 1.31}, std::pair{0.2, 0.9}}) {
            const auto c = IncrementCovariance::over(mu, a, b);
            EXPECT_NEAR(c.var_sin, oracle::integrate([&](double s) { return std::pow(std::sin(mu * s), 2); }, a, b), 1e-15);
            EXPECT_NEAR(c.var_cos, oracle::integrate([&](double s) { return std::pow(std::cos(mu * s), 2); }, a, b), 1e-15);
            EXPECT_NEAR(c.cov, oracle::integrate([&](double s) { return std::sin(mu * s) * std::cos(mu * s); }, a, b), 1e-15);
        }
    }
}

TEST(IncrementCovariance, CholeskyReproducesCovariance) {
    for (double mu : {0.1, 3.0, 200.0}) {
        const auto c = IncrementCovariance::over(mu, 0.4, 0.45);
        const auto f = Cholesky2::factor(c);
        EXPECT_NEAR(f.l11 * f.l11, c.var_sin, 1e-16);
        EXPECT_NEAR(f.l11 * f.l21, c.cov, 1e-16);
        EXPECT_NEAR(f.l21 * f.l21 + f.l22 * f.l22, c.var_cos, 1e-16);
    }
    // first step at low frequency: var_sin = mu^2 dt^3 / 3 is tiny but still a valid pivot,
    // and the two integrals are correlated at sqrt(3)/2
    const auto c1 = IncrementCovariance::over(1e-3, 0.0, 1e-3);
    const auto f1 = Cholesky2::factor(c1);
    EXPECT_GT(f1.l11, 0.0);
    EXPECT_NEAR(c1.cov / std::sqrt(c1.var_sin * c1.var_cos), std::sqrt(3.0) / 2.0, 1e-6);
    EXPECT_NEAR(f1.l21 * f1.l21 + f1.l22 * f1.l22, c1.var_cos, 1e-16);
    // below the pivot tolerance the sin integral is dropped and the cos variance kept
    const auto c0 = IncrementCovariance::over(1e-6, 0.0, 1e-3);
    const auto f0 = Cholesky2::factor(c0);
    EXPECT_EQ(f0.l11, 0.0);
    EXPECT_EQ(f0.l21, 0.0);
    EXPECT_NEAR(f0.l22 * f0.l22, c0.var_cos, 1e-18);
}

TEST(Sample, ZeroNoiseIsDeterministicWave) {
    const auto prob = power_problem(6, 0.0);
    const TimeGrid grid(0.0, 0.01, 100);
    const WavePlan plan(prob, grid);
    const auto s = plan.sample(RandomStream(1));
    for (std::size_t k = 0; k <= 100; k += 7) {
        for (std::size_t n = 1; n <= 6; ++n) {
            EXPECT_EQ(s.u(k, n), plan.deterministic_mode(k, n));
            const double mu = prob.frequency(n);
            const double t = grid.time(k);
            EXPECT_NEAR(s.u(k, n), prob.A[n - 1] * std::cos(mu * t) + prob.B[n - 1] * std::sin(mu * t), 1e-14);
        }
    }
}

TEST(Sample, InitialState) {
    const auto prob = power_problem(4, 1.0);
    const auto s = sample_solution(prob, TimeGrid(0.0, 0.1, 3), RandomStream(4));
    for (std::size_t n = 1; n <= 4; ++n) {
        EXPECT_EQ(s.u(0, n), prob.A[n - 1]);
        EXPECT_DOUBLE_EQ(s.v(0, n), prob.B[n - 1] * prob.frequency(n));
    }
    EXPECT_THROW(WavePlan(prob, TimeGrid(0.5, 0.1, 3)), invalid_input);
}

TEST(Sample, StoredIntegralsReproduceModalFormula) {
    const auto prob = power_problem(5, 0.7);
    const TimeGrid grid(0.0, 0.02, 50);
    const auto s = sample_solution(prob, grid, RandomStream(9));
    for (std::size_t k : {1u, 17u, 50u}) {
        for (std::size_t n = 1; n <= 5; ++n) {
            const double mu = prob.frequency(n);
            const double t = grid.time(k);
            const double w = prob.epsilon * std::sqrt(prob.spectrum[n - 1]) / mu;
            const double u = (prob.A[n - 1] - w * s.isin(k, n)) * std::cos(mu * t) +
                             (prob.B[n - 1] + w * s.icos(k, n)) * std::sin(mu * t);
            EXPECT_NEAR(s.u(k, n), u, 1e-13);
        }
    }
}

TEST(Sample, SingleModeForcingLeavesOtherModesExact) {
    const std::size_t n = 8;
    HilbertVector f(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = 1.0 / (1.0 + i);
        g[i] = std::sin(1.0 + i);
    }
    auto [A, B] = modal_data(f, g, 1.3, 2.0);
    const WaveProblem prob(1.3, 2.0, 2.0, CovarianceSpectrum::finite_rank({0.8}, n), A, B);
    const TimeGrid grid(0.0, 0.01, 200);
    const WavePlan plan(prob, grid);
    bool mode1_moves = false;
    for (std::size_t i = 0; i < 50; ++i) {
        const auto s = plan.sample(RandomStream(5).child(i));
        for (std::size_t k = 0; k <= 200; ++k) {
            for (std::size_t m = 2; m <= n; ++m) {
                ASSERT_EQ(s.u(k, m), plan.deterministic_mode(k, m));
            }
            mode1_moves |= s.u(k, 1) != plan.deterministic_mode(k, 1);
        }
    }
    EXPECT_TRUE(mode1_moves);
}

TEST(Mean, Examples) {
    HilbertVector f = HilbertVector::unit(3, 1);
    auto [A, B] = modal_data(f, HilbertVector(3), 1.0, 1.0);
    const WaveProblem p1(1.0, 1.0, 1.0, CovarianceSpectrum::power(2.0, 3), A, B);
    EXPECT_NEAR(mean_solution(p1, 0.5, 1.0), -std::sqrt(2.0), 1e-14);
    const WaveProblem p0(1.0, 1.0, 0.0, CovarianceSpectrum::power(2.0, 3), A, B);
    EXPECT_EQ(mean_solution(p0, 0.3, 0.7), mean_solution(p1, 0.3, 0.7));
    const auto p = power_problem(5, 1.0);
    const DirichletBasis basis = p.basis();
    for (double x : {0.1, 0.5, 0.8}) {
        EXPECT_NEAR(mean_solution(p, x, 0.0), basis.evaluate(p.A, x), 1e-15);
    }
}

TEST(Variance, Examples) {
    EXPECT_EQ(variance_closed_form(power_problem(4, 0.0), 1.3), 0.0);
    EXPECT_NEAR(variance_closed_form(single_mode(1.0, 4), 1.0), 1.0 / (2.0 * kPi * kPi), 1e-15);
    EXPECT_NEAR(variance_closed_form(single_mode(1.0, 4), 1.0), oracle::wave_variance(single_mode(1.0, 4), 1.0), 1e-12);
    const auto p = power_problem(6, 0.8, 1.5, 2.0);
    for (double t : {0.0, 0.3, 1.7}) {
        EXPECT_NEAR(variance_closed_form(p, t), covariance_closed_form(p, t, t), 1e-15);
    }
}

TEST(Covariance, SymmetricAndMatchesQuadratureOracle) {
    const auto p = power_problem(12, 1.1, 1.5, 2.0);
    for (double t : {0.1, 0.6, 1.0, 2.3}) {
        for (double s : {0.05, 0.6, 1.9}) {
            EXPECT_NEAR(covariance_closed_form(p, t, s), covariance_closed_form(p, s, t), 1e-15);
            EXPECT_NEAR(covariance_closed_form(p, t, s), oracle::wave_covariance(p, t, s), 1e-10);
        }
    }
    const auto single = single_mode(1.0);
    EXPECT_NEAR(covariance_closed_form(single, 1.0, 0.5), oracle::wave_covariance(single, 1.0, 0.5), 1e-12);
}

TEST(Energy, DeterministicEnergyConserved) {
    auto [A, B] = modal_data(HilbertVector::unit(3, 1), HilbertVector(3), 1.0, 1.0);
    const WaveProblem p(1.0, 1.0, 0.0, CovarianceSpectrum::power(2.0, 3), A, B);
    const TimeGrid grid(0.0, 0.05, 40);
    const auto s = sample_solution(p, grid, RandomStream(1));
    for (std::size_t k = 0; k <= 40; ++k) {
        EXPECT_NEAR(energy(s, p, k), kPi * kPi / 2.0, 1e-12);
    }
    EXPECT_DOUBLE_EQ(initial_energy(p), kPi * kPi / 2.0);
}

TEST(Energy, ClosedFormsMatchGaussianQuadratureOracle) {
    for (const auto& p : {power_problem(10, 1.0), power_problem(6, 0.4, 2.0, 1.5), single_mode(1.0, 1, 0.3, -0.2)}) {
        for (double t : {0.0, 0.25, 1.0, 2.0}) {
            const auto ref = oracle::wave_energy_moments(p, t);
            EXPECT_NEAR(energy_mean_closed_form(p, t), ref.mean, 1e-10 * std::max(1.0, ref.mean));
            EXPECT_NEAR(energy_variance_closed_form(p, t), ref.variance, 1e-10 * std::max(1.0, ref.variance));
        }
    }
}

TEST(Energy, VarianceExamples) {
    EXPECT_EQ(energy_variance_closed_form(power_problem(4, 0.0), 1.0), 0.0);
    EXPECT_EQ(energy_variance_closed_form(power_problem(4, 1.0), 0.0), 0.0);
    const auto p = single_mode(1.5);
    const double t = 0.8, mu = kPi;
    const double expected = std::pow(1.5, 4) * (t * t / 4.0 + (1.0 - std::cos(2.0 * mu * t)) / (8.0 * mu * mu));
    EXPECT_NEAR(energy_variance_closed_form(p, t), expected, 1e-14);
}

TEST(MonteCarlo, MomentsAgainstClosedForms) {
    const auto p = power_problem(8, 1.0);
    const TimeGrid grid(0.0, 0.01, 100);
    const WavePlan plan(p, grid);
    const std::size_t samples = 10000;
    const RandomStream root(500);
    const HilbertVector m50 = mean_modes(p, grid.time(50));
    const HilbertVector m100 = mean_modes(p, grid.time(100));
    std::vector<double> mode1, dev2, cross, energies;
    for (std::size_t i = 0; i < samples; ++i) {
        const auto s = plan.sample(root.child(i));
        HilbertVector d50 = s.displacement(50), d100 = s.displacement(100);
        for (std::size_t n = 0; n < 8; ++n) {
            d50[n] -= m50[n];
            d100[n] -= m100[n];
        }
        mode1.push_back(s.u(100, 1));
        dev2.push_back(d100.norm2());
        cross.push_back(inner(d50, d100));
        energies.push_back(energy(s, p, 100));
    }
    EXPECT_TRUE(compare("mean", 1.0, m100[0], mean_estimate(mode1)).pass);
    EXPECT_TRUE(compare("variance", 1.0, variance_closed_form(p, 1.0), mean_estimate(dev2)).pass);
    EXPECT_TRUE(compare("covariance", 1.0, covariance_closed_form(p, 1.0, 0.5), mean_estimate(cross)).pass);
    EXPECT_TRUE(compare("energy mean", 1.0, energy_mean_closed_form(p, 1.0), mean_estimate(energies)).pass);
    EXPECT_TRUE(
        compare("energy variance", 1.0, energy_variance_closed_form(p, 1.0), variance_estimate(energies)).pass);
    // the noise pumps energy in at rate eps^2 Tr(Q) / 2, so E E(t) = E(0) is rejected
    EXPECT_FALSE(compare("energy conserved", 1.0, initial_energy(p), mean_estimate(energies)).pass);
}

TEST(MonteCarlo, MarginalLawIndependentOfStepSize) {
    const auto p = single_mode(1.0, 2, 1.0, 0.0);
    const std::size_t samples = 10000;
    EnsembleStats coarse_m, fine_m;
    std::vector<double> coarse, fine;
    const WavePlan pc(p, TimeGrid(0.0, 0.04, 25));
    const WavePlan pf(p, TimeGrid(0.0, 0.01, 100));
    for (std::size_t i = 0; i < samples; ++i) {
        coarse.push_back(pc.sample(RandomStream(1).child(i)).u(25, 1));
        fine.push_back(pf.sample(RandomStream(2).child(i)).u(100, 1));
    }
    const auto mc = mean_estimate(coarse), mf = mean_estimate(fine);
    EXPECT_LE(std::abs(mc.value - mf.value), 3.0 * std::hypot(mc.std_error, mf.std_error));
    const auto vc = variance_estimate(coarse), vf = variance_estimate(fine);
    EXPECT_LE(std::abs(vc.value - vf.value), 3.0 * std::hypot(vc.std_error, vf.std_error));
    EXPECT_TRUE(compare("var", 1.0, variance_closed_form(p, 1.0), vc).pass);
}

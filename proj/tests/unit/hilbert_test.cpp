#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <oracles.hpp>
#include <spde_lab/hilbert.hpp>
#include <spde_lab/random.hpp>

using namespace spde_lab;

TEST(Basis, EigenfunctionValues) {
    const DirichletBasis basis(1.0, 4);
    EXPECT_DOUBLE_EQ(basis.eigenfunction(1, 0.5), std::sqrt(2.0));
    EXPECT_NEAR(basis.eigenfunction(2, 0.5), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(basis.eigenvalue(1), std::numbers::pi * std::numbers::pi);
    const DirichletBasis wide(2.0, 3);
    EXPECT_DOUBLE_EQ(wide.eigenvalue(2), std::numbers::pi * std::numbers::pi);
}

TEST(Basis, EigenvaluesStrictlyIncrease) {
    const DirichletBasis basis(1.7, 50);
    for (std::size_t n = 1; n < 50; ++n) {
        EXPECT_LT(basis.eigenvalue(n), basis.eigenvalue(n + 1));
    }
}

TEST(Basis, OrthonormalUnderTrapezoid) {
    for (double l : {1.0, 2.5}) {
        const std::size_t n = 12;
        const DirichletBasis basis(l, n);
        for (std::size_t m = 1; m <= n; ++m) {
            const auto coeffs = basis.project([&](double x) { return basis.eigenfunction(m, x); });
            for (std::size_t k = 1; k <= n; ++k) {
                EXPECT_NEAR(coeffs[k - 1], m == k ? 1.0 : 0.0, 1e-10) << "m=" << m << " k=" << k;
            }
        }
    }
}

TEST(Basis, ProjectionMatchesQuadratureOracle) {
    const DirichletBasis basis(1.0, 6);
    auto f = [](double x) { return x * (1.0 - x) * std::exp(x); };
    // Smooth non-trigonometric input: trapezoid error is O(h^2), so compare on a fine grid.
    const auto coeffs = basis.project(f, 4096);
    for (std::size_t n = 1; n <= 6; ++n) {
        const double ref = oracle::l2_inner(f, [&](double x) { return basis.eigenfunction(n, x); }, 1.0);
        EXPECT_NEAR(coeffs[n - 1], ref, 1e-7);
    }
}

TEST(Basis, ParsevalForSmoothInput) {
    const std::size_t n = 32;
    const DirichletBasis basis(1.0, n);
    auto f = [](double x) { return std::sin(std::numbers::pi * x) * std::exp(x); };
    const double grid_norm2 = trapezoid([&](double x) { return f(x) * f(x); }, 0.0, 1.0, 8 * n);
    const double coeff_norm2 = basis.project(f).norm2();
    EXPECT_NEAR(coeff_norm2, grid_norm2, 1.0 / n);
}

TEST(Basis, EvaluateRejectsOutsidePoints) {
    const DirichletBasis basis(1.0, 2);
    EXPECT_THROW(basis.evaluate(HilbertVector(2), 1.5), invalid_input);
    EXPECT_THROW(basis.evaluate(HilbertVector(3), 0.5), invalid_input);
    EXPECT_THROW(DirichletBasis(0.0, 2), invalid_input);
    EXPECT_THROW(DirichletBasis(1.0, 0), invalid_input);
}

TEST(Vector, NormIsParseval) {
    const HilbertVector v(std::vector<double>{3.0, 4.0});
    EXPECT_DOUBLE_EQ(v.norm2(), 25.0);
    EXPECT_DOUBLE_EQ(v.norm(), 5.0);
    EXPECT_DOUBLE_EQ(inner(v, HilbertVector::unit(2, 2)), 4.0);
    EXPECT_THROW(inner(v, HilbertVector(3)), invalid_input);
    EXPECT_THROW(HilbertVector::unit(2, 0), invalid_input);
}

TEST(Spectrum, TraceExamples) {
    EXPECT_EQ(trace(CovarianceSpectrum({0.0, 0.0, 0.0})), 0.0);
    EXPECT_DOUBLE_EQ(trace(CovarianceSpectrum({1.0, 0.5, 0.25})), 1.75);
    const auto big = CovarianceSpectrum::power(2.0, 1000000);
    EXPECT_NEAR(trace(big), std::numbers::pi * std::numbers::pi / 6.0, 1e-6);
}

TEST(Spectrum, RejectsInvalidEigenvalues) {
    EXPECT_THROW(CovarianceSpectrum({1.0, -0.1}), invalid_input);
    EXPECT_THROW(CovarianceSpectrum({1.0, NAN}), invalid_input);
    EXPECT_THROW(CovarianceSpectrum(std::vector<double>{}), invalid_input);
    EXPECT_THROW(CovarianceSpectrum::power(1.0, 4), invalid_input);
    EXPECT_THROW(CovarianceSpectrum::exponential(0.0, 4), invalid_input);
    EXPECT_THROW(CovarianceSpectrum::finite_rank({1, 2, 3}, 2), invalid_input);
}

TEST(Spectrum, TailMassMatchesDirectSum) {
    for (double p : {1.5, 2.0, 3.0}) {
        for (std::size_t n : {1u, 10u, 100u}) {
            double direct = 0.0;
            for (std::size_t k = n + 1; k <= 2000000; ++k) {
                direct += std::pow(static_cast<double>(k), -p);
            }
            // remainder beyond 2e6 from the integral
            direct += std::pow(2000000.5, 1.0 - p) / (p - 1.0);
            EXPECT_NEAR(CovarianceSpectrum::power(p, n).tail_mass(), direct, 1e-7 * direct) << p << " " << n;
        }
    }
    const auto ex = CovarianceSpectrum::exponential(0.5, 10);
    double direct = 0.0;
    for (int k = 11; k < 200; ++k) {
        direct += std::exp(-0.5 * k);
    }
    EXPECT_NEAR(ex.tail_mass(), direct, 1e-14);
    EXPECT_EQ(CovarianceSpectrum::finite_rank({1.0}, 5).tail_mass(), 0.0);
}

TEST(Spectrum, SuggestModesMeetsTolerance) {
    const std::size_t n = suggest_modes(decay::Exponential{1.0}, 1e-6);
    const auto s = CovarianceSpectrum::exponential(1.0, n);
    const auto s_prev = CovarianceSpectrum::exponential(1.0, n - 1);
    EXPECT_LT(s.tail_mass(), 1e-6 * (trace(s) + s.tail_mass()));
    EXPECT_GE(s_prev.tail_mass(), 1e-6 * (trace(s_prev) + s_prev.tail_mass()));
    const std::size_t np = suggest_modes(decay::Power{3.0}, 1e-6);
    const auto sp = CovarianceSpectrum::power(3.0, np);
    EXPECT_LT(sp.tail_mass(), 1e-6 * (trace(sp) + sp.tail_mass()));
    EXPECT_THROW(suggest_modes(decay::FiniteRank{{1.0}}), invalid_input);
}

TEST(Spectrum, ApplyQGammaExamples) {
    const CovarianceSpectrum q({4.0, 9.0});
    const HilbertVector a(std::vector<double>{1.0, 2.0});
    EXPECT_EQ(apply_q_gamma(q, 0.0, a), a);
    EXPECT_EQ(apply_q_gamma(q, 1.0, HilbertVector(std::vector<double>{1.0, 1.0})),
              HilbertVector(std::vector<double>({4.0, 9.0})));
    const auto half = apply_q_gamma(q, 0.5, a);
    EXPECT_DOUBLE_EQ(half[0], 2.0);
    EXPECT_DOUBLE_EQ(half[1], 6.0);
    EXPECT_THROW(apply_q_gamma(q, -1.0, a), invalid_input);
}

TEST(Spectrum, ApplyQMatchesKernelIntegral) {
    const std::size_t n = 5;
    const DirichletBasis basis(1.0, n);
    const auto q = CovarianceSpectrum::finite_rank({1.0, 0.3, 0.1}, n);
    auto a_fn = [](double y) { return y * y * (1.0 - y); };
    const auto a = basis.project(a_fn, 4096);
    const auto qa = apply_q_gamma(q, 1.0, a);
    for (double x : {0.1, 0.37, 0.5, 0.81}) {
        const double via_kernel = oracle::integrate([&](double y) { return kernel(q, basis, x, y) * a_fn(y); }, 0.0, 1.0);
        EXPECT_NEAR(basis.evaluate(qa, x), via_kernel, 1e-8);
    }
}

TEST(Spectrum, KernelExamples) {
    const DirichletBasis basis(1.0, 3);
    const auto q = CovarianceSpectrum::finite_rank({1.0}, 3);
    EXPECT_DOUBLE_EQ(kernel(q, basis, 0.5, 0.5), 2.0);
    const auto p = CovarianceSpectrum::power(2.0, 3);
    RandomStream rs(11);
    const auto pts = gaussian(rs, 20);
    for (std::size_t i = 0; i + 1 < pts.size(); i += 2) {
        const double x = 0.5 + 0.5 * std::tanh(pts[i]);
        const double y = 0.5 + 0.5 * std::tanh(pts[i + 1]);
        EXPECT_EQ(kernel(p, basis, x, y), kernel(p, basis, y, x));
    }
}

TEST(Spectrum, ParseSpecStrings) {
    const auto f = parse_spectrum("finite:1,0.5,0.25", 5);
    EXPECT_EQ(f.values(), (std::vector<double>{1.0, 0.5, 0.25, 0.0, 0.0}));
    const auto p = parse_spectrum("power:2", 3);
    EXPECT_EQ(p.values(), (std::vector<double>{1.0, 0.25, std::pow(3.0, -2.0)}));
    const auto e = parse_spectrum("exp:0.5", 2);
    EXPECT_EQ(e[1], std::exp(-1.0));
    // bit-exact decimal parsing
    EXPECT_EQ(parse_spectrum("finite:0.1", 1)[0], 0.1);
    EXPECT_THROW(parse_spectrum("power", 3), invalid_input);
    EXPECT_THROW(parse_spectrum("gauss:1", 3), invalid_input);
    EXPECT_THROW(parse_spectrum("finite:1,,2", 3), invalid_input);
    EXPECT_THROW(parse_spectrum("finite:1,2,3,4", 3), invalid_input);
    EXPECT_THROW(parse_spectrum("power:0.5", 3), invalid_input);
    EXPECT_THROW(parse_spectrum("exp:-1", 3), invalid_input);
    EXPECT_THROW(parse_spectrum("finite:-1", 3), invalid_input);
}

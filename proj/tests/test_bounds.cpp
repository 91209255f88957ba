#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "siegel_lab/bounds.hpp"
#include "siegel_lab/convolution.hpp"

using namespace siegel_lab;

namespace {

// Calibrated on the first run: r = 3, x = 1e6.
constexpr double kMunshiWorstRatioR3 = 4.62032085561;

double simpson(double a, double b, int n, const auto& f) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

// ρ(u) = ρ(k) - ∫_k^u ρ(t-1)/t dt marched by trapezoid on a uniform grid.
std::vector<double> rho_by_trapezoid(int per_unit, int units) {
    const double h = 1.0 / per_unit;
    std::vector<double> rho(static_cast<std::size_t>(per_unit) * units + 1, 1.0);
    for (int i = per_unit; i < per_unit * units; ++i) {
        const double t0 = i * h, t1 = (i + 1) * h;
        rho[i + 1] = rho[i] - h / 2 * (rho[i - per_unit] / t0 + rho[i + 1 - per_unit] / t1);
    }
    return rho;
}

}  // namespace

TEST(MunshiBeta, Examples) {
    EXPECT_NEAR(munshi_beta(2.0), 0.0, 1e-15);
    EXPECT_NEAR(munshi_beta(3.0), 0.245112, 1e-6);
    EXPECT_NEAR(munshi_beta(4.0), 0.754888, 1e-6);
    EXPECT_LT(munshi_beta(4.0), 1.0);
    EXPECT_THROW(munshi_beta(1.0), DomainError);
}

TEST(MunshiBeta, StrictlyIncreasingOnTwoToFour) {
    double prev = munshi_beta(2.0);
    for (int i = 1; i <= 200; ++i) {
        const double b = munshi_beta(2.0 + i * 0.01);
        ASSERT_GT(b, prev) << i;
        ASSERT_LT(b, 1.0);
        prev = b;
    }
}

TEST(Munshi, SmallCases) {
    const auto rep = munshi_verify(10, 3.0);
    EXPECT_GE(rep.worst_ratio, 2.0);
    EXPECT_EQ(root_threshold(2, 3.0), 8);
    EXPECT_EQ(root_threshold(3, 2.0), 9);
    EXPECT_THROW(munshi_verify(5, 3.0), DomainError);
    EXPECT_THROW(munshi_verify(100, 2.0), DomainError);
}

TEST(Munshi, MatchesDirectDivisorOracle) {
    const std::int64_t x = 3000;
    const double r = 3.0;
    const double beta = munshi_beta(r);
    double worst = 0;
    for (std::int64_t n = 2; n <= x; ++n) {
        double denom = 0;
        for (const auto d : oracle::divisors(n)) {
            if (std::pow(static_cast<double>(d), r) <= static_cast<double>(n) * (1 + 1e-12)) {
                denom += std::pow(static_cast<double>(oracle::tau_k(d, 2)), beta);
            }
        }
        worst = std::max(worst, static_cast<double>(oracle::tau_k(n, 2)) / denom);
    }
    EXPECT_NEAR(munshi_verify(x, r).worst_ratio, worst, 1e-12);
}

TEST(Munshi, FrozenRegressionAtOneMillion) {
    const auto rep = munshi_verify(1'000'000, 3.0);
    EXPECT_TRUE(std::isfinite(rep.worst_ratio));
    EXPECT_GE(rep.worst_ratio, 2.0);
    EXPECT_LT(rep.worst_ratio, 100.0);
    EXPECT_LT(rep.worst_ratio, 2 * kMunshiWorstRatioR3);
}

TEST(Munshi, WorstRatioGrowsWithR) {
    const auto tau = sieve_tau_k(100'000, 2);
    double prev = 0;
    for (double r : {2.5, 3.0, 3.5}) {
        const double w = munshi_verify(tau, 100'000, r).worst_ratio;
        EXPECT_GE(w, prev) << r;
        prev = w;
    }
}

TEST(TauShift, Examples) {
    const std::int64_t x = 100'000;
    const auto tau = sieve_tau_k(x, 2);
    const auto lambda = build_lambda(RealCharacter(-4), x);
    const auto small = tau_shift_bound_demo(lambda, tau, 100, 1, 10, 20);
    EXPECT_TRUE(small.holds);
    const auto big = tau_shift_bound_demo(lambda, tau, x, 1, 100, 200);
    EXPECT_TRUE(big.holds);
    EXPECT_GE(big.ratio, 1.0);

    ArithTable<std::int64_t> zero("zero", x, "zero");
    const auto z = tau_shift_bound_demo(zero, tau, x, 5, 50, 100);
    EXPECT_EQ(z.lhs, 0);
    EXPECT_EQ(z.rhs, 0);
    EXPECT_TRUE(z.holds);
    EXPECT_THROW(tau_shift_bound_demo(lambda, tau, x, 0, 50, 10), DomainError);
}

TEST(TauShift, DirectDoubleSumOracle) {
    const std::int64_t x = 2000;
    const auto tau = sieve_tau_k(x, 2);
    const auto lambda = build_lambda(RealCharacter(-163), x);
    const std::int64_t a = 7, Q = 30;
    std::int64_t lhs = 0, rhs = 0;
    for (std::int64_t n = 1; n <= x; ++n) {
        if (n == a) continue;
        for (std::int64_t q = Q + 1; q <= 2 * Q; ++q) {
            if ((n - a) % q == 0) lhs += lambda[n];
        }
        rhs += lambda[n] * oracle::tau_k(std::abs(n - a), 2);
    }
    const auto res = tau_shift_bound_demo(lambda, tau, x, a, Q, 10);
    EXPECT_EQ(res.lhs, lhs);
    EXPECT_EQ(res.rhs, rhs);
}

TEST(TauShift, RandomTriples) {
    const std::int64_t cap = 100'000;
    const auto tau = sieve_tau_k(cap, 2);
    const auto lambda = build_lambda(RealCharacter(-4), cap);
    std::mt19937_64 rng(99);
    for (int i = 0; i < 20; ++i) {
        const std::int64_t x = 100 + static_cast<std::int64_t>(rng() % (cap - 100));
        const std::int64_t a = 1 + static_cast<std::int64_t>(rng() % (x - 1));
        const std::int64_t Q = 1 + static_cast<std::int64_t>(rng() % 500);
        const auto res = tau_shift_bound_demo(lambda, tau, x, a, Q, 50);
        ASSERT_TRUE(res.holds) << x << ' ' << a << ' ' << Q;
        ASSERT_LE(res.lhs, res.rhs);
    }
}

TEST(Smooth, Examples) {
    EXPECT_EQ(smooth_count(100, 10), 46);
    EXPECT_EQ(smooth_count(10, 2), 4);
    EXPECT_EQ(smooth_count(1000, 1000), 1000);
    std::int64_t brute = 0;
    for (std::int64_t n = 1; n <= 5000; ++n) {
        bool ok = true;
        for (auto [p, e] : oracle::factor(n)) ok = ok && p <= 30;
        brute += ok;
    }
    EXPECT_EQ(smooth_count(5000, 30), brute);
}

TEST(Dickman, ClosedFormsAndBoundaries) {
    EXPECT_EQ(dickman_rho(0.0), 1.0);
    EXPECT_EQ(dickman_rho(1.0), 1.0);
    EXPECT_NEAR(dickman_rho(2.0), 1 - std::log(2.0), 1e-8);
    EXPECT_NEAR(dickman_rho(2.0), 0.3068528, 1e-7);
    for (double u = 1.0; u <= 2.0; u += 0.125) EXPECT_NEAR(dickman_rho(u), 1 - std::log(u), 1e-13) << u;
    EXPECT_THROW(dickman_rho(-0.1), DomainError);
    EXPECT_THROW(dickman_rho(20.5), DomainError);
}

TEST(Dickman, IntegralFormulaOnTwoToThree) {
    auto rho3 = [](double u) {
        return 1 - std::log(u) + simpson(2.0, u, 2000, [](double t) { return std::log(t - 1) / t; });
    };
    EXPECT_NEAR(dickman_rho(3.0), rho3(3.0), 1e-7);
    EXPECT_NEAR(dickman_rho(3.0), 0.0486084, 1e-7);
    EXPECT_NEAR(dickman_rho(2.5), rho3(2.5), 1e-7);
}

TEST(Dickman, StepIntegrationOracle) {
    // Richardson extrapolation of two trapezoid marches removes the h^2 term.
    const int per_unit = 20000;
    const auto coarse = rho_by_trapezoid(per_unit, 8);
    const auto fine = rho_by_trapezoid(2 * per_unit, 8);
    for (int u = 2; u <= 8; ++u) {
        const double expect = (4 * fine[static_cast<std::size_t>(u) * 2 * per_unit] -
                               coarse[static_cast<std::size_t>(u) * per_unit]) / 3;
        EXPECT_NEAR(dickman_rho(u), expect, 1e-4 * expect) << u;
    }
    EXPECT_NEAR(dickman_rho(10.0), 2.770171837725959e-11, 1e-20);
}

TEST(Dickman, SmoothCountBracket) {
    const std::int64_t x = 1'000'000;
    const auto spf = sieve_spf(x);
    for (double u : {1.5, 2.0, 2.5, 3.0}) {
        const auto y = static_cast<std::int64_t>(std::floor(std::pow(static_cast<double>(x), 1.0 / u)));
        const double uu = std::log(static_cast<double>(x)) / std::log(static_cast<double>(y));
        const double ratio = static_cast<double>(smooth_count(spf, x, y)) / (x * dickman_rho(uu));
        EXPECT_GE(ratio, 1.0 / 3) << u;
        EXPECT_LE(ratio, 3.0) << u;
    }
}

TEST(Shiu, DivisorAsymptotic) {
    const auto tau = sieve_tau_k(1'000'000, 2);
    const double r = shiu_ratio(tau, 1'000'000, 1, 1, 2);
    EXPECT_GE(r, 0.8);
    EXPECT_LE(r, 1.2);
    const auto tau4 = sieve_tau_k(100'000, 4);
    const double r4 = shiu_ratio(tau4, 100'000, 7, 1, 4);
    EXPECT_TRUE(std::isfinite(r4));
    EXPECT_GT(r4, 0.0);
    EXPECT_GT(shiu_ratio(tau, 50, 49, 1, 2), 0.0);
    EXPECT_THROW(shiu_ratio(tau, 100, 6, 3, 2), DomainError);
    EXPECT_THROW(shiu_ratio(tau, 100, 6, 1, 3), DomainError);
}

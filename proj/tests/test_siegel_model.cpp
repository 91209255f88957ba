#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "siegel_lab/siegel_model.hpp"

using namespace siegel_lab;

using Pair = std::pair<std::int64_t, std::int64_t>;

TEST(DefaultR, Examples) {
    EXPECT_EQ(default_R(1'000'000, 3), 24309);
    EXPECT_EQ(default_R(16, 3), 16);
    const auto rough = static_cast<std::int64_t>(std::ceil(1e8 * std::exp(-std::sqrt(std::log(1e8)))));
    EXPECT_EQ(default_R(100'000'000, 4), rough);
    EXPECT_EQ(default_R(100'000'000, 30), 24'300'000);
    EXPECT_EQ(default_R(1'000'000'000, 163), 1'000'000'000);
    EXPECT_THROW(default_R(15, 3), DomainError);
    EXPECT_THROW(default_R(100, 2), DomainError);
    EXPECT_THROW(default_R(100, 7'000'000'000LL), OverflowError);
}

TEST(SiegelParams, Validation) {
    SiegelParams p;
    EXPECT_NO_THROW(p.validate());
    p.disc = -12;
    EXPECT_THROW(p.validate(), DomainError);
    p = {};
    p.alpha = 0.01;
    EXPECT_THROW(p.validate(), DomainError);
    p = {};
    p.h = 1.0;
    EXPECT_THROW(p.validate(), DomainError);
    p = {};
    p.x = 1'000'000;
    p.Q = 1000;
    EXPECT_NEAR(p.theta(), 0.5, 1e-15);
}

TEST(Restrictions, Examples) {
    const std::int64_t x = 1000;
    const RealCharacter chi(-4);
    const auto spf = sieve_spf(x);
    const auto mu = sieve_mu(spf, x);
    const auto lambda = build_lambda(chi, x);
    const auto lp = build_lambda_prime(chi, x);
    const auto t = build_siegel_tables(lambda, lp, spf, mu, 3);

    EXPECT_NEAR(t.lambda_r_prime[49], std::log(7.0), 1e-12);
    EXPECT_EQ(t.lambda_w[77], 0);
    EXPECT_EQ(t.lambda_w[5], 2);
    EXPECT_EQ(t.lambda_r[1], 1);
    EXPECT_EQ(t.lambda_r[6], 0);
    EXPECT_EQ(t.lambda_w[25], 0);
    EXPECT_EQ(t.lambda_r[25], 3);
    EXPECT_EQ(t.lambda_w.name, "lambda_W");
}

TEST(Restrictions, Commute) {
    const std::int64_t x = 50'000;
    const RealCharacter chi(-163);
    const auto spf = sieve_spf(x);
    const auto mu = sieve_mu(spf, x);
    const auto lp = build_lambda_prime(chi, x);
    for (std::int64_t R : {2, 5, 100, 1000}) {
        const auto a = squarefree_restrict(rough_restrict(lp, spf, R), mu);
        const auto b = rough_restrict(squarefree_restrict(lp, mu), spf, R);
        ASSERT_EQ(a.values, b.values) << R;
    }
}

TEST(Restrictions, LambdaPrimeBoundedByTauLog) {
    const std::int64_t x = 100'000;
    const auto spf = sieve_spf(x);
    const auto tau = sieve_tau_k(spf, x, 2);
    for (std::int64_t disc : {-4, -163, 5}) {
        const auto lp = build_lambda_prime(RealCharacter(disc), x);
        for (std::int64_t n = 1; n <= x; ++n) {
            ASSERT_LE(lp[n], tau[n] * std::log(static_cast<double>(n)) + 1e-9) << disc << ' ' << n;
        }
    }
}

TEST(SplitPm, Examples) {
    const RealCharacter chi(-4);
    const auto spf = sieve_spf(1000);
    EXPECT_EQ(split_pm(45, chi, spf), (Pair{5, 9}));
    EXPECT_EQ(split_pm(13, chi, spf), (Pair{13, 1}));
    EXPECT_EQ(split_pm(1, chi, spf), (Pair{1, 1}));
    EXPECT_THROW(split_pm(6, chi, spf), DomainError);
    EXPECT_THROW(split_pm(0, chi, spf), DomainError);
    for (std::int64_t n = 1; n <= 1000; n += 2) {
        const auto [a, b] = split_pm(n, chi, spf);
        ASSERT_EQ(a * b, n);
        for (auto [p, e] : oracle::factor(a)) ASSERT_EQ(p % 4, 1);
        for (auto [p, e] : oracle::factor(b)) ASSERT_EQ(p % 4, 3);
    }
}

TEST(RoughSupport, PrimesAndSquarefreeRough) {
    for (std::int64_t disc : {-4, -163, 5}) {
        const RealCharacter chi(disc);
        const std::int64_t x = 200'000;
        const std::int64_t R = std::max<std::int64_t>(3, chi.conductor());
        const auto rep = verify_rough_prime_support(chi, x, R);
        EXPECT_EQ(rep.violations, 0) << disc;
        EXPECT_GT(rep.primes_checked, 10'000) << disc;
        EXPECT_LT(rep.worst_prime_error, 1e-12) << disc;
    }
    EXPECT_THROW(verify_rough_prime_support(RealCharacter(-4), 100, 1), DomainError);
}

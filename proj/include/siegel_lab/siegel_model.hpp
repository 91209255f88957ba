#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "arith_table.hpp"
#include "characters.hpp"
#include "convolution.hpp"
#include "errors.hpp"
#include "sieve.hpp"

namespace siegel_lab {

/// Experiment parameter bundle. Field names follow the usual symbols:
/// x (range), disc (character), R (roughness cut), A (exponent in the
/// regularized L-value), alpha, h (exceptional-set slack), Q (modulus scale).
struct SiegelParams {
    std::int64_t x = 100'000;
    std::int64_t disc = -4;
    std::int64_t R = 2;
    double A = 2.0;
    double alpha = 0.001;
    double h = 0.5;
    std::int64_t Q = 100;

    void validate() const {
        if (x < 1) throw DomainError("SiegelParams: x must be >= 1");
        if (!is_fundamental_discriminant(disc)) throw DomainError("SiegelParams: disc is not fundamental");
        if (R < 2) throw DomainError("SiegelParams: R must be >= 2");
        if (!(A > 0)) throw DomainError("SiegelParams: A must be > 0");
        if (!(alpha > 0 && alpha < 1.0 / 500)) throw DomainError("SiegelParams: alpha must lie in (0, 1/500)");
        if (!(h > 0 && h < 1)) throw DomainError("SiegelParams: h must lie in (0, 1)");
        if (Q < 2) throw DomainError("SiegelParams: Q must be >= 2");
    }

    /// theta = log Q / log x.
    double theta() const { return std::log(static_cast<double>(Q)) / std::log(static_cast<double>(x)); }
};

/// max(D^5, ceil(x exp(-sqrt(log x)))), saturated at x.
inline std::int64_t default_R(std::int64_t x, std::int64_t D) {
    if (x < 16) throw DomainError("default_R: x must be >= 16");
    if (D < 3) throw DomainError("default_R: D must be >= 3");
    __int128 d5 = 1;
    for (int i = 0; i < 5; ++i) {
        d5 *= D;
        if (d5 > std::numeric_limits<std::int64_t>::max()) throw OverflowError("default_R: D^5 overflows");
    }
    const double lx = std::log(static_cast<double>(x));
    const auto rough = static_cast<std::int64_t>(std::ceil(static_cast<double>(x) * std::exp(-std::sqrt(lx))));
    const std::int64_t r = std::max(static_cast<std::int64_t>(d5), rough);
    return std::min(r, x);
}

/// f(n) 1_{P(n) > R}, with P(1) = +inf.
template <typename T>
ArithTable<T> rough_restrict(const ArithTable<T>& f, const SpfTable& spf, std::int64_t R) {
    if (f.limit != spf.limit()) throw LimitMismatch("rough_restrict: limits differ");
    ArithTable<T> out(f.name + "_R", f.limit, "rough(" + f.provenance + ",R=" + std::to_string(R) + ")");
    for (std::int64_t n = 1; n <= f.limit; ++n) out[n] = spf.is_rough(n, R) ? f[n] : T{};
    return out;
}

/// f(n) mu(n)^2.
template <typename T>
ArithTable<T> squarefree_restrict(const ArithTable<T>& f, const ArithTable<std::int8_t>& mu) {
    if (f.limit != mu.limit) throw LimitMismatch("squarefree_restrict: limits differ");
    ArithTable<T> out(f.name + "_sf", f.limit, "squarefree(" + f.provenance + ")");
    for (std::int64_t n = 1; n <= f.limit; ++n) out[n] = mu[n] != 0 ? f[n] : T{};
    return out;
}

/// n = n1 * nm1 where primes of n1 have χ(p) = 1 and primes of nm1 have χ(p) = -1.
inline std::pair<std::int64_t, std::int64_t> split_pm(std::int64_t n, const RealCharacter& chi,
                                                      const SpfTable& spf) {
    if (n < 1) throw DomainError("split_pm: n must be >= 1");
    require_limit(spf.spf, n, "split_pm");
    if (std::gcd(n, chi.conductor()) != 1) {
        throw DomainError("split_pm: gcd(n, D) > 1 for n=" + std::to_string(n));
    }
    std::int64_t n1 = 1, nm1 = 1;
    for (std::int64_t m = n; m > 1;) {
        const std::int64_t p = spf[m];
        std::int64_t pk = 1;
        while (m % p == 0) {
            m /= p;
            pk *= p;
        }
        (chi(p) == 1 ? n1 : nm1) *= pk;
    }
    return {n1, nm1};
}

/// The restricted tables used by the upper-bound argument for ψ(x,q,a).
struct SiegelTables {
    ArithTable<std::int64_t> lambda_r;
    ArithTable<double> lambda_r_prime;
    ArithTable<std::int64_t> lambda_w;
    ArithTable<double> lambda_w_prime;
};

inline SiegelTables build_siegel_tables(const ArithTable<std::int64_t>& lambda,
                                        const ArithTable<double>& lambda_prime, const SpfTable& spf,
                                        const ArithTable<std::int8_t>& mu, std::int64_t R) {
    SiegelTables t{rough_restrict(lambda, spf, R), rough_restrict(lambda_prime, spf, R), {}, {}};
    t.lambda_w = squarefree_restrict(t.lambda_r, mu);
    t.lambda_w_prime = squarefree_restrict(t.lambda_r_prime, mu);
    t.lambda_r.name = "lambda_R";
    t.lambda_r_prime.name = "lambda_R_prime";
    t.lambda_w.name = "lambda_W";
    t.lambda_w_prime.name = "lambda_W_prime";
    return t;
}

struct RoughSupportReport {
    std::int64_t squarefree_rough_checked = 0;  // squarefree n <= x with P(n) > R, n > 1
    std::int64_t primes_checked = 0;            // primes in (R, x]
    std::int64_t violations = 0;
    double worst_prime_error = 0.0;             // max |λ'_W(p) - log p|
};

/// Checks λ'_W(n) >= Λ(n) - 1e-9 on squarefree R-rough n and λ'_W(p) = log p
/// on primes p in (R, x].
inline RoughSupportReport verify_rough_prime_support(const ArithTable<double>& lambda_w_prime,
                                                     const ArithTable<double>& vonmangoldt,
                                                     const ArithTable<std::int8_t>& mu,
                                                     const SpfTable& spf, std::int64_t R) {
    if (R < 2) throw DomainError("verify_rough_prime_support: R must be >= 2");
    const std::int64_t x = lambda_w_prime.limit;
    RoughSupportReport rep;
    for (std::int64_t n = 2; n <= x; ++n) {
        if (mu[n] == 0 || !spf.is_rough(n, R)) continue;
        ++rep.squarefree_rough_checked;
        if (lambda_w_prime[n] < vonmangoldt[n] - 1e-9) ++rep.violations;
        if (spf.is_prime(n)) {
            ++rep.primes_checked;
            const double err = std::abs(lambda_w_prime[n] - std::log(static_cast<double>(n)));
            rep.worst_prime_error = std::max(rep.worst_prime_error, err);
            if (err > 1e-9) ++rep.violations;
        }
    }
    return rep;
}

inline RoughSupportReport verify_rough_prime_support(const RealCharacter& chi, std::int64_t x,
                                                     std::int64_t R) {
    const auto spf = sieve_spf(std::max<std::int64_t>(x, 2));
    const auto mu = sieve_mu(spf, x);
    const auto lp = build_lambda_prime(chi, x);
    const auto w = squarefree_restrict(rough_restrict(lp, spf, R), mu);
    return verify_rough_prime_support(w, sieve_vonmangoldt(spf, x), mu, spf, R);
}

}  // namespace siegel_lab

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "arith_table.hpp"
#include "characters.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "sieve.hpp"

namespace siegel_lab {

/// Result element type of f * g: exact int64 when both inputs are integer.
template <typename F, typename G>
using convolve_t = std::conditional_t<std::is_floating_point_v<F> || std::is_floating_point_v<G>,
                                      double, std::int64_t>;

/// h(n) = sum_{d | n} f(d) g(n/d) for n <= x.
///
/// Output is split into segments; within a segment, each n collects its
/// divisor pairs (d, n/d) with d <= sqrt(n) in increasing d. The summation
/// order per n is therefore fixed, so the result is bit-identical for every
/// segment size and thread count. Real-valued outputs use compensated sums.
template <typename F, typename G>
ArithTable<convolve_t<F, G>> dirichlet_convolve(const ArithTable<F>& f, const ArithTable<G>& g,
                                                std::int64_t x, std::string name = {},
                                                int threads = default_threads(),
                                                std::int64_t segment = std::int64_t{1} << 18) {
    using Out = convolve_t<F, G>;
    require_limit(f, x, "dirichlet_convolve");
    require_limit(g, x, "dirichlet_convolve");
    if (name.empty()) name = f.name + "*" + g.name;
    ArithTable<Out> h(name, x, "conv(" + f.provenance + "," + g.provenance + ",x=" + std::to_string(x) + ")");

    parallel_chunks(
        1, x + 1, segment,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            const std::int64_t len = hi - lo;
            std::vector<Out> acc(static_cast<std::size_t>(len), Out{});
            std::vector<double> comp;
            if constexpr (std::is_floating_point_v<Out>) comp.assign(static_cast<std::size_t>(len), 0.0);
            auto add = [&](std::int64_t i, Out v) {
                if constexpr (std::is_floating_point_v<Out>) {
                    const double s = acc[i];
                    const double t = s + v;
                    comp[i] += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
                    acc[i] = t;
                } else {
                    acc[i] += v;
                }
            };
            const std::int64_t top = isqrt(hi - 1);
            for (std::int64_t d = 1; d <= top; ++d) {
                const Out fd = static_cast<Out>(f[d]);
                const Out gd = static_cast<Out>(g[d]);
                std::int64_t e = std::max(d, (lo + d - 1) / d);
                for (std::int64_t n = d * e; n < hi; n += d, ++e) {
                    add(n - lo, fd * static_cast<Out>(g[e]));
                    if (e != d) add(n - lo, static_cast<Out>(f[e]) * gd);
                }
            }
            for (std::int64_t i = 0; i < len; ++i) {
                if constexpr (std::is_floating_point_v<Out>) {
                    h[lo + i] = acc[i] + comp[i];
                } else {
                    h[lo + i] = acc[i];
                }
            }
        },
        threads);
    return h;
}

/// Pointwise product f(n) g(n).
template <typename F, typename G>
ArithTable<convolve_t<F, G>> pointwise_product(const ArithTable<F>& f, const ArithTable<G>& g,
                                               std::string name) {
    using Out = convolve_t<F, G>;
    if (f.limit != g.limit) throw LimitMismatch("pointwise_product: limits differ");
    ArithTable<Out> out(std::move(name), f.limit, "mul(" + f.provenance + "," + g.provenance + ")");
    for (std::int64_t n = 1; n <= f.limit; ++n) out[n] = static_cast<Out>(f[n]) * static_cast<Out>(g[n]);
    return out;
}

template <typename T, typename U>
double max_abs_difference(const ArithTable<T>& a, const ArithTable<U>& b, std::int64_t x) {
    require_limit(a, x, "max_abs_difference");
    require_limit(b, x, "max_abs_difference");
    double worst = 0.0;
    for (std::int64_t n = 1; n <= x; ++n) {
        worst = std::max(worst, std::abs(static_cast<double>(a[n]) - static_cast<double>(b[n])));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// λ = χ*1, λ' = χ*log, ν = μ*μχ
// ---------------------------------------------------------------------------

/// λ = χ * 1. Throws std::logic_error if any λ(n) < 0.
inline ArithTable<std::int64_t> build_lambda(const RealCharacter& chi, std::int64_t x,
                                             int threads = default_threads()) {
    auto t = dirichlet_convolve(chi_table(chi, x), one_table(x), x, "lambda", threads);
    t.provenance = "lambda(disc=" + std::to_string(chi.disc()) + ",x=" + std::to_string(x) + ")";
    for (std::int64_t n = 1; n <= x; ++n) {
        if (t[n] < 0) throw std::logic_error("build_lambda: negative value at n=" + std::to_string(n));
    }
    return t;
}

/// λ' = χ * log. Checks λ'(p) = log p and λ' >= -1e-9.
inline ArithTable<double> build_lambda_prime(const RealCharacter& chi, std::int64_t x,
                                             int threads = default_threads()) {
    auto t = dirichlet_convolve(chi_table(chi, x), log_table(x), x, "lambda_prime", threads);
    t.provenance = "lambda_prime(disc=" + std::to_string(chi.disc()) + ",x=" + std::to_string(x) + ")";
    for (std::int64_t n = 1; n <= x; ++n) {
        if (t[n] < -1e-9) {
            throw std::logic_error("build_lambda_prime: negative value at n=" + std::to_string(n));
        }
    }
    // λ'(p) = χ(1) log p + χ(p) log 1; spot-check the primes below 1000.
    for (const auto p : small_primes(std::min<std::int64_t>(x, 1000))) {
        if (std::abs(t[p] - std::log(static_cast<double>(p))) > 1e-12) {
            throw std::logic_error("build_lambda_prime: lambda'(p) != log p at p=" + std::to_string(p));
        }
    }
    return t;
}

/// ν = μ * μχ. Checks ν(p) = -(1 + χ(p)).
inline ArithTable<std::int64_t> build_nu(const RealCharacter& chi, const ArithTable<std::int8_t>& mu,
                                         std::int64_t x, int threads = default_threads()) {
    require_limit(mu, x, "build_nu");
    ArithTable<std::int8_t> mu_chi("mu_chi", x, "mu_chi(disc=" + std::to_string(chi.disc()) + ")");
    for (std::int64_t n = 1; n <= x; ++n) mu_chi[n] = static_cast<std::int8_t>(mu[n] * chi(n));
    auto t = dirichlet_convolve(mu, mu_chi, x, "nu", threads);
    t.provenance = "nu(disc=" + std::to_string(chi.disc()) + ",x=" + std::to_string(x) + ")";
    for (const auto p : small_primes(std::min<std::int64_t>(x, 1000))) {
        if (t[p] != -(1 + chi(p))) {
            throw std::logic_error("build_nu: nu(p) != -(1+chi(p)) at p=" + std::to_string(p));
        }
    }
    return t;
}

inline ArithTable<std::int64_t> build_nu(const RealCharacter& chi, std::int64_t x,
                                         int threads = default_threads()) {
    return build_nu(chi, sieve_mu(sieve_spf(std::max<std::int64_t>(x, 2)), x, threads), x, threads);
}

/// max_n |(λ' * ν)(n) - Λ(n)|.
inline double verify_vonmangoldt_identity(const ArithTable<double>& lambda_prime,
                                          const ArithTable<std::int64_t>& nu,
                                          const ArithTable<double>& vonmangoldt, std::int64_t x,
                                          int threads = default_threads()) {
    const auto lhs = dirichlet_convolve(lambda_prime, nu, x, "lambda_prime*nu", threads);
    return max_abs_difference(lhs, vonmangoldt, x);
}

inline double verify_vonmangoldt_identity(const RealCharacter& chi, std::int64_t x,
                                          int threads = default_threads()) {
    const auto spf = sieve_spf(std::max<std::int64_t>(x, 2));
    const auto mu = sieve_mu(spf, x, threads);
    return verify_vonmangoldt_identity(build_lambda_prime(chi, x, threads), build_nu(chi, mu, x, threads),
                                       sieve_vonmangoldt(spf, x, threads), x, threads);
}

// ---------------------------------------------------------------------------
// Structural identities of λ and λ'
// ---------------------------------------------------------------------------

/// n = s * t with s the square part p^{2 floor(e/2)} and t = n / s squarefree.
struct SquareSplit {
    std::int64_t square;
    std::int64_t squarefree;
};

inline SquareSplit square_squarefree_split(std::int64_t n, const SpfTable& spf) {
    SquareSplit out{1, 1};
    while (n > 1) {
        const std::int64_t p = spf[n];
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        for (int i = 0; i < e / 2; ++i) out.square *= p * p;
        if (e & 1) out.squarefree *= p;
    }
    return out;
}

/// Worst violation of λ'(dn) = λ(d)λ'(n) + λ'(d)λ(n) over coprime d, n with
/// dn <= limit.
inline double lemma_split_deviation(const ArithTable<std::int64_t>& lambda,
                                    const ArithTable<double>& lambda_prime, std::int64_t limit) {
    require_limit(lambda, limit, "lemma_split_deviation");
    require_limit(lambda_prime, limit, "lemma_split_deviation");
    double worst = 0.0;
    for (std::int64_t d = 1; d <= limit; ++d) {
        for (std::int64_t n = 1; d * n <= limit; ++n) {
            if (std::gcd(d, n) != 1) continue;
            const double rhs = static_cast<double>(lambda[d]) * lambda_prime[n] +
                               lambda_prime[d] * static_cast<double>(lambda[n]);
            worst = std::max(worst, std::abs(lambda_prime[d * n] - rhs));
        }
    }
    return worst;
}

/// Number of n <= limit with λ(n) > λ(s)λ(t) for n = st as above.
inline std::int64_t lemma_square_split_violations(const ArithTable<std::int64_t>& lambda,
                                                  const SpfTable& spf, std::int64_t limit) {
    require_limit(lambda, limit, "lemma_square_split_violations");
    std::int64_t bad = 0;
    for (std::int64_t n = 2; n <= limit; ++n) {
        const auto [s, t] = square_squarefree_split(n, spf);
        if (lambda[n] > lambda[s] * lambda[t]) ++bad;
    }
    return bad;
}

/// Number of n <= limit with |ν(n)| > λ(n).
inline std::int64_t nu_bound_violations(const ArithTable<std::int64_t>& nu,
                                        const ArithTable<std::int64_t>& lambda, std::int64_t limit) {
    std::int64_t bad = 0;
    for (std::int64_t n = 1; n <= limit; ++n) {
        if (std::abs(nu[n]) > lambda[n]) ++bad;
    }
    return bad;
}

/// Measured C in |sum_{n<=x} λ(n) - x L(1,χ)| = C D sqrt(x).
inline double mean_value_constant(const ArithTable<std::int64_t>& lambda, std::int64_t x,
                                  double l_one_value, std::int64_t conductor) {
    require_limit(lambda, x, "mean_value_constant");
    std::int64_t total = 0;
    for (std::int64_t n = 1; n <= x; ++n) total += lambda[n];
    const double dx = static_cast<double>(x);
    return std::abs(static_cast<double>(total) - dx * l_one_value) /
           (static_cast<double>(conductor) * std::sqrt(dx));
}

/// sum_{D^2 <= n <= x} λ(n)/n divided by L(1,χ) log x. Returns 0 when D^2 > x.
inline double log_mean_ratio(const ArithTable<std::int64_t>& lambda, std::int64_t x,
                             double l_one_value, std::int64_t conductor) {
    require_limit(lambda, x, "log_mean_ratio");
    CompensatedSum s;
    for (std::int64_t n = conductor * conductor; n <= x; ++n) {
        s.add(static_cast<double>(lambda[n]) / static_cast<double>(n));
    }
    return s.value() / (l_one_value * std::log(static_cast<double>(x)));
}

}  // namespace siegel_lab

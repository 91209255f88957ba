#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "arith_table.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace siegel_lab {

struct SieveOptions {
    std::int64_t segment = std::int64_t{1} << 18;
    int threads = default_threads();
};

/// Smallest-prime-factor table. spf[1] is stored as 0 and read through
/// smallest_prime(), which reports P(1) = +infinity.
struct SpfTable {
    ArithTable<std::uint32_t> spf;

    std::int64_t limit() const { return spf.limit; }
    std::uint32_t operator[](std::int64_t n) const { return spf[n]; }

    /// P(n) with P(1) = +inf (represented by the max int64).
    std::int64_t smallest_prime(std::int64_t n) const {
        return n == 1 ? std::numeric_limits<std::int64_t>::max() : spf[n];
    }
    bool is_prime(std::int64_t n) const { return n >= 2 && spf[n] == n; }
    /// True iff every prime factor of n exceeds r (n = 1 always passes).
    bool is_rough(std::int64_t n, std::int64_t r) const { return smallest_prime(n) > r; }
};

/// Plain sieve of Eratosthenes for primes <= n.
inline std::vector<std::uint32_t> small_primes(std::int64_t n) {
    std::vector<std::uint32_t> primes;
    if (n < 2) return primes;
    std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
    for (std::int64_t i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::int64_t j = i * i; j <= n; j += i) composite[j] = true;
    }
    return primes;
}

inline std::int64_t isqrt(std::int64_t n) {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

/// Segmented smallest-prime-factor sieve on [1, x]. Output does not depend
/// on segment size or thread count.
inline SpfTable sieve_spf(std::int64_t x, const SieveOptions& opt = {}) {
    if (x < 2) throw DomainError("sieve_spf: x must be >= 2");
    if (x > std::numeric_limits<std::uint32_t>::max()) throw CapacityError("sieve_spf: x too large");
    if (opt.segment < 1) throw DomainError("sieve_spf: segment must be >= 1");
    SpfTable out{ArithTable<std::uint32_t>("spf", x, "spf(x=" + std::to_string(x) + ")")};
    const auto primes = small_primes(isqrt(x));
    auto& spf = out.spf.values;

    parallel_chunks(
        2, x + 1, opt.segment,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (const std::uint32_t p : primes) {
                const std::int64_t pp = std::int64_t{p} * p;
                if (pp >= hi) break;
                std::int64_t start = std::max(pp, (lo + p - 1) / p * p);
                for (std::int64_t m = start; m < hi; m += p) {
                    if (spf[m] == 0) spf[m] = p;
                }
            }
            for (std::int64_t m = lo; m < hi; ++m) {
                if (spf[m] == 0) spf[m] = static_cast<std::uint32_t>(m);
            }
        },
        opt.threads);
    return out;
}

/// Builds a multiplicative function from its prime-power values,
/// f(n) = prod f(p^e), factoring each n independently through spf.
template <typename T, typename PrimePower>
ArithTable<T> sieve_multiplicative(const SpfTable& spf, std::int64_t x, std::string name,
                                   std::string provenance, PrimePower&& at_prime_power,
                                   int threads = default_threads()) {
    require_limit(spf.spf, x, name.c_str());
    ArithTable<T> out(std::move(name), x, std::move(provenance));
    out[1] = T{1};
    parallel_chunks(
        2, x + 1, kReductionChunk,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t n = lo; n < hi; ++n) {
                std::int64_t m = n;
                T value{1};
                while (m > 1) {
                    const std::int64_t p = spf[m];
                    int e = 0;
                    do {
                        m /= p;
                        ++e;
                    } while (m % p == 0);
                    value *= at_prime_power(p, e);
                    if (value == T{0}) break;
                }
                out[n] = value;
            }
        },
        threads);
    return out;
}

inline ArithTable<std::int8_t> sieve_mu(const SpfTable& spf, std::int64_t x,
                                        int threads = default_threads()) {
    return sieve_multiplicative<std::int8_t>(
        spf, x, "mu", "mu(x=" + std::to_string(x) + ")",
        [](std::int64_t, int e) { return static_cast<std::int8_t>(e == 1 ? -1 : 0); }, threads);
}

inline ArithTable<std::int64_t> sieve_totient(const SpfTable& spf, std::int64_t x,
                                              int threads = default_threads()) {
    return sieve_multiplicative<std::int64_t>(
        spf, x, "phi", "phi(x=" + std::to_string(x) + ")",
        [](std::int64_t p, int e) {
            std::int64_t v = p - 1;
            for (int i = 1; i < e; ++i) v *= p;
            return v;
        },
        threads);
}

/// Binomial coefficient C(n, k) for the small arguments used by tau_k.
inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// k-fold divisor function, tau_k(p^e) = C(e + k - 1, k - 1); 2 <= k <= 8.
inline ArithTable<std::int64_t> sieve_tau_k(const SpfTable& spf, std::int64_t x, int k,
                                            int threads = default_threads()) {
    if (k < 2 || k > 8) throw DomainError("sieve_tau_k: k must be in [2, 8]");
    const std::string name = k == 2 ? "tau" : "tau_" + std::to_string(k);
    return sieve_multiplicative<std::int64_t>(
        spf, x, name, name + "(x=" + std::to_string(x) + ")",
        [k](std::int64_t, int e) { return binomial(e + k - 1, k - 1); }, threads);
}

/// Λ(n) = log p when n = p^k, else 0.
inline ArithTable<double> sieve_vonmangoldt(const SpfTable& spf, std::int64_t x,
                                            int threads = default_threads()) {
    require_limit(spf.spf, x, "sieve_vonmangoldt");
    ArithTable<double> out("Lambda", x, "Lambda(x=" + std::to_string(x) + ")");
    parallel_chunks(
        2, x + 1, kReductionChunk,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t n = lo; n < hi; ++n) {
                const std::int64_t p = spf[n];
                std::int64_t m = n;
                while (m % p == 0) m /= p;
                out[n] = m == 1 ? std::log(static_cast<double>(p)) : 0.0;
            }
        },
        threads);
    return out;
}

/// log n as a table (the analytic weight "log").
inline ArithTable<double> log_table(std::int64_t x) {
    ArithTable<double> out("log", x, "log(x=" + std::to_string(x) + ")");
    for (std::int64_t n = 1; n <= x; ++n) out[n] = std::log(static_cast<double>(n));
    return out;
}

/// The constant function 1.
inline ArithTable<std::int8_t> one_table(std::int64_t x) {
    ArithTable<std::int8_t> out("one", x, "one(x=" + std::to_string(x) + ")");
    for (std::int64_t n = 1; n <= x; ++n) out[n] = 1;
    return out;
}

}  // namespace siegel_lab

namespace siegel_lab {

inline ArithTable<std::int8_t> sieve_mu(std::int64_t x) { return sieve_mu(sieve_spf(std::max<std::int64_t>(x, 2)), x); }
inline ArithTable<std::int64_t> sieve_totient(std::int64_t x) {
    return sieve_totient(sieve_spf(std::max<std::int64_t>(x, 2)), x);
}
inline ArithTable<std::int64_t> sieve_tau_k(std::int64_t x, int k) {
    return sieve_tau_k(sieve_spf(std::max<std::int64_t>(x, 2)), x, k);
}
inline ArithTable<double> sieve_vonmangoldt(std::int64_t x) {
    return sieve_vonmangoldt(sieve_spf(std::max<std::int64_t>(x, 2)), x);
}

}  // namespace siegel_lab

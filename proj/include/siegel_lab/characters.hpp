#pragma once

#include <cstdint>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "arith_table.hpp"
#include "errors.hpp"

namespace siegel_lab {

/// Kronecker symbol (a|n), including n <= 0 by the usual extension.
inline int kronecker(std::int64_t a, std::int64_t n) {
    if (n == 0) return (a == 1 || a == -1) ? 1 : 0;
    if ((a & 1) == 0 && (n & 1) == 0) return 0;

    int result = 1;
    // Factor out powers of two from n using (a|2).
    unsigned twos = 0;
    while ((n & 1) == 0) {
        n /= 2;
        ++twos;
    }
    if (twos & 1) {
        const std::int64_t r = ((a % 8) + 8) % 8;
        if (r == 3 || r == 5) result = -result;
    }
    if (n < 0) {
        n = -n;
        if (a < 0) result = -result;
    }
    // Now n is odd and positive: Jacobi symbol.
    std::uint64_t m = static_cast<std::uint64_t>(n);
    std::int64_t r = a % n;
    if (r < 0) r += n;
    std::uint64_t b = static_cast<std::uint64_t>(r);
    while (b != 0) {
        while ((b & 1) == 0) {
            b >>= 1;
            const std::uint64_t m8 = m & 7;
            if (m8 == 3 || m8 == 5) result = -result;
        }
        std::swap(b, m);
        if ((b & 3) == 3 && (m & 3) == 3) result = -result;
        b %= m;
    }
    return m == 1 ? result : 0;
}

inline bool is_squarefree(std::int64_t m) {
    std::uint64_t v = static_cast<std::uint64_t>(m < 0 ? -m : m);
    if (v == 0) return false;
    for (std::uint64_t p = 2; p * p <= v; ++p) {
        if (v % p == 0) {
            v /= p;
            if (v % p == 0) return false;
        }
    }
    return true;
}

inline std::int64_t mod_pos(std::int64_t a, std::int64_t m) {
    const std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

/// d ≡ 1 (mod 4) squarefree, or d = 4m with m squarefree and m ≡ 2, 3 (mod 4).
/// d = 1 (the principal character) is rejected.
inline bool is_fundamental_discriminant(std::int64_t d) {
    if (d == 0 || d == 1) return false;
    if (mod_pos(d, 4) == 1) return is_squarefree(d);
    if (mod_pos(d, 4) != 0) return false;
    const std::int64_t m = d / 4;
    const std::int64_t r = mod_pos(m, 4);
    return (r == 2 || r == 3) && is_squarefree(m);
}

/// Real primitive character χ_Δ(n) = (Δ|n) attached to a fundamental
/// discriminant Δ; the conductor is D = |Δ|. Immutable after construction.
class RealCharacter {
public:
    static constexpr std::int64_t kDefaultCacheThreshold = 10'000;

    explicit RealCharacter(std::int64_t disc,
                           std::int64_t cache_threshold = kDefaultCacheThreshold)
        : disc_(disc), conductor_(disc < 0 ? -disc : disc) {
        if (!is_fundamental_discriminant(disc)) {
            throw DomainError("not a fundamental discriminant: " + std::to_string(disc));
        }
        if (conductor_ <= cache_threshold) {
            auto cache = std::make_shared<std::vector<std::int8_t>>(conductor_);
            for (std::int64_t r = 0; r < conductor_; ++r) {
                (*cache)[static_cast<std::size_t>(r)] =
                    static_cast<std::int8_t>(kronecker(disc_, r == 0 ? conductor_ : r));
            }
            cache_ = std::move(cache);
        }
    }

    std::int64_t disc() const { return disc_; }
    std::int64_t conductor() const { return conductor_; }
    bool cached() const { return cache_ != nullptr; }

    /// χ(n) for n >= 1.
    int operator()(std::int64_t n) const {
        if (n < 1) throw DomainError("chi_eval: n must be >= 1");
        if (cache_) return (*cache_)[static_cast<std::size_t>(n % conductor_)];
        return kronecker(disc_, n);
    }

private:
    std::int64_t disc_;
    std::int64_t conductor_;
    std::shared_ptr<const std::vector<std::int8_t>> cache_;
};

inline int chi_eval(const RealCharacter& chi, std::int64_t n) { return chi(n); }

inline std::string chi_provenance(const RealCharacter& chi, std::int64_t limit) {
    return "chi(disc=" + std::to_string(chi.disc()) + ",x=" + std::to_string(limit) + ")";
}

/// Dense table t[n] = χ(n), 1 <= n <= limit.
inline ArithTable<std::int8_t> chi_table(const RealCharacter& chi, std::int64_t limit) {
    if (limit < 1) throw DomainError("chi_table: limit must be >= 1");
    ArithTable<std::int8_t> t("chi", limit, chi_provenance(chi, limit));
    const std::int64_t D = chi.conductor();
    const std::int64_t period = std::min(limit, D);
    for (std::int64_t n = 1; n <= period; ++n) t[n] = static_cast<std::int8_t>(chi(n));
    for (std::int64_t n = period + 1; n <= limit; ++n) t[n] = t[n - D];
    return t;
}

/// Fundamental discriminants with 3 <= |d| <= limit, ordered by |d| then sign
/// (negative first).
inline std::vector<std::int64_t> fundamental_discriminants(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t m = 3; m <= limit; ++m) {
        if (is_fundamental_discriminant(-m)) out.push_back(-m);
        if (is_fundamental_discriminant(m)) out.push_back(m);
    }
    return out;
}

}  // namespace siegel_lab

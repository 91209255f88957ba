#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "arith_table.hpp"
#include "characters.hpp"
#include "errors.hpp"
#include "sieve.hpp"

namespace siegel_lab {

struct BoundsReport {
    std::string inequality_id;
    double parameter = 0.0;
    double exponent = 0.0;
    double worst_ratio = 0.0;
    std::int64_t worst_n = 0;
    std::int64_t sample_limit = 0;
};

// ---------------------------------------------------------------------------
// Divisor bound τ(n) << sum_{d | n, d <= n^{1/r}} τ(d)^β
// ---------------------------------------------------------------------------

/// β(r) = -log r/log 2 + r (1 + (1 - 1/r) log(1 - 1/r)/log 2).
inline double munshi_beta(double r) {
    if (!(r > 1)) throw DomainError("munshi_beta: r must be > 1");
    const double l2 = std::log(2.0);
    const double s = 1.0 - 1.0 / r;
    return -std::log(r) / l2 + r * (1.0 + s * std::log(s) / l2);
}

/// Smallest integer n with n >= d^r, i.e. d <= n^{1/r}.
inline std::int64_t root_threshold(std::int64_t d, double r) {
    const double p = std::pow(static_cast<double>(d), r);
    const double near = std::round(p);
    if (std::abs(p - near) <= 1e-9 * p) return static_cast<std::int64_t>(near);
    return static_cast<std::int64_t>(std::ceil(p));
}

/// max over 2 <= n <= x of τ(n) / sum_{d | n, d <= n^{1/r}} τ(d)^{β(r)}.
inline BoundsReport munshi_verify(const ArithTable<std::int64_t>& tau, std::int64_t x, double r) {
    if (x < 10) throw DomainError("munshi_verify: x must be >= 10");
    if (!(r > 2)) throw DomainError("munshi_verify: r must be > 2");
    require_limit(tau, x, "munshi_verify");
    const double beta = munshi_beta(r);
    std::vector<double> denom(static_cast<std::size_t>(x) + 1, 0.0);
    for (std::int64_t d = 1;; ++d) {
        const std::int64_t lo = root_threshold(d, r);
        if (lo > x) break;
        const double w = std::pow(static_cast<double>(tau[d]), beta);
        for (std::int64_t n = (lo + d - 1) / d * d; n <= x; n += d) denom[n] += w;
    }
    BoundsReport rep{"munshi", r, beta, 0.0, 0, x};
    for (std::int64_t n = 2; n <= x; ++n) {
        const double ratio = static_cast<double>(tau[n]) / denom[n];
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_n = n;
        }
    }
    return rep;
}

inline BoundsReport munshi_verify(std::int64_t x, double r) {
    return munshi_verify(sieve_tau_k(x, 2), x, r);
}

// ---------------------------------------------------------------------------
// sum_{q~Q} sum_{n ≡ a (q)} f(n) <= sum_n f(n) τ(|n - a|)
// ---------------------------------------------------------------------------

struct TauShiftResult {
    std::int64_t lhs = 0;
    std::int64_t rhs = 0;
    std::int64_t reduced_side = 0;  // sum_{d <= d_limit} τ(d) sum_{n ≡ a (d)} f(n)
    double ratio = 1.0;             // rhs / lhs; 1 when both vanish
    bool holds = false;
};

/// Both sides over 1 <= n <= x, n != a (n = a lies in every progression and
/// has no finite τ(0)), with q ranging over Q < q <= 2Q. f must be nonnegative.
template <typename T>
TauShiftResult tau_shift_bound_demo(const ArithTable<T>& f, const ArithTable<std::int64_t>& tau,
                                    std::int64_t x, std::int64_t a, std::int64_t Q,
                                    std::int64_t d_limit) {
    static_assert(!std::is_floating_point_v<T>, "tau_shift_bound_demo works on integer tables");
    if (!(0 < a && a < x)) throw DomainError("tau_shift_bound_demo: need 0 < a < x");
    if (Q < 1) throw DomainError("tau_shift_bound_demo: Q must be >= 1");
    require_limit(f, x, "tau_shift_bound_demo");
    require_limit(tau, x, "tau_shift_bound_demo");
    TauShiftResult res;
    auto progression = [&](std::int64_t q) {
        std::int64_t s = 0;
        for (std::int64_t n = mod_pos(a - 1, q) + 1; n <= x; n += q) {
            if (n != a) s += static_cast<std::int64_t>(f[n]);
        }
        return s;
    };
    for (std::int64_t q = Q + 1; q <= 2 * Q; ++q) res.lhs += progression(q);
    for (std::int64_t n = 1; n <= x; ++n) {
        if (n == a) continue;
        if (f[n] < 0) throw DomainError("tau_shift_bound_demo: f must be nonnegative");
        res.rhs += static_cast<std::int64_t>(f[n]) * tau[n > a ? n - a : a - n];
    }
    for (std::int64_t d = 1; d <= std::min(d_limit, x); ++d) res.reduced_side += tau[d] * progression(d);
    res.holds = res.lhs <= res.rhs;
    if (res.lhs > 0) {
        res.ratio = static_cast<double>(res.rhs) / static_cast<double>(res.lhs);
    } else if (res.rhs > 0) {
        res.ratio = std::numeric_limits<double>::infinity();
    }
    return res;
}

// ---------------------------------------------------------------------------
// Smooth numbers and the Dickman function
// ---------------------------------------------------------------------------

/// Ψ(x, y) = #{n <= x : every prime factor of n is <= y}.
inline std::int64_t smooth_count(const SpfTable& spf, std::int64_t x, std::int64_t y) {
    if (y < 2 || y > x) throw DomainError("smooth_count: need 2 <= y <= x");
    require_limit(spf.spf, x, "smooth_count");
    // Largest prime factor, built in increasing n from lpf(n / spf(n)).
    std::vector<std::uint32_t> lpf(static_cast<std::size_t>(x) + 1, 0);
    lpf[1] = 1;
    std::int64_t count = 1;
    for (std::int64_t n = 2; n <= x; ++n) {
        const std::uint32_t p = spf[n];
        lpf[n] = std::max(p, lpf[n / p]);
        if (lpf[n] <= y) ++count;
    }
    return count;
}

inline std::int64_t smooth_count(std::int64_t x, std::int64_t y) {
    return smooth_count(sieve_spf(std::max<std::int64_t>(x, 2)), x, y);
}

namespace detail {

/// Power series of ρ on each [k-1, k] in z = k - u:
///   ρ(u) = sum_i c_i^{(k)} z^i,  0 <= z <= 1.
/// Substituting into u ρ'(u) = -ρ(u-1) gives
///   c_{m+1} = (c'_m + m c_m) / (k (m+1))
/// with c' the coefficients of the previous interval, and the integral form
/// k ρ(k) = ∫_{k-1}^{k} ρ yields c_0 = (1/(k-1)) sum_{i>=1} c_i/(i+1).
/// Every coefficient is positive, so nothing cancels as ρ decays.
class DickmanSeries {
public:
    static constexpr int kPieces = 21;  // piece k covers [k-1, k], k = 1..20
    static constexpr int kTerms = 96;

    DickmanSeries() {
        coef_[1].fill(0.0);
        coef_[1][0] = 1.0;
        for (int k = 2; k < kPieces; ++k) {
            const auto& prev = coef_[k - 1];
            auto& cur = coef_[k];
            cur.fill(0.0);
            for (int m = 0; m + 1 < kTerms; ++m) {
                cur[m + 1] = (prev[m] + m * cur[m]) / (static_cast<double>(k) * (m + 1));
            }
            double s = 0.0;
            for (int i = kTerms - 1; i >= 1; --i) s += cur[i] / (i + 1);
            cur[0] = s / (k - 1);
        }
    }

    double operator()(double u) const {
        if (u <= 1.0) return 1.0;
        const int k = static_cast<int>(std::ceil(u));
        const auto& c = coef_[k];
        const double z = k - u;
        double s = 0.0;
        for (int i = kTerms - 1; i >= 0; --i) s = s * z + c[i];
        return s;
    }

private:
    std::array<std::array<double, kTerms>, kPieces> coef_{};
};

}  // namespace detail

/// Dickman–de Bruijn ρ(u) for 0 <= u <= 20.
inline double dickman_rho(double u) {
    if (!(u >= 0)) throw DomainError("dickman_rho: u must be >= 0");
    if (u > 20) throw DomainError("dickman_rho: u must be <= 20");
    static const detail::DickmanSeries series;
    return series(u);
}

// ---------------------------------------------------------------------------
// Divisor sums in progressions
// ---------------------------------------------------------------------------

/// sum_{n <= x, n ≡ a (q)} τ_k(n) / ((x/q) (log x)^{k-1}).
inline double shiu_ratio(const ArithTable<std::int64_t>& tau_k, std::int64_t x, std::int64_t q,
                         std::int64_t a, int k) {
    if (k != 2 && k != 4) throw DomainError("shiu_ratio: k must be 2 or 4");
    if (q < 1 || std::gcd(a, q) != 1) throw DomainError("shiu_ratio: need gcd(a, q) = 1");
    require_limit(tau_k, x, "shiu_ratio");
    std::int64_t s = 0;
    for (std::int64_t n = mod_pos(a - 1, q) + 1; n <= x; n += q) s += tau_k[n];
    const double xd = static_cast<double>(x);
    return static_cast<double>(s) / (xd / static_cast<double>(q) * std::pow(std::log(xd), k - 1));
}

}  // namespace siegel_lab

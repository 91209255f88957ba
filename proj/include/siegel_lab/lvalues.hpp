#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "characters.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace siegel_lab {

enum class LMethod { direct_abel, class_number };

inline const char* to_string(LMethod m) {
    return m == LMethod::direct_abel ? "direct_abel" : "class_number";
}

struct LValueResult {
    double value = 0.0;
    double tail_bound = 0.0;  // |value - L(1,chi)| <= tail_bound
    std::int64_t terms_used = 0;
    LMethod method = LMethod::direct_abel;
};

/// L(1,χ) = sum χ(n)/n.
///
/// Sums m full periods (N = mD terms) directly, then adds the tail
///   sum_{n > N} χ(n)/n = -(1/D) sum_{r=1}^{D} χ(r) digamma(m + r/D)
/// using digamma(z) = log z - 1/(2z) - 1/(12 z^2) + E, |E| <= 1/(120 z^4).
/// With at most D nonzero χ(r), the tail error is <= 1/(120 m^4); m is the
/// smallest count of periods meeting the target. The plain period bound
/// |tail| <= D/N is what the partial sum alone would give.
inline LValueResult l_one(const RealCharacter& chi, double target_error = 1e-10) {
    if (!(target_error >= 1e-12)) throw DomainError("l_one: target_error must be >= 1e-12");
    const std::int64_t D = chi.conductor();
    constexpr double eps = std::numeric_limits<double>::epsilon();

    auto m = static_cast<std::int64_t>(std::ceil(std::pow(1.0 / (60.0 * target_error), 0.25)));
    m = std::max<std::int64_t>(m, 4);
    const std::int64_t N = m * D;
    if (N > budget().max_lvalue_terms) {
        throw NonConvergence("l_one: " + std::to_string(N) + " terms exceeds budget");
    }

    CompensatedSum partial;
    for (std::int64_t n = 1; n <= N; ++n) {
        const int c = chi(n);
        if (c != 0) partial.add(c / static_cast<double>(n));
    }

    CompensatedSum tail;
    const auto md = static_cast<double>(m);
    const auto Dd = static_cast<double>(D);
    for (std::int64_t r = 1; r <= D; ++r) {
        const int c = chi(r);
        if (c == 0) continue;
        const double z = md + static_cast<double>(r) / Dd;
        const double dg = std::log(z) - 0.5 / z - 1.0 / (12.0 * z * z);
        tail.add(-c * dg / Dd);
    }

    LValueResult res;
    res.value = partial.value() + tail.value();
    const double truncation = 1.0 / (120.0 * md * md * md * md);
    // Rounding: compensated sums are good to a few ulps of their magnitude;
    // the tail's log terms cancel from size log(m).
    const double rounding = 8 * eps * (std::log(static_cast<double>(N)) + 1) + 4 * eps * std::log(md + 1);
    res.tail_bound = truncation + rounding;
    res.terms_used = N;
    res.method = LMethod::direct_abel;
    if (res.tail_bound > target_error) {
        throw NonConvergence("l_one: could not reach target error");
    }
    return res;
}

// ---------------------------------------------------------------------------
// Class-number cross-check
// ---------------------------------------------------------------------------

/// h(d) for d < 0 by counting reduced forms (a, b, c): |b| <= a <= c,
/// b >= 0 when |b| = a or a = c.
inline std::int64_t class_number_negative(std::int64_t d) {
    if (d >= 0) throw DomainError("class_number_negative: d must be < 0");
    std::int64_t h = 0;
    for (std::int64_t a = 1; 3 * a * a <= -d; ++a) {
        for (std::int64_t b = -a + 1; b <= a; ++b) {
            if (((b - d) & 1) != 0) continue;
            const std::int64_t num = b * b - d;
            if (num % (4 * a) != 0) continue;
            const std::int64_t c = num / (4 * a);
            if (c < a) continue;
            if (b < 0 && a == c) continue;
            ++h;
        }
    }
    return h;
}

/// Fundamental unit eps = (t + u sqrt(d)) / 2 > 1 of the quadratic order of
/// discriminant d > 0, with its norm.
struct FundamentalUnit {
    double log_eps = 0.0;
    int norm = 1;
};

inline FundamentalUnit fundamental_unit(std::int64_t d) {
    if (d <= 0) throw DomainError("fundamental_unit: d must be > 0");
    using i128 = __int128;
    const long double sd = std::sqrt(static_cast<long double>(d));
    long double best = std::numeric_limits<long double>::infinity();
    int best_norm = 0;
    auto consider = [&](i128 t, i128 u, int norm) {
        const long double e = (static_cast<long double>(t) + static_cast<long double>(u) * sd) / 2;
        if (e > 1 && e < best) {
            best = e;
            best_norm = norm;
        }
    };
    auto check = [&](i128 p, i128 q) {
        const i128 v = p * p - static_cast<i128>(d) * q * q;
        if (v == 4 || v == -4) consider(p, q, v > 0 ? 1 : -1);
        if (v == 1 || v == -1) consider(2 * p, 2 * q, v > 0 ? 1 : -1);
    };
    // Small solutions directly.
    for (std::int64_t u = 1; u <= 64; ++u) {
        for (int s : {-4, 4}) {
            const std::int64_t t2 = d * u * u + s;
            if (t2 <= 0) continue;
            auto t = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(t2))));
            if (t * t == t2) consider(t, u, s > 0 ? 1 : -1);
        }
    }
    // Convergents of sqrt(d).
    const auto a0 = static_cast<std::int64_t>(std::floor(sd));
    std::int64_t P = 0, Q = 1, a = a0;
    i128 p_prev = 1, p = a0, q_prev = 0, q = 1;
    check(p, q);
    for (int it = 0; it < 2000; ++it) {
        P = a * Q - P;
        Q = (d - P * P) / Q;
        a = (a0 + P) / Q;
        const i128 pn = a * p + p_prev, qn = a * q + q_prev;
        p_prev = p;
        q_prev = q;
        p = pn;
        q = qn;
        if (static_cast<long double>(p) > 1e17L) break;
        check(p, q);
        if (best_norm != 0 && static_cast<long double>(q) * sd > 4 * best) break;
    }
    if (best_norm == 0) throw NonConvergence("fundamental_unit: not found for d=" + std::to_string(d));
    return {static_cast<double>(std::log(best)), best_norm};
}

/// Narrow class number h+(d), d > 0, as the number of cycles of reduced
/// indefinite forms under the reduction operator rho.
inline std::int64_t narrow_class_number_positive(std::int64_t d) {
    if (d <= 0) throw DomainError("narrow_class_number_positive: d must be > 0");
    const double sd = std::sqrt(static_cast<double>(d));
    using Form = std::tuple<std::int64_t, std::int64_t, std::int64_t>;
    auto reduced = [&](std::int64_t a, std::int64_t b) {
        return std::abs(sd - 2.0 * std::abs(static_cast<double>(a))) < b && b < sd;
    };
    std::set<Form> forms;
    for (std::int64_t b = 1; static_cast<double>(b) < sd; ++b) {
        if (((b - d) & 1) != 0) continue;
        const std::int64_t ac = (b * b - d) / 4;  // negative
        for (std::int64_t a = 1; a <= -ac; ++a) {
            if ((-ac) % a != 0) continue;
            for (std::int64_t s : {a, -a}) {
                if (reduced(s, b)) forms.emplace(s, b, ac / s);
            }
        }
    }
    auto rho = [&](const Form& f) {
        const auto [a, b, c] = f;
        const std::int64_t ac = std::abs(c);
        // r ≡ -b (mod 2c) in the window prescribed by |c| versus sqrt(d).
        double lo;
        if (static_cast<double>(ac) > sd) {
            lo = -static_cast<double>(ac);
        } else {
            lo = sd - 2.0 * static_cast<double>(ac);
        }
        const std::int64_t m = 2 * ac;
        auto r = static_cast<std::int64_t>(std::floor(lo)) + 1;
        r += mod_pos(-b - r, m);
        return Form{c, r, (r * r - d) / (4 * c)};
    };
    std::set<Form> seen;
    std::int64_t cycles = 0;
    for (const auto& f : forms) {
        if (seen.count(f)) continue;
        ++cycles;
        Form g = f;
        for (std::size_t guard = 0; guard <= forms.size(); ++guard) {
            seen.insert(g);
            g = rho(g);
            if (g == f) break;
        }
    }
    return cycles;
}

/// L(1,χ_d) from the class number formula: 2 pi h / (w sqrt|d|) for d < 0,
/// 2 h log(eps) / sqrt(d) for d > 0.
inline LValueResult l_one_class_number(const RealCharacter& chi) {
    const std::int64_t d = chi.disc();
    LValueResult res;
    res.method = LMethod::class_number;
    const double pi = std::acos(-1.0);
    if (d < 0) {
        const std::int64_t h = class_number_negative(d);
        const int w = d == -3 ? 6 : d == -4 ? 4 : 2;
        res.value = 2 * pi * static_cast<double>(h) / (w * std::sqrt(static_cast<double>(-d)));
    } else {
        const auto unit = fundamental_unit(d);
        std::int64_t h = narrow_class_number_positive(d);
        if (unit.norm == 1) h /= 2;
        res.value = 2 * static_cast<double>(h) * unit.log_eps / std::sqrt(static_cast<double>(d));
    }
    res.tail_bound = 1e-12;
    return res;
}

/// max(L(1,χ), (log x)^(-A)).
inline double curly_l(const RealCharacter& chi, std::int64_t x, double A, double target_error = 1e-10) {
    if (x < 3) throw DomainError("curly_l: x must be >= 3");
    const double floor_value = std::pow(std::log(static_cast<double>(x)), -A);
    return std::max(l_one(chi, target_error).value, floor_value);
}

/// L(1,χ) (log x)^5.
inline double exceptionality_score(double l_one_value, std::int64_t x) {
    if (x < 16) throw DomainError("exceptionality_score: x must be >= 16");
    return l_one_value * std::pow(std::log(static_cast<double>(x)), 5);
}

inline double exceptionality_score(const RealCharacter& chi, std::int64_t x) {
    return exceptionality_score(l_one(chi).value, x);
}

}  // namespace siegel_lab

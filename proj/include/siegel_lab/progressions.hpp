#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "arith_table.hpp"
#include "characters.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "siegel_model.hpp"
#include "sieve.hpp"

namespace siegel_lab {

/// Sum of f(n) over n <= x, n ≡ a (mod q), 1 <= a <= q. Exact for integer
/// tables; compensated and in increasing n otherwise.
template <typename T>
sum_t<T> progression_sum(const ArithTable<T>& f, std::int64_t x, std::int64_t q, std::int64_t a) {
    if (q < 1 || a < 1 || a > q) throw DomainError("progression_sum: need 1 <= a <= q");
    require_limit(f, x, "progression_sum");
    if constexpr (std::is_floating_point_v<T>) {
        CompensatedSum s;
        for (std::int64_t n = a; n <= x; n += q) s.add(f[n]);
        return s.value();
    } else {
        std::int64_t s = 0;
        for (std::int64_t n = a; n <= x; n += q) s += f[n];
        return s;
    }
}

/// Sum of f(n) over n <= x with gcd(n, q) = 1.
template <typename T>
sum_t<T> coprime_sum(const ArithTable<T>& f, std::int64_t x, std::int64_t q) {
    if (q < 1) throw DomainError("coprime_sum: q must be >= 1");
    require_limit(f, x, "coprime_sum");
    if constexpr (std::is_floating_point_v<T>) {
        CompensatedSum s;
        for (std::int64_t n = 1; n <= x; ++n) {
            if (std::gcd(n, q) == 1) s.add(f[n]);
        }
        return s.value();
    } else {
        std::int64_t s = 0;
        for (std::int64_t n = 1; n <= x; ++n) {
            if (std::gcd(n, q) == 1) s += f[n];
        }
        return s;
    }
}

/// Euler's totient by trial division (for moduli, not whole tables).
inline std::int64_t totient(std::int64_t q) {
    if (q < 1) throw DomainError("totient: q must be >= 1");
    std::int64_t result = q;
    for (std::int64_t p = 2; p * p <= q; ++p) {
        if (q % p != 0) continue;
        while (q % p == 0) q /= p;
        result -= result / p;
    }
    if (q > 1) result -= result / q;
    return result;
}

enum class TermSign { minus, plus };

/// χ_D(a D / (D, q)), the character value inside the main term.
inline int main_term_character(const RealCharacter& chi, std::int64_t q, std::int64_t a) {
    const std::int64_t D = chi.conductor();
    if (a < 1) throw DomainError("main_term: residue must be positive");
    return chi(a * (D / std::gcd(D, q)));
}

/// (1 ∓ χ_D(a D/(D,q))) / φ(q).
inline double main_term(const RealCharacter& chi, std::int64_t q, std::int64_t a, TermSign sign) {
    if (q < 1 || std::gcd(a, q) != 1) throw DomainError("main_term: need gcd(a, q) = 1");
    const int c = main_term_character(chi, q, a);
    const double num = sign == TermSign::minus ? 1.0 - c : 1.0 + c;
    return num / static_cast<double>(totient(q));
}

inline double chebyshev_psi(const ArithTable<double>& vonmangoldt, std::int64_t x) {
    require_limit(vonmangoldt, x, "chebyshev_psi");
    CompensatedSum s;
    for (std::int64_t n = 1; n <= x; ++n) s.add(vonmangoldt[n]);
    return s.value();
}

inline double chebyshev_psi(std::int64_t x) {
    if (x < 1) throw DomainError("chebyshev_psi: x must be >= 1");
    if (x == 1) return 0.0;
    return chebyshev_psi(sieve_vonmangoldt(x), x);
}

/// Residues 1 <= a <= q with gcd(a, q) = 1 (a = 1 when q = 1).
inline std::vector<std::int64_t> coprime_residues(std::int64_t q) {
    std::vector<std::int64_t> out;
    for (std::int64_t a = 1; a <= q; ++a) {
        if (std::gcd(a, q) == 1) out.push_back(a);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ProgressionReport {
    std::int64_t q = 0;
    std::int64_t a = 0;
    int chi_a = 0;           // χ_D(a D/(D,q))
    double psi_xqa = 0.0;
    double s_prime = 0.0;    // sum of λ'
    double s_plain = 0.0;    // sum of λ
    double s_w_prime = 0.0;  // sum of λ'_W
    double predicted = 0.0;  // main_term(minus) ψ(x)
    double discrepancy = 0.0;
    std::string normalization = "main_term_minus*psi(x)";
};

struct DiscrepancyStats {
    double max_abs = 0.0;
    double l1 = 0.0;
    std::int64_t exceptional_count = 0;
    std::int64_t total_residues = 0;
    SiegelParams params;
};

/// Tables needed for a progression scan at one (χ, x, R).
struct ProgressionTables {
    const ArithTable<double>& vonmangoldt;
    const ArithTable<std::int64_t>& lambda;
    const ArithTable<double>& lambda_prime;
    const ArithTable<double>& lambda_w_prime;
};

/// x/q e^{-α log x/(24 log R)} + x log^5 x 𝓛/φ(q) + R log^2 x.
inline double error_scale_e(const SiegelParams& p, std::int64_t q, double curly) {
    const double x = static_cast<double>(p.x);
    const double lx = std::log(x);
    const double lr = std::log(static_cast<double>(p.R));
    return x / static_cast<double>(q) * std::exp(-p.alpha * lx / (24 * lr)) +
           x * std::pow(lx, 5) * curly / static_cast<double>(totient(q)) +
           static_cast<double>(p.R) * lx * lx;
}

/// sqrt(x) < q < D^{-1} x^{2/3 - 3α}.
inline bool in_theorem_window(const SiegelParams& p, std::int64_t q, std::int64_t D) {
    const double x = static_cast<double>(p.x);
    const double qq = static_cast<double>(q);
    return std::sqrt(x) < qq && qq < std::pow(x, 2.0 / 3.0 - 3 * p.alpha) / static_cast<double>(D);
}

struct Theorem1Result {
    DiscrepancyStats stats;
    std::vector<ProgressionReport> rows;
    std::int64_t q = 0;
    double psi_x = 0.0;
    double curly_l = 0.0;
    double error_scale = 0.0;
    std::int64_t literal_c_count = 0;  // #{a : ψ(x,q,a) <= (1-h) x/φ(q)}
    bool in_window = false;
};

/// Upper-bound scan over every residue a coprime to q: ψ(x,q,a) against
/// main_term(minus) ψ(x). A residue is exceptional when
/// ψ(x,q,a) < (1-h) * predicted.
inline Theorem1Result theorem1_scan(const SiegelParams& params, std::int64_t q,
                                    const RealCharacter& chi, const ProgressionTables& tables,
                                    double curly, int threads = default_threads()) {
    params.validate();
    if (q < 1 || q > params.x) throw DomainError("theorem1_scan: need 1 <= q <= x");
    const std::int64_t x = params.x;
    Theorem1Result out;
    out.q = q;
    out.psi_x = chebyshev_psi(tables.vonmangoldt, x);
    out.curly_l = curly;
    out.error_scale = error_scale_e(params, q, curly);
    out.in_window = in_theorem_window(params, q, chi.conductor());

    const auto residues = coprime_residues(q);
    out.rows.resize(residues.size());
    parallel_chunks(
        0, static_cast<std::int64_t>(residues.size()), 1,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                const std::int64_t a = residues[i];
                ProgressionReport r;
                r.q = q;
                r.a = a;
                r.chi_a = main_term_character(chi, q, a);
                r.psi_xqa = progression_sum(tables.vonmangoldt, x, q, a);
                r.s_prime = progression_sum(tables.lambda_prime, x, q, a);
                r.s_plain = static_cast<double>(progression_sum(tables.lambda, x, q, a));
                r.s_w_prime = progression_sum(tables.lambda_w_prime, x, q, a);
                r.predicted = main_term(chi, q, a, TermSign::minus) * out.psi_x;
                r.discrepancy = r.psi_xqa - r.predicted;
                out.rows[i] = r;
            }
        },
        threads);

    auto& st = out.stats;
    st.params = params;
    st.total_residues = static_cast<std::int64_t>(out.rows.size());
    const double phi = static_cast<double>(totient(q));
    for (const auto& r : out.rows) {
        st.max_abs = std::max(st.max_abs, std::abs(r.discrepancy));
        st.l1 += std::abs(r.discrepancy);
        if (r.psi_xqa < (1 - params.h) * r.predicted) ++st.exceptional_count;
        if (r.psi_xqa <= (1 - params.h) * static_cast<double>(x) / phi) ++out.literal_c_count;
    }
    return out;
}

/// Mean ψ(x,q,a) over residues with χ value -1 and +1.
struct BiasMeans {
    double mean_minus = 0.0;
    double mean_plus = 0.0;
    std::int64_t count_minus = 0;
    std::int64_t count_plus = 0;
};

inline BiasMeans bias_means(const std::vector<ProgressionReport>& rows) {
    BiasMeans b;
    for (const auto& r : rows) {
        if (r.chi_a == -1) {
            b.mean_minus += r.psi_xqa;
            ++b.count_minus;
        } else if (r.chi_a == 1) {
            b.mean_plus += r.psi_xqa;
            ++b.count_plus;
        }
    }
    if (b.count_minus) b.mean_minus /= static_cast<double>(b.count_minus);
    if (b.count_plus) b.mean_plus /= static_cast<double>(b.count_plus);
    return b;
}

struct Theorem2Row {
    std::int64_t q = 0;
    std::int64_t residue = 0;  // a mod q
    double psi_xqa = 0.0;
    double expected = 0.0;     // ψ(x)/φ(q)
    double abs_dev = 0.0;
};

struct Theorem2Result {
    double aggregate = 0.0;
    double bound_scale = 0.0;
    double psi_x = 0.0;
    std::vector<Theorem2Row> rows;
};

/// sum over Q < q <= 2Q with gcd(a, q) = 1 of |ψ(x,q,a) - ψ(x)/φ(q)|.
/// a may be negative or exceed q; it is reduced per modulus.
inline Theorem2Result theorem2_aggregate(const SiegelParams& params, std::int64_t a,
                                         const ArithTable<double>& vonmangoldt, double l_one_value,
                                         int threads = default_threads()) {
    if (params.Q < 2) throw DomainError("theorem2_aggregate: Q must be >= 2");
    if (a == 0) throw DomainError("theorem2_aggregate: a must be nonzero");
    const std::int64_t x = params.x;
    Theorem2Result out;
    out.psi_x = chebyshev_psi(vonmangoldt, x);

    std::vector<std::int64_t> moduli;
    for (std::int64_t q = params.Q + 1; q <= 2 * params.Q; ++q) {
        if (std::gcd(a, q) == 1) moduli.push_back(q);
    }
    out.rows.resize(moduli.size());
    parallel_chunks(
        0, static_cast<std::int64_t>(moduli.size()), 64,
        [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                const std::int64_t q = moduli[i];
                Theorem2Row r;
                r.q = q;
                r.residue = mod_pos(a, q);
                r.psi_xqa = progression_sum(vonmangoldt, x, q, r.residue);
                r.expected = out.psi_x / static_cast<double>(totient(q));
                r.abs_dev = std::abs(r.psi_xqa - r.expected);
                out.rows[i] = r;
            }
        },
        threads);
    CompensatedSum total;
    for (const auto& r : out.rows) total.add(r.abs_dev);
    out.aggregate = total.value();

    const double xd = static_cast<double>(x);
    const double lx = std::log(xd);
    out.bound_scale = xd * std::exp(-params.alpha * lx / (24 * std::log(static_cast<double>(params.R)))) +
                      xd * std::pow(lx, 5) * l_one_value + static_cast<double>(params.R) * lx * lx;
    return out;
}

// ---------------------------------------------------------------------------
// Discrepancy profiles for λ, λ', λ'_R, λ'_W
// ---------------------------------------------------------------------------

struct ProfileEntry {
    std::int64_t a = 0;
    int chi_a = 0;
    double observed = 0.0;   // S_f(x,q,a)
    double predicted = 0.0;  // main_term(sign) * S_f(x,q)
    double discrepancy = 0.0;
};

struct DiscrepancyProfile {
    std::vector<ProfileEntry> entries;
    double coprime_total = 0.0;   // S_f(x,q)
    double residue_total = 0.0;   // sum over a of S_f(x,q,a)
    double reference_scale = 0.0; // (Dq)^{1/2+α} (+ R/W terms when requested)
};

struct ProfileScale {
    double alpha = 0.001;
    bool rough_terms = false;  // add x log^5 x 𝓛/φ(q) + x/q e^{-α log x/(24 log R)}
    double curly = 0.0;
    std::int64_t R = 2;
};

template <typename T>
DiscrepancyProfile lemma_discrepancy_profile(const ArithTable<T>& f, const RealCharacter& chi,
                                             std::int64_t x, std::int64_t q, TermSign sign,
                                             const ProfileScale& scale = {}) {
    require_limit(f, x, "lemma_discrepancy_profile");
    DiscrepancyProfile out;
    out.coprime_total = static_cast<double>(coprime_sum(f, x, q));
    CompensatedSum residue_total;
    for (const std::int64_t a : coprime_residues(q)) {
        ProfileEntry e;
        e.a = a;
        e.chi_a = main_term_character(chi, q, a);
        e.observed = static_cast<double>(progression_sum(f, x, q, a));
        e.predicted = main_term(chi, q, a, sign) * out.coprime_total;
        e.discrepancy = e.observed - e.predicted;
        residue_total.add(e.observed);
        out.entries.push_back(e);
    }
    out.residue_total = residue_total.value();
    const double dq = static_cast<double>(chi.conductor()) * static_cast<double>(q);
    out.reference_scale = std::pow(dq, 0.5 + scale.alpha);
    if (scale.rough_terms) {
        const double xd = static_cast<double>(x);
        const double lx = std::log(xd);
        out.reference_scale += xd * std::pow(lx, 5) * scale.curly / static_cast<double>(totient(q)) +
                               xd / static_cast<double>(q) *
                                   std::exp(-scale.alpha * lx / (24 * std::log(static_cast<double>(scale.R))));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Finite upper bound ψ(x,q,a) <= S'_W(x,q,a) + correction
// ---------------------------------------------------------------------------

struct PsiUpperBound {
    double psi = 0.0;
    double s_w_prime = 0.0;
    /// Λ(n) over prime powers n ≡ a (q) that are not primes above R.
    double correction_tight = 0.0;
    /// Λ(p^k) over all p^k <= x with p <= R, p | q, or k >= 2.
    double correction_global = 0.0;
    bool holds = false;
};

/// Exact form of the bound: primes p > R have λ'_W(p) = log p = Λ(p), every
/// other λ'_W term is nonnegative, so only prime powers p^k with p <= R or
/// k >= 2 can push ψ(x,q,a) above S'_W(x,q,a).
inline double small_prime_power_correction(const ArithTable<double>& vonmangoldt,
                                           const SpfTable& spf, std::int64_t x, std::int64_t q,
                                           std::int64_t R) {
    CompensatedSum s;
    for (std::int64_t n = 2; n <= x; ++n) {
        if (vonmangoldt[n] == 0.0) continue;
        const std::int64_t p = spf[n];
        if (p <= R || n != p || q % p == 0) s.add(vonmangoldt[n]);
    }
    return s.value();
}

inline PsiUpperBound psi_upper_bound(const ArithTable<double>& vonmangoldt,
                                     const ArithTable<double>& lambda_w_prime, const SpfTable& spf,
                                     std::int64_t x, std::int64_t q, std::int64_t a, std::int64_t R,
                                     double global_correction) {
    PsiUpperBound b;
    b.psi = progression_sum(vonmangoldt, x, q, a);
    b.s_w_prime = progression_sum(lambda_w_prime, x, q, a);
    CompensatedSum tight;
    for (std::int64_t n = a; n <= x; n += q) {
        if (vonmangoldt[n] == 0.0) continue;
        const std::int64_t p = spf.smallest_prime(n);
        if (p <= R || n != p) tight.add(vonmangoldt[n]);
    }
    b.correction_tight = tight.value();
    b.correction_global = global_correction;
    const double slack = 1e-9 * std::max(1.0, b.psi);
    b.holds = b.psi <= b.s_w_prime + b.correction_tight + slack &&
              b.correction_tight <= b.correction_global + slack;
    return b;
}

}  // namespace siegel_lab

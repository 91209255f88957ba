#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "siegel_lab.hpp"

namespace siegel_lab {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { sieve, identities, lvalue, theorem1, theorem2, bounds, scan_discriminants };

inline const std::map<std::string, Command>& command_names() {
    static const std::map<std::string, Command> names{
        {"sieve", Command::sieve},       {"identities", Command::identities},
        {"lvalue", Command::lvalue},     {"theorem1", Command::theorem1},
        {"theorem2", Command::theorem2}, {"bounds", Command::bounds},
        {"scan-discriminants", Command::scan_discriminants}};
    return names;
}

inline std::string to_string(Command c) {
    for (const auto& [name, cmd] : command_names()) {
        if (cmd == c) return name;
    }
    return "?";
}

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    Command command = Command::identities;
    SiegelParams params;
    std::int64_t q = 163;
    std::int64_t a = 1;
    double r = 3.0;
    std::int64_t limit = 200;  // scan-discriminants range
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir;  // empty: no table cache
    int threads = 1;
    std::int64_t x_cap = 100'000'000;
};

/// Applies one key/value pair. Keys mirror the SiegelParams field names.
inline void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto as_int = [&]() -> std::int64_t {
        std::size_t pos = 0;
        std::int64_t v = 0;
        try {
            // Accept 1e6-style integers.
            if (value.find_first_of("eE.") != std::string::npos) {
                const double d = std::stod(value, &pos);
                v = static_cast<std::int64_t>(d);
                if (static_cast<double>(v) != d) throw ConfigError("");
            } else {
                v = std::stoll(value, &pos);
            }
        } catch (const std::exception&) {
            throw ConfigError("bad integer for '" + key + "': " + value);
        }
        if (pos != value.size()) throw ConfigError("bad integer for '" + key + "': " + value);
        return v;
    };
    auto as_real = [&]() -> double {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(value, &pos);
        } catch (const std::exception&) {
            throw ConfigError("bad number for '" + key + "': " + value);
        }
        if (pos != value.size()) throw ConfigError("bad number for '" + key + "': " + value);
        return v;
    };
    if (key == "command") {
        const auto it = command_names().find(value);
        if (it == command_names().end()) throw ConfigError("unknown command: " + value);
        cfg.command = it->second;
    } else if (key == "x") {
        cfg.params.x = as_int();
    } else if (key == "disc") {
        cfg.params.disc = as_int();
    } else if (key == "R") {
        cfg.params.R = as_int();
    } else if (key == "A") {
        cfg.params.A = as_real();
    } else if (key == "alpha") {
        cfg.params.alpha = as_real();
    } else if (key == "h") {
        cfg.params.h = as_real();
    } else if (key == "Q") {
        cfg.params.Q = as_int();
    } else if (key == "q") {
        cfg.q = as_int();
    } else if (key == "a") {
        cfg.a = as_int();
    } else if (key == "r") {
        cfg.r = as_real();
    } else if (key == "limit") {
        cfg.limit = as_int();
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(as_int());
    } else if (key == "out") {
        cfg.output_dir = value;
    } else if (key == "cache") {
        cfg.cache_dir = value;
    } else if (key == "x_cap") {
        cfg.x_cap = as_int();
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

/// Flat "key = value" lines; '#' starts a comment.
inline void parse_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

inline void parse_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    parse_config_text(cfg, ss.str());
}

inline void validate(const RunConfig& cfg) {
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    if (cfg.params.x < 1) throw ConfigError("x must be >= 1");
    if (cfg.params.x > cfg.x_cap) {
        throw CapacityError("x = " + std::to_string(cfg.params.x) + " exceeds hard cap " +
                            std::to_string(cfg.x_cap));
    }
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// Floating values in reports: 12 significant digits.
inline std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) { row(header); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

/// Rounds reals to the report precision so JSON payloads are stable.
inline double stable(double v) { return std::stod(fmt_real(v)); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

// ---------------------------------------------------------------------------
// Table cache and phase timing
// ---------------------------------------------------------------------------

class RunContext {
public:
    explicit RunContext(const RunConfig& cfg) : cfg_(cfg) {}

    /// Loads a table from the cache directory (keyed by provenance hash) or
    /// builds and stores it.
    template <typename T>
    ArithTable<T> table(const std::string& provenance, const std::function<ArithTable<T>()>& build) {
        const auto hash = fnv1a64(provenance);
        provenance_hashes_[provenance] = hex64(hash);
        if (!cfg_.cache_dir.empty()) {
            const auto path = cfg_.cache_dir / (hex64(hash) + ".sltb");
            if (auto t = load_table<T>(path, provenance)) {
                ++cache_hits_;
                return std::move(*t);
            }
            auto t = build();
            t.provenance = provenance;
            save_table(t, path);
            return t;
        }
        auto t = build();
        t.provenance = provenance;
        return t;
    }

    SpfTable spf(std::int64_t x) {
        const auto n = std::max<std::int64_t>(x, 2);
        return SpfTable{table<std::uint32_t>("spf(x=" + std::to_string(n) + ")",
                                             [&] { return sieve_spf(n, {std::int64_t{1} << 18, cfg_.threads}).spf; })};
    }

    template <typename Fn>
    auto phase(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(name, t0);
        } else {
            auto result = fn();
            record(name, t0);
            return result;
        }
    }

    const std::map<std::string, std::string>& provenance_hashes() const { return provenance_hashes_; }
    const std::vector<std::pair<std::string, double>>& phases() const { return phases_; }
    int cache_hits() const { return cache_hits_; }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        phases_.emplace_back(name, dt.count());
    }

    const RunConfig& cfg_;
    std::map<std::string, std::string> provenance_hashes_;
    std::vector<std::pair<std::string, double>> phases_;
    int cache_hits_ = 0;
};

/// Everything except "execution" is a pure function of the experiment
/// config; "execution" holds threads, paths, cache hits and wall times.
struct RunManifest {
    nlohmann::json config;
    nlohmann::json execution;
    std::string version = kVersion;
    std::map<std::string, std::string> table_hashes;
    std::vector<std::pair<std::string, double>> phase_seconds;
    nlohmann::json summary;
    std::string report_csv;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = config;
        j["version"] = version;
        j["tables"] = table_hashes;
        j["summary"] = summary;
        nlohmann::json phases = nlohmann::json::array();
        for (const auto& [name, sec] : phase_seconds) phases.push_back({{"phase", name}, {"seconds", sec}});
        j["execution"] = execution;
        j["execution"]["timing"] = phases;
        return j;
    }
};

inline nlohmann::json params_json(const SiegelParams& p) {
    return {{"x", p.x}, {"disc", p.disc}, {"R", p.R}, {"A", p.A},
            {"alpha", p.alpha}, {"h", p.h}, {"Q", p.Q}};
}

inline nlohmann::json config_json(const RunConfig& c) {
    return {{"command", to_string(c.command)}, {"params", params_json(c.params)},
            {"q", c.q}, {"a", c.a}, {"r", c.r}, {"limit", c.limit}, {"x_cap", c.x_cap}};
}

inline nlohmann::json execution_json(const RunConfig& c, int cache_hits) {
    return {{"threads", c.threads}, {"out", c.output_dir.string()}, {"cache", c.cache_dir.string()},
            {"cache_hits", cache_hits}};
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct RankedDiscriminant {
    std::int64_t disc = 0;
    std::int64_t conductor = 0;
    double l_one = 0.0;
    double score = 0.0;
};

/// Fundamental discriminants 3 <= |d| <= limit ranked by L(1,χ_d)(log x)^5,
/// most exceptional (smallest) first.
inline std::vector<RankedDiscriminant> scan_discriminants(std::int64_t limit, std::int64_t x) {
    if (limit < 3) throw DomainError("scan_discriminants: limit must be >= 3");
    std::vector<RankedDiscriminant> out;
    for (const auto d : fundamental_discriminants(limit)) {
        const RealCharacter chi(d);
        const double l = l_one(chi, 1e-10).value;
        out.push_back({d, chi.conductor(), l, exceptionality_score(l, std::max<std::int64_t>(x, 16))});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.score < b.score; });
    return out;
}

namespace detail {

struct Payload {
    std::string csv;
    nlohmann::json summary;
};

inline Payload run_sieve(const RunConfig& cfg, RunContext& ctx) {
    const std::int64_t x = cfg.params.x;
    const auto spf = ctx.phase("spf", [&] { return ctx.spf(x); });
    const int th = cfg.threads;
    const std::string xs = std::to_string(x);
    auto mu = ctx.phase("mu", [&] {
        return ctx.table<std::int8_t>("mu(x=" + xs + ")", [&] { return sieve_mu(spf, x, th); });
    });
    auto lam = ctx.phase("Lambda", [&] {
        return ctx.table<double>("Lambda(x=" + xs + ")", [&] { return sieve_vonmangoldt(spf, x, th); });
    });
    auto phi = ctx.phase("phi", [&] {
        return ctx.table<std::int64_t>("phi(x=" + xs + ")", [&] { return sieve_totient(spf, x, th); });
    });
    auto tau = ctx.phase("tau", [&] {
        return ctx.table<std::int64_t>("tau(x=" + xs + ")", [&] { return sieve_tau_k(spf, x, 2, th); });
    });
    auto tau4 = ctx.phase("tau_4", [&] {
        return ctx.table<std::int64_t>("tau_4(x=" + xs + ")", [&] { return sieve_tau_k(spf, x, 4, th); });
    });

    CsvWriter csv({"function", "limit", "value_kind", "provenance_hash", "sum", "nonzero"});
    nlohmann::json summary;
    auto emit = [&](const auto& t) {
        sum_t<typename std::decay_t<decltype(t)>::value_type> s{};
        std::int64_t nz = 0;
        CompensatedSum cs;
        for (std::int64_t n = 1; n <= t.limit; ++n) {
            if constexpr (std::is_floating_point_v<typename std::decay_t<decltype(t)>::value_type>) {
                cs.add(t[n]);
            } else {
                s += t[n];
            }
            nz += t[n] != 0;
        }
        std::string sum_text;
        if constexpr (std::is_floating_point_v<typename std::decay_t<decltype(t)>::value_type>) {
            sum_text = fmt_real(cs.value());
            summary[t.name] = {{"sum", stable(cs.value())}, {"nonzero", nz}};
        } else {
            sum_text = std::to_string(s);
            summary[t.name] = {{"sum", s}, {"nonzero", nz}};
        }
        csv.row({t.name, std::to_string(t.limit), std::string(to_string(t.kind)),
                 hex64(t.provenance_hash()), sum_text, std::to_string(nz)});
    };
    std::int64_t spf_sum = 0;
    for (std::int64_t n = 2; n <= x; ++n) spf_sum += spf[n];
    csv.row({"spf", std::to_string(spf.limit()), "integer", hex64(spf.spf.provenance_hash()),
             std::to_string(spf_sum), std::to_string(std::max<std::int64_t>(x - 1, 0))});
    emit(mu);
    emit(lam);
    emit(phi);
    emit(tau);
    emit(tau4);
    summary["x"] = x;
    summary["psi_x"] = stable(chebyshev_psi(lam, x));
    return {csv.str(), summary};
}

struct CharacterTables {
    SpfTable spf;
    ArithTable<std::int8_t> mu;
    ArithTable<double> vonmangoldt;
    ArithTable<std::int64_t> lambda;
    ArithTable<double> lambda_prime;
};

inline CharacterTables character_tables(const RunConfig& cfg, RunContext& ctx, const RealCharacter& chi,
                                        std::int64_t x) {
    const int th = cfg.threads;
    const std::string xs = std::to_string(x);
    const std::string ds = std::to_string(chi.disc());
    auto spf = ctx.phase("spf", [&] { return ctx.spf(x); });
    auto mu = ctx.phase("mu", [&] {
        return ctx.table<std::int8_t>("mu(x=" + xs + ")", [&] { return sieve_mu(spf, x, th); });
    });
    auto lam = ctx.phase("Lambda", [&] {
        return ctx.table<double>("Lambda(x=" + xs + ")", [&] { return sieve_vonmangoldt(spf, x, th); });
    });
    auto lambda = ctx.phase("lambda", [&] {
        return ctx.table<std::int64_t>("lambda(disc=" + ds + ",x=" + xs + ")",
                                       [&] { return build_lambda(chi, x, th); });
    });
    auto lambda_prime = ctx.phase("lambda_prime", [&] {
        return ctx.table<double>("lambda_prime(disc=" + ds + ",x=" + xs + ")",
                                 [&] { return build_lambda_prime(chi, x, th); });
    });
    return {std::move(spf), std::move(mu), std::move(lam), std::move(lambda), std::move(lambda_prime)};
}

inline Payload run_identities(const RunConfig& cfg, RunContext& ctx) {
    const std::int64_t x = cfg.params.x;
    const RealCharacter chi(cfg.params.disc);
    auto t = character_tables(cfg, ctx, chi, x);
    const std::string xs = std::to_string(x);
    const std::string ds = std::to_string(chi.disc());
    auto nu = ctx.phase("nu", [&] {
        return ctx.table<std::int64_t>("nu(disc=" + ds + ",x=" + xs + ")",
                                       [&] { return build_nu(chi, t.mu, x, cfg.threads); });
    });
    const double tol = 1e-8 * std::log(static_cast<double>(std::max<std::int64_t>(x, 3)));
    const double dev_lambda = ctx.phase("identity_lambda_prime_nu", [&] {
        return verify_vonmangoldt_identity(t.lambda_prime, nu, t.vonmangoldt, x, cfg.threads);
    });
    const double dev_second = ctx.phase("identity_lambda_Lambda", [&] {
        return max_abs_difference(dirichlet_convolve(t.lambda, t.vonmangoldt, x, "", cfg.threads),
                                  t.lambda_prime, x);
    });
    const std::int64_t split_limit = std::min<std::int64_t>(x, 100'000);
    const double dev_split = ctx.phase("lemma_split", [&] {
        return lemma_split_deviation(t.lambda, t.lambda_prime, split_limit);
    });
    const auto sq_bad = ctx.phase("lemma_square_split", [&] {
        return lemma_square_split_violations(t.lambda, t.spf, x);
    });
    const auto nu_bad = nu_bound_violations(nu, t.lambda, x);
    const double l = l_one(chi).value;
    const double mean_c = mean_value_constant(t.lambda, x, l, chi.conductor());
    const double log_ratio = log_mean_ratio(t.lambda, x, l, chi.conductor());

    CsvWriter csv({"check", "value", "tolerance", "pass"});
    auto row = [&](const std::string& name, double v, double tolerance, bool pass) {
        csv.row({name, fmt_real(v), fmt_real(tolerance), pass ? "true" : "false"});
    };
    row("Lambda_eq_lambda_prime_conv_nu", dev_lambda, tol, dev_lambda < tol);
    row("lambda_prime_eq_lambda_conv_Lambda", dev_second, tol, dev_second < tol);
    row("lemma_split_coprime", dev_split, 1e-8, dev_split < 1e-8);
    row("lemma_square_split_violations", static_cast<double>(sq_bad), 0, sq_bad == 0);
    row("nu_bounded_by_lambda_violations", static_cast<double>(nu_bad), 0, nu_bad == 0);
    row("mean_value_constant", mean_c, 0, true);
    row("log_mean_ratio", log_ratio, 0, true);

    nlohmann::json s;
    s["disc"] = chi.disc();
    s["x"] = x;
    s["tolerance"] = stable(tol);
    s["max_deviation"] = stable(std::max(dev_lambda, dev_second));
    s["Lambda_eq_lambda_prime_conv_nu"] = stable(dev_lambda);
    s["lambda_prime_eq_lambda_conv_Lambda"] = stable(dev_second);
    s["lemma_split_deviation"] = stable(dev_split);
    s["lemma_split_limit"] = split_limit;
    s["lemma_square_split_violations"] = sq_bad;
    s["nu_bound_violations"] = nu_bad;
    s["l_one"] = stable(l);
    s["mean_value_constant"] = stable(mean_c);
    s["log_mean_ratio"] = stable(log_ratio);
    s["pass"] = dev_lambda < tol && dev_second < tol && dev_split < 1e-8 && sq_bad == 0 && nu_bad == 0;
    return {csv.str(), s};
}

inline Payload run_lvalue(const RunConfig& cfg, RunContext& ctx) {
    const RealCharacter chi(cfg.params.disc);
    const auto direct = ctx.phase("l_one", [&] { return l_one(chi, 1e-10); });
    const auto cls = ctx.phase("class_number", [&] { return l_one_class_number(chi); });
    const std::int64_t x = std::max<std::int64_t>(cfg.params.x, 16);
    const double curly = std::max(direct.value, std::pow(std::log(static_cast<double>(x)), -cfg.params.A));
    const double score = exceptionality_score(direct.value, x);

    CsvWriter csv({"disc", "method", "value", "tail_bound", "terms_used"});
    for (const auto& r : {direct, cls}) {
        csv.row({std::to_string(chi.disc()), to_string(r.method), fmt_real(r.value), fmt_real(r.tail_bound),
                 std::to_string(r.terms_used)});
    }
    nlohmann::json s;
    s["disc"] = chi.disc();
    s["conductor"] = chi.conductor();
    s["l_one"] = stable(direct.value);
    s["tail_bound"] = stable(direct.tail_bound);
    s["class_number_value"] = stable(cls.value);
    s["curly_l"] = stable(curly);
    s["exceptionality_score"] = stable(score);
    s["x"] = x;
    return {csv.str(), s};
}

inline Payload run_theorem1(const RunConfig& cfg, RunContext& ctx) {
    const auto& p = cfg.params;
    p.validate();
    if (cfg.q < 1 || cfg.q > p.x) {
        throw DomainError("theorem1: q = " + std::to_string(cfg.q) + " must satisfy 1 <= q <= x");
    }
    const RealCharacter chi(p.disc);
    auto t = character_tables(cfg, ctx, chi, std::max<std::int64_t>(p.x, 2));
    const auto w = ctx.phase("siegel_tables", [&] {
        return squarefree_restrict(rough_restrict(t.lambda_prime, t.spf, p.R), t.mu);
    });
    const double curly = curly_l(chi, std::max<std::int64_t>(p.x, 3), p.A);
    const ProgressionTables tabs{t.vonmangoldt, t.lambda, t.lambda_prime, w};
    const auto res = ctx.phase("scan", [&] { return theorem1_scan(p, cfg.q, chi, tabs, curly, cfg.threads); });
    const double correction = small_prime_power_correction(t.vonmangoldt, t.spf, p.x, cfg.q, p.R);
    std::int64_t bound_failures = 0;
    for (const auto& r : res.rows) {
        const auto b = psi_upper_bound(t.vonmangoldt, w, t.spf, p.x, cfg.q, r.a, p.R, correction);
        if (!b.holds) ++bound_failures;
    }
    const auto bias = bias_means(res.rows);

    CsvWriter csv({"q", "a", "chi_a", "psi", "s_prime", "s_w_prime", "predicted", "discrepancy"});
    for (const auto& r : res.rows) {
        csv.row({std::to_string(r.q), std::to_string(r.a), std::to_string(r.chi_a), fmt_real(r.psi_xqa),
                 fmt_real(r.s_prime), fmt_real(r.s_w_prime), fmt_real(r.predicted), fmt_real(r.discrepancy)});
    }
    nlohmann::json s;
    s["params"] = params_json(p);
    s["q"] = cfg.q;
    s["psi_x"] = stable(res.psi_x);
    s["stats"] = {{"max_abs", stable(res.stats.max_abs)},
                  {"l1", stable(res.stats.l1)},
                  {"exceptional_count", res.stats.exceptional_count},
                  {"total_residues", res.stats.total_residues}};
    s["literal_c_count"] = res.literal_c_count;
    s["error_scale_E"] = stable(res.error_scale);
    s["curly_l"] = stable(res.curly_l);
    s["in_theorem_window"] = res.in_window;
    s["psi_upper_bound_correction"] = stable(correction);
    s["psi_upper_bound_failures"] = bound_failures;
    s["bias"] = {{"mean_chi_minus", stable(bias.mean_minus)},
                 {"mean_chi_plus", stable(bias.mean_plus)},
                 {"count_minus", bias.count_minus},
                 {"count_plus", bias.count_plus}};
    return {csv.str(), s};
}

inline Payload run_theorem2(const RunConfig& cfg, RunContext& ctx) {
    const auto& p = cfg.params;
    const RealCharacter chi(p.disc);
    const std::int64_t x = std::max<std::int64_t>(p.x, 2);
    const auto spf = ctx.phase("spf", [&] { return ctx.spf(x); });
    const auto lam = ctx.phase("Lambda", [&] {
        return ctx.table<double>("Lambda(x=" + std::to_string(x) + ")",
                                 [&] { return sieve_vonmangoldt(spf, x, cfg.threads); });
    });
    const double l = l_one(chi).value;
    const auto res = ctx.phase("aggregate", [&] { return theorem2_aggregate(p, cfg.a, lam, l, cfg.threads); });
    CsvWriter csv({"q", "residue", "psi", "expected", "abs_dev"});
    for (const auto& r : res.rows) {
        csv.row({std::to_string(r.q), std::to_string(r.residue), fmt_real(r.psi_xqa), fmt_real(r.expected),
                 fmt_real(r.abs_dev)});
    }
    const double lx = std::log(static_cast<double>(p.x));
    nlohmann::json s;
    s["params"] = params_json(p);
    s["a"] = cfg.a;
    s["moduli"] = res.rows.size();
    s["aggregate"] = stable(res.aggregate);
    s["bound_scale"] = stable(res.bound_scale);
    s["psi_x"] = stable(res.psi_x);
    s["l_one"] = stable(l);
    s["aggregate_over_x_L_log5"] = stable(res.aggregate / (static_cast<double>(p.x) * l * std::pow(lx, 5)));
    return {csv.str(), s};
}

inline Payload run_bounds(const RunConfig& cfg, RunContext& ctx) {
    const std::int64_t x = std::max<std::int64_t>(cfg.params.x, 10);
    const std::string xs = std::to_string(x);
    const auto spf = ctx.phase("spf", [&] { return ctx.spf(x); });
    const auto tau = ctx.phase("tau", [&] {
        return ctx.table<std::int64_t>("tau(x=" + xs + ")", [&] { return sieve_tau_k(spf, x, 2, cfg.threads); });
    });
    const auto tau4 = ctx.phase("tau_4", [&] {
        return ctx.table<std::int64_t>("tau_4(x=" + xs + ")", [&] { return sieve_tau_k(spf, x, 4, cfg.threads); });
    });
    std::vector<BoundsReport> reports;
    reports.push_back(ctx.phase("munshi", [&] { return munshi_verify(tau, x, cfg.r); }));

    nlohmann::json smooth = nlohmann::json::array();
    for (const double u : {1.5, 2.0, 2.5, 3.0}) {
        const auto y = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(x), 1.0 / u)));
        if (y < 2 || y > x) continue;
        const double uu = std::log(static_cast<double>(x)) / std::log(static_cast<double>(y));
        const auto count = smooth_count(spf, x, y);
        const double ratio = static_cast<double>(count) / (static_cast<double>(x) * dickman_rho(uu));
        reports.push_back({"smooth_over_rho", uu, static_cast<double>(y), ratio, count, x});
        smooth.push_back({{"u", stable(uu)}, {"y", y}, {"count", count}, {"ratio_to_x_rho", stable(ratio)}});
    }
    const double shiu2 = shiu_ratio(tau, x, 1, 1, 2);
    const double shiu4 = shiu_ratio(tau4, x, 7, 1, 4);
    reports.push_back({"shiu_tau2_q1", 1, 2, shiu2, 0, x});
    reports.push_back({"shiu_tau4_q7", 7, 4, shiu4, 0, x});

    const RealCharacter chi(cfg.params.disc);
    const auto mu = sieve_mu(spf, x, cfg.threads);
    const auto lam_w = squarefree_restrict(rough_restrict(build_lambda(chi, x, cfg.threads), spf, cfg.params.R), mu);
    const std::int64_t a = std::clamp<std::int64_t>(cfg.a, 1, x - 1);
    const auto shift = tau_shift_bound_demo(lam_w, tau, x, a, cfg.params.Q,
                                            static_cast<std::int64_t>(std::pow(static_cast<double>(x), 0.25)));
    reports.push_back({"tau_shift", static_cast<double>(cfg.params.Q), 0, shift.ratio, a, x});

    CsvWriter csv({"inequality_id", "parameter", "exponent", "worst_ratio", "worst_n", "sample_limit"});
    nlohmann::json rep = nlohmann::json::array();
    for (const auto& r : reports) {
        csv.row({r.inequality_id, fmt_real(r.parameter), fmt_real(r.exponent), fmt_real(r.worst_ratio),
                 std::to_string(r.worst_n), std::to_string(r.sample_limit)});
        rep.push_back({{"inequality_id", r.inequality_id}, {"parameter", stable(r.parameter)},
                       {"exponent", stable(r.exponent)}, {"worst_ratio", stable(r.worst_ratio)},
                       {"worst_n", r.worst_n}, {"sample_limit", r.sample_limit}});
    }
    nlohmann::json s;
    s["x"] = x;
    s["r"] = cfg.r;
    s["beta"] = stable(munshi_beta(cfg.r));
    s["reports"] = rep;
    s["smooth"] = smooth;
    s["tau_shift"] = {{"lhs", shift.lhs}, {"rhs", shift.rhs}, {"reduced_side", shift.reduced_side},
                      {"holds", shift.holds}};
    return {csv.str(), s};
}

inline Payload run_scan(const RunConfig& cfg, RunContext& ctx) {
    const auto ranked = ctx.phase("scan", [&] { return scan_discriminants(cfg.limit, cfg.params.x); });
    CsvWriter csv({"rank", "disc", "conductor", "l_one", "score"});
    nlohmann::json top = nlohmann::json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i];
        csv.row({std::to_string(i + 1), std::to_string(r.disc), std::to_string(r.conductor), fmt_real(r.l_one),
                 fmt_real(r.score)});
        if (i < 10) top.push_back({{"disc", r.disc}, {"l_one", stable(r.l_one)}, {"score", stable(r.score)}});
    }
    nlohmann::json s;
    s["limit"] = cfg.limit;
    s["x"] = cfg.params.x;
    s["count"] = ranked.size();
    s["most_exceptional"] = top;
    return {csv.str(), s};
}

}  // namespace detail

/// Runs one experiment and writes report.csv, summary.json and manifest.json
/// into the output directory.
inline RunManifest run(const RunConfig& cfg) {
    validate(cfg);
    default_threads() = cfg.threads;
    RunContext ctx(cfg);
    detail::Payload payload;
    switch (cfg.command) {
        case Command::sieve: payload = detail::run_sieve(cfg, ctx); break;
        case Command::identities: payload = detail::run_identities(cfg, ctx); break;
        case Command::lvalue: payload = detail::run_lvalue(cfg, ctx); break;
        case Command::theorem1: payload = detail::run_theorem1(cfg, ctx); break;
        case Command::theorem2: payload = detail::run_theorem2(cfg, ctx); break;
        case Command::bounds: payload = detail::run_bounds(cfg, ctx); break;
        case Command::scan_discriminants: payload = detail::run_scan(cfg, ctx); break;
    }
    RunManifest m;
    m.config = config_json(cfg);
    m.execution = execution_json(cfg, ctx.cache_hits());
    m.table_hashes = ctx.provenance_hashes();
    m.phase_seconds = ctx.phases();
    m.summary = payload.summary;
    m.report_csv = payload.csv;

    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / "report.csv", payload.csv);
    write_text(cfg.output_dir / "summary.json", payload.summary.dump(2) + "\n");
    write_text(cfg.output_dir / "manifest.json", m.to_json().dump(2) + "\n");
    return m;
}

// ---------------------------------------------------------------------------
// Error mapping
// ---------------------------------------------------------------------------

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitCapacity = 3,
    kExitDomain = 4,
    kExitNonConvergence = 5,
    kExitInternal = 6,
};

struct ErrorRecord {
    int exit_code = kExitInternal;
    std::string kind;
    std::string message;

    nlohmann::json to_json() const { return {{"error", kind}, {"message", message}, {"exit_code", exit_code}}; }
};

inline ErrorRecord classify(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& ex) {
        return {kExitConfig, "config", ex.what()};
    } catch (const CapacityError& ex) {
        return {kExitCapacity, "capacity", ex.what()};
    } catch (const LimitMismatch& ex) {
        return {kExitDomain, "limit_mismatch", ex.what()};
    } catch (const DomainError& ex) {
        return {kExitDomain, "domain", ex.what()};
    } catch (const OverflowError& ex) {
        return {kExitDomain, "overflow", ex.what()};
    } catch (const NonConvergence& ex) {
        return {kExitNonConvergence, "non_convergence", ex.what()};
    } catch (const std::exception& ex) {
        return {kExitInternal, "internal", ex.what()};
    }
}

/// run() with every failure mapped to an exit code and an error.json record.
inline int run_guarded(const RunConfig& cfg, std::ostream& err) {
    try {
        run(cfg);
        return kExitOk;
    } catch (...) {
        const auto rec = classify(std::current_exception());
        err << rec.to_json().dump() << '\n';
        try {
            std::filesystem::create_directories(cfg.output_dir);
            write_text(cfg.output_dir / "error.json", rec.to_json().dump(2) + "\n");
        } catch (...) {
        }
        return rec.exit_code;
    }
}

}  // namespace siegel_lab

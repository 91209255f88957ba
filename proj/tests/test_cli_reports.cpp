#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "siegel_lab/cli_reports.hpp"

using namespace siegel_lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("siegel_lab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json manifest_without_execution(const fs::path& dir) {
    auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    j.erase("execution");
    return j;
}

}  // namespace

TEST(Config, ParsesKeyValueText) {
    RunConfig cfg;
    parse_config_text(cfg, R"(# experiment
command = theorem1
x = 1e6        # integer written in float notation
disc = -163
q = 326
R = 100
A = 2.5
alpha = 0.0005
h = 0.25
Q = 1000
threads = 3

out = results/run1
)");
    EXPECT_EQ(cfg.command, Command::theorem1);
    EXPECT_EQ(cfg.params.x, 1'000'000);
    EXPECT_EQ(cfg.params.disc, -163);
    EXPECT_EQ(cfg.q, 326);
    EXPECT_EQ(cfg.params.R, 100);
    EXPECT_DOUBLE_EQ(cfg.params.A, 2.5);
    EXPECT_DOUBLE_EQ(cfg.params.alpha, 0.0005);
    EXPECT_DOUBLE_EQ(cfg.params.h, 0.25);
    EXPECT_EQ(cfg.params.Q, 1000);
    EXPECT_EQ(cfg.threads, 3);
    EXPECT_EQ(cfg.output_dir, fs::path("results/run1"));

    apply_config_value(cfg, "x", "5000");
    EXPECT_EQ(cfg.params.x, 5000);
    apply_config_value(cfg, "command", "scan-discriminants");
    EXPECT_EQ(cfg.command, Command::scan_discriminants);
}

TEST(Config, Rejections) {
    RunConfig cfg;
    EXPECT_THROW(parse_config_text(cfg, "bogus = 1"), ConfigError);
    EXPECT_THROW(parse_config_text(cfg, "x = ten"), ConfigError);
    EXPECT_THROW(parse_config_text(cfg, "x = 1.5"), ConfigError);
    EXPECT_THROW(parse_config_text(cfg, "x 100"), ConfigError);
    EXPECT_THROW(parse_config_text(cfg, "command = nope"), ConfigError);
    EXPECT_THROW(parse_config_file(cfg, "/nonexistent/siegel.cfg"), ConfigError);
}

TEST(Run, ExitCodes) {
    const auto dir = scratch("exit_codes");
    std::ostringstream err;

    RunConfig cfg;
    cfg.output_dir = dir / "q_gt_x";
    cfg.command = Command::theorem1;
    cfg.params.x = 100;
    cfg.q = 163;
    EXPECT_EQ(run_guarded(cfg, err), kExitDomain);
    const auto rec = nlohmann::json::parse(slurp(cfg.output_dir / "error.json"));
    EXPECT_EQ(rec["exit_code"], kExitDomain);
    EXPECT_EQ(rec["error"], "domain");

    cfg.output_dir = dir / "cap";
    cfg.params.x = 1000;
    cfg.x_cap = 500;
    EXPECT_EQ(run_guarded(cfg, err), kExitCapacity);

    cfg = {};
    cfg.output_dir = dir / "disc";
    cfg.command = Command::lvalue;
    cfg.params.disc = -12;
    EXPECT_EQ(run_guarded(cfg, err), kExitDomain);

    cfg = {};
    cfg.output_dir = dir / "threads";
    cfg.threads = 0;
    EXPECT_EQ(run_guarded(cfg, err), kExitConfig);

    cfg = {};
    cfg.output_dir = dir / "scan";
    cfg.command = Command::scan_discriminants;
    cfg.limit = 2;
    EXPECT_EQ(run_guarded(cfg, err), kExitDomain);

    EXPECT_NE(err.str().find("\"exit_code\""), std::string::npos);
}

TEST(Run, IdentitiesReport) {
    const auto dir = scratch("identities");
    RunConfig cfg;
    cfg.command = Command::identities;
    cfg.params.x = 10'000;
    cfg.params.disc = -4;
    cfg.output_dir = dir;
    const auto m = run(cfg);
    EXPECT_LT(m.summary["max_deviation"].get<double>(), 1e-8 * std::log(1e4));
    EXPECT_TRUE(m.summary["pass"].get<bool>());
    for (const char* f : {"report.csv", "summary.json", "manifest.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["version"], kVersion);
    EXPECT_EQ(manifest["config"]["params"]["disc"], -4);
    EXPECT_FALSE(manifest["tables"].empty());
    EXPECT_TRUE(manifest["execution"]["timing"].is_array());
}

TEST(Run, EveryCommandCompletes) {
    for (const auto& [name, cmd] : command_names()) {
        const auto dir = scratch("cmd_" + name);
        RunConfig cfg;
        cfg.command = cmd;
        cfg.params.x = 20'000;
        cfg.params.Q = 20;
        cfg.q = 163;
        cfg.limit = 50;
        cfg.output_dir = dir;
        std::ostringstream err;
        EXPECT_EQ(run_guarded(cfg, err), kExitOk) << name << ' ' << err.str();
        EXPECT_FALSE(slurp(dir / "report.csv").empty()) << name;
    }
}

TEST(Run, PayloadsIdenticalAcrossThreadsAndCache) {
    const auto root = scratch("repro");
    const auto cache = root / "cache";
    auto make = [&](const std::string& tag, int threads, bool use_cache) {
        RunConfig cfg;
        cfg.command = Command::theorem1;
        cfg.params.x = 100'000;
        cfg.params.disc = -163;
        cfg.q = 163;
        cfg.threads = threads;
        cfg.output_dir = root / tag;
        if (use_cache) cfg.cache_dir = cache;
        return cfg;
    };
    const auto reference = make("t1", 1, false);
    run(reference);
    const auto ref_csv = slurp(reference.output_dir / "report.csv");
    const auto ref_summary = slurp(reference.output_dir / "summary.json");
    const auto ref_manifest = manifest_without_execution(reference.output_dir);

    for (const auto& cfg : {make("t4", 4, false), make("cold", 4, true), make("warm", 1, true)}) {
        const auto m = run(cfg);
        EXPECT_EQ(slurp(cfg.output_dir / "report.csv"), ref_csv) << cfg.output_dir;
        EXPECT_EQ(slurp(cfg.output_dir / "summary.json"), ref_summary) << cfg.output_dir;
        EXPECT_EQ(manifest_without_execution(cfg.output_dir), ref_manifest) << cfg.output_dir;
        const int hits = m.execution["cache_hits"].get<int>();
        if (cfg.output_dir.filename() == "warm") {
            EXPECT_GT(hits, 0);
        } else if (cfg.output_dir.filename() == "cold") {
            EXPECT_EQ(hits, 0);
        }
    }
}

TEST(Run, CorruptCacheEntryIsRebuilt) {
    const auto root = scratch("corrupt");
    RunConfig cfg;
    cfg.command = Command::sieve;
    cfg.params.x = 5000;
    cfg.cache_dir = root / "cache";
    cfg.output_dir = root / "a";
    run(cfg);
    const auto ref = slurp(cfg.output_dir / "report.csv");
    for (const auto& e : fs::directory_iterator(cfg.cache_dir)) {
        std::ofstream(e.path(), std::ios::binary | std::ios::trunc) << "garbage";
    }
    cfg.output_dir = root / "b";
    run(cfg);
    EXPECT_EQ(slurp(cfg.output_dir / "report.csv"), ref);
}

TEST(Scan, Ranking) {
    const auto ranked = scan_discriminants(200, 1'000'000);
    auto pos = [&](std::int64_t d) {
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            if (ranked[i].disc == d) return i;
        }
        return ranked.size();
    };
    EXPECT_LT(pos(-163), pos(-4));
    for (std::size_t i = 1; i < ranked.size(); ++i) ASSERT_LE(ranked[i - 1].score, ranked[i].score);
    for (const auto& r : ranked) ASSERT_TRUE(is_fundamental_discriminant(r.disc)) << r.disc;
    const auto one = scan_discriminants(3, 1000);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].disc, -3);
}

TEST(Format, TwelveSignificantDigits) {
    EXPECT_EQ(fmt_real(std::acos(-1.0)), "3.14159265359");
    EXPECT_EQ(fmt_real(0.0), "0");
    EXPECT_EQ(hex64(255), "00000000000000ff");
}

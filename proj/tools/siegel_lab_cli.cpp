#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "siegel_lab/cli_reports.hpp"

int main(int argc, char** argv) {
    using namespace siegel_lab;

    CLI::App app{"Arithmetic-function laboratory for real characters with small L(1, chi)"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", kVersion);

    std::string command;
    std::string config_path;
    app.add_option("command", command,
                   "sieve | identities | lvalue | theorem1 | theorem2 | bounds | scan-discriminants");
    app.add_option("--config", config_path, "flat key = value config file");

    // Every override is kept as text and applied through the same path as the
    // config file, after it.
    const std::vector<std::pair<std::string, std::string>> keys{
        {"x", "range limit"},         {"disc", "fundamental discriminant"},
        {"q", "modulus"},             {"a", "residue"},
        {"R", "roughness cut"},       {"A", "exponent in regularized L"},
        {"h", "exceptional slack"},   {"alpha", "small exponent"},
        {"Q", "modulus scale"},       {"r", "divisor-bound parameter"},
        {"limit", "scan limit"},      {"threads", "worker threads"},
        {"out", "output directory"},  {"cache", "table cache directory"},
        {"x_cap", "hard cap on x"}};
    std::map<std::string, std::string> overrides;
    for (const auto& [key, help] : keys) {
        app.add_option("--" + key, overrides[key], help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) parse_config_file(cfg, config_path);
        if (!command.empty()) apply_config_value(cfg, "command", command);
        for (const auto& [key, help] : keys) {
            if (app.count("--" + key) > 0) apply_config_value(cfg, key, overrides[key]);
        }
    } catch (...) {
        const auto rec = classify(std::current_exception());
        std::cerr << rec.to_json().dump() << '\n';
        return rec.exit_code;
    }
    const int rc = run_guarded(cfg, std::cerr);
    if (rc == kExitOk) std::cout << "wrote " << (cfg.output_dir / "report.csv").string() << '\n';
    return rc;
}

// Command-line front end: runs one JSON scenario through the C API.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nwave/nwave.h"

int main(int argc, char** argv) {
    CLI::App app{"n-wave hierarchy scenarios (verify, integrate, reduce23, solve22, angle_action)"};
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    app.add_option("config", config, "scenario JSON file")->required();
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_flag("-q,--quiet", quiet, "only report errors");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    int exit_code = 3;
    const std::uint64_t seed_value = seed.value_or(0);
    const nwave_status st = nwave_run_scenario_file(config.c_str(), out ? out->c_str() : nullptr,
                                                    seed ? &seed_value : nullptr, quiet ? 1 : 0, &exit_code);
    if (st != NWAVE_OK) {
        std::cerr << "nwave: " << nwave_status_string(st) << ": " << nwave_last_error() << '\n';
        return 3;
    }
    if (!quiet) {
        static const char* labels[] = {"PASS", "TOLERANCE FAILURE", "CONFIG ERROR", "NUMERICAL ERROR"};
        std::cerr << "nwave: " << labels[exit_code] << '\n';
    }
    return exit_code;
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace nwave {

// Exit status of a scenario run.
enum ScenarioExit : int {
    kExitPass = 0,
    kExitTolerance = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
};

struct RunOptions {
    std::optional<std::string> out_dir;   // overrides "output"
    std::optional<std::uint64_t> seed;    // overrides "seed"
    bool quiet = false;
};

struct ScenarioOutcome {
    int exit_code = kExitPass;
    std::string message;
    std::string output_dir;  // empty when nothing was written
};

/// Runs one JSON scenario document. Kinds: verify, integrate, reduce23,
/// solve22, angle_action. Config problems return kExitConfig before
/// anything is written; every other outcome writes report.json.
ScenarioOutcome run_scenario_text(const std::string& json_text, const RunOptions& opts, std::ostream& log);
ScenarioOutcome run_scenario_file(const std::string& path, const RunOptions& opts, std::ostream& log);

} // namespace nwave

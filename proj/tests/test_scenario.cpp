#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nwave/scenario.hpp"

using namespace nwave;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nwave_scenario_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

ScenarioOutcome run(const json& cfg, const fs::path& out, std::optional<std::uint64_t> seed = {}) {
    RunOptions ro;
    ro.out_dir = out.string();
    ro.seed = seed;
    ro.quiet = true;
    std::ostringstream log;
    return run_scenario_text(cfg.dump(), ro, log);
}

json integrate_cfg() {
    return json{{"kind", "integrate"},
                {"params", {{"a", {0.3, -0.8}}, {"d", {0.5, -0.4, 1.1}}}},
                {"state", {{"random", {{"scale", 1.0}}}}},
                {"t_span", {0, 2}},
                {"samples", 21}};
}

}  // namespace

TEST_CASE("config errors name the field and write nothing") {
    const fs::path out = scratch("config");
    json cfg = integrate_cfg();
    cfg["params"].erase("d");
    auto oc = run(cfg, out);
    CHECK(oc.exit_code == kExitConfig);
    CHECK(oc.message.find("params.d") != std::string::npos);
    CHECK_FALSE(fs::exists(out));

    for (auto [key, value] : {std::pair<std::string, json>{"kind", "teleport"}, {"samples", 1}, {"t_span", {3, 1}},
                              {"flow", "sextic"}, {"bogus", 1}}) {
        json c = integrate_cfg();
        c[key] = value;
        oc = run(c, out);
        CHECK(oc.exit_code == kExitConfig);
        CHECK(oc.message.find(key) != std::string::npos);
        CHECK_FALSE(fs::exists(out));
    }

    json bad_z = integrate_cfg();
    bad_z["state"] = {{"Z", {{{1, 0}, {0, 1}}, {{1, 0}, {0, 1}, {0, 0}}}}};
    oc = run(bad_z, out);
    CHECK(oc.exit_code == kExitConfig);
    CHECK(oc.message.find("state.Z[0]") != std::string::npos);

    RunOptions ro;
    ro.quiet = true;
    std::ostringstream log;
    CHECK(run_scenario_text("{ not json", ro, log).exit_code == kExitConfig);
    CHECK(run_scenario_file("/nonexistent/config.json", ro, log).exit_code == kExitConfig);
}

TEST_CASE("integrate writes trajectory, invariants and report") {
    const fs::path out = scratch("integrate");
    const auto oc = run(integrate_cfg(), out);
    CHECK(oc.exit_code == kExitPass);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(fs::exists(out / "invariants.csv"));
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["status"] == "pass");
    CHECK(rep["checks"].size() == 10);
    CHECK(slurp(out / "trajectory.csv").rfind("t,re_Z11,im_Z11,", 0) == 0);
}

TEST_CASE("tolerance failure still writes report.json") {
    const fs::path out = scratch("tolerance");
    json cfg = integrate_cfg();
    cfg["drift_tolerance"] = 1e-30;
    cfg["rel_tol"] = 1e-4;
    const auto oc = run(cfg, out);
    CHECK(oc.exit_code == kExitTolerance);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["status"] == "tolerance_failure");
    CHECK(rep["exit_code"] == 1);
}

TEST_CASE("numerical failure exits 3 with the module error") {
    const fs::path out = scratch("numerical");
    const json cfg{{"kind", "angle_action"},
                   {"params", {{"a", {0.3, -0.8}}, {"d", {0.5, -0.4, 1.1}}}},
                   {"leaf", {{"s", {1.0, 1.3, 0.9}}, {"r", 0.2}}},
                   {"initial", {0.0, 0.0, 0.7, -0.4}},
                   {"t_span", {0, 3}},
                   {"samples", 7}};
    const auto oc = run(cfg, out);
    CHECK(oc.exit_code == kExitNumerical);
    const json rep = json::parse(slurp(out / "report.json"));
    CHECK(rep["error"]["type"] == "branch_point");
    CHECK(!rep["result"]["branch_events"].empty());
}

TEST_CASE("identical config and seed give identical files; --seed overrides") {
    const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    REQUIRE(run(integrate_cfg(), a).exit_code == 0);
    REQUIRE(run(integrate_cfg(), b).exit_code == 0);
    for (const char* f : {"trajectory.csv", "invariants.csv", "report.json"}) CHECK(slurp(a / f) == slurp(b / f));
    REQUIRE(run(integrate_cfg(), c, 99).exit_code == 0);
    CHECK(slurp(a / "trajectory.csv") != slurp(c / "trajectory.csv"));
    CHECK(json::parse(slurp(c / "report.json"))["seed"] == 99);
}

TEST_CASE("each scenario kind runs with its defaults") {
    const json params23{{"a", {0.3, -0.8}}, {"d", {0.5, -0.4, 1.1}}};
    SUBCASE("verify") {
        const fs::path out = scratch("verify");
        const json cfg{{"kind", "verify"}, {"samples", 3}, {"k_max", 3}};
        CHECK(run(cfg, out).exit_code == kExitPass);
        CHECK(fs::exists(out / "residuals.csv"));
        CHECK(fs::exists(out / "residuals.txt"));
    }
    SUBCASE("reduce23") {
        const fs::path out = scratch("reduce23");
        const json cfg{{"kind", "reduce23"}, {"params", params23}, {"state", {{"random", {{"scale", 1.0}}}}},
                       {"t_span", {0, 2}}, {"samples", 21}};
        CHECK(run(cfg, out).exit_code == kExitPass);
        const json rep = json::parse(slurp(out / "report.json"));
        CHECK(rep["result"]["ode_residual"].get<double>() <= 1e-5);
    }
    SUBCASE("solve22 with its shadow integration") {
        const fs::path out = scratch("solve22");
        const json cfg{{"kind", "solve22"},
                       {"params", {{"a", {0.3, -0.8}}, {"d", {0.5, -0.4}}}},
                       {"leaf", {{"s1", 1.0}, {"s2", 1.3}, {"r", 0.2}}},
                       {"initial", {{"r1", 0.1}, {"psi1", 0.7}}}};
        CHECK(run(cfg, out).exit_code == kExitPass);
        CHECK(fs::exists(out / "shadow.csv"));
        const json rep = json::parse(slurp(out / "report.json"));
        CHECK(rep["result"]["shadow_sup_norm"].get<double>() <= 1e-6);
        CHECK(rep["result"]["turning_points"].get<int>() >= 3);
    }
}

#include "nwave/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <json.hpp>

#include "nwave/flow.hpp"
#include "nwave/hierarchy.hpp"
#include "nwave/reduction22.hpp"
#include "nwave/reduction23.hpp"
#include "nwave/verify.hpp"

namespace nwave {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// config access

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + key, "required field is missing");
    return obj.at(key);
}

double get_number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
    return x;
}

double opt_number(const json& obj, const std::string& key, double def, const std::string& path = "") {
    if (!obj.contains(key)) return def;
    return get_number(obj.at(key), path + key);
}

double opt_positive(const json& obj, const std::string& key, double def, const std::string& path = "") {
    const double x = opt_number(obj, key, def, path);
    if (!(x > 0)) throw ConfigError(path + key, "must be positive");
    return x;
}

long get_int(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    return v.get<long>();
}

long opt_int(const json& obj, const std::string& key, long def, const std::string& path = "") {
    if (!obj.contains(key)) return def;
    return get_int(obj.at(key), path + key);
}

std::vector<double> get_vector(const json& v, const std::string& field) {
    if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Complex get_complex(const json& v, const std::string& field) {
    if (v.is_number()) return {get_number(v, field), 0.0};
    if (!v.is_array() || v.size() != 2) throw ConfigError(field, "complex numbers are [re, im]");
    return {get_number(v[0], field + "[0]"), get_number(v[1], field + "[1]")};
}

void allow_only(const json& obj, const std::set<std::string>& keys, const std::string& path) {
    if (!obj.is_object()) throw ConfigError(path.empty() ? "<document>" : path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!keys.count(it.key())) throw ConfigError(path + it.key(), "unknown field");
}

std::pair<double, double> get_span(const json& cfg, std::pair<double, double> def) {
    if (!cfg.contains("t_span")) return def;
    const std::vector<double> s = get_vector(cfg.at("t_span"), "t_span");
    if (s.size() != 2) throw ConfigError("t_span", "expected [t0, t1]");
    if (!(s[1] > s[0])) throw ConfigError("t_span", "t1 must exceed t0");
    return {s[0], s[1]};
}

SystemParams get_params(const json& cfg) {
    const json& p = require(cfg, "params", "");
    allow_only(p, {"a", "d", "lambda", "k"}, "params.");
    SystemParams sp;
    sp.a = get_vector(require(p, "a", "params."), "params.a");
    sp.d = get_vector(require(p, "d", "params."), "params.d");
    sp.lambda = opt_number(p, "lambda", 0.0, "params.");
    sp.k = static_cast<int>(opt_int(p, "k", 1, "params."));
    if (sp.k < 1) throw ConfigError("params.k", "must be >= 1");
    try {
        sp.validate();
    } catch (const Error& e) {
        throw ConfigError("params", e.what());
    }
    return sp;
}

WaveState get_state(const json& cfg, const SystemParams& p, std::uint64_t seed) {
    const json& s = require(cfg, "state", "");
    allow_only(s, {"Z", "random"}, "state.");
    if (s.contains("Z")) {
        const json& Z = s.at("Z");
        if (!Z.is_array() || static_cast<Eigen::Index>(Z.size()) != p.n_plus())
            throw ConfigError("state.Z", "expected " + std::to_string(p.n_plus()) + " rows (length of a)");
        WaveState w{ComplexMatrix(p.n_plus(), p.n_minus())};
        for (size_t i = 0; i < Z.size(); ++i) {
            const std::string row = "state.Z[" + std::to_string(i) + "]";
            if (!Z[i].is_array() || static_cast<Eigen::Index>(Z[i].size()) != p.n_minus())
                throw ConfigError(row, "expected " + std::to_string(p.n_minus()) + " entries (length of d)");
            for (size_t j = 0; j < Z[i].size(); ++j)
                w.Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    get_complex(Z[i][j], row + "[" + std::to_string(j) + "]");
        }
        return w;
    }
    if (s.contains("random")) {
        const json& r = s.at("random");
        allow_only(r, {"scale", "index"}, "state.random.");
        const double scale = opt_positive(r, "scale", 1.0, "state.random.");
        const int index = static_cast<int>(opt_int(r, "index", 0, "state.random."));
        return random_state({static_cast<int>(p.n_plus()), static_cast<int>(p.n_minus())}, scale, seed, index);
    }
    throw ConfigError("state", "needs either Z or random");
}

IntegratorOptions get_integrator(const json& cfg) {
    IntegratorOptions o;
    o.rel_tol = opt_positive(cfg, "rel_tol", 1e-10);
    o.abs_tol = opt_positive(cfg, "abs_tol", 1e-12);
    return o;
}

std::size_t get_samples(const json& cfg, long def) {
    const long n = opt_int(cfg, "samples", def);
    if (n < 2) throw ConfigError("samples", "must be >= 2");
    return static_cast<std::size_t>(n);
}

// ---------------------------------------------------------------------------
// report helpers

struct Checks {
    json list = json::array();
    bool ok = true;
    json failure;  // set when the run hit a numerical error but still has a result to report
    void add(const std::string& name, double value, double tol) {
        const bool pass = std::isfinite(value) && value <= tol;
        ok = ok && pass;
        list.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
    }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed for " + p.string());
}

template <class Fn>
void write_with(const fs::path& p, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text(p, os.str());
}

json drift_json(const DriftTable& t) {
    json j = json::array();
    for (const auto& r : t)
        j.push_back({{"name", r.name}, {"initial", r.initial}, {"max_abs", r.max_abs}, {"max_rel", r.max_rel}});
    return j;
}

// ---------------------------------------------------------------------------
// scenarios. Each one is split into parse (may throw ConfigError, writes
// nothing) and run (returns the report body).

struct Plan {
    std::string kind;
    fs::path out;
    std::uint64_t seed = 1;
    std::function<json(const fs::path&, Checks&, std::ostream&)> run;
};

const std::set<std::string> kCommon{"kind", "output", "seed", "description"};

std::set<std::string> with_common(std::set<std::string> s) {
    s.insert(kCommon.begin(), kCommon.end());
    return s;
}

Plan plan_verify(const json& cfg, Plan plan) {
    allow_only(cfg, with_common({"shapes", "k_max", "m_max", "lambdas", "samples", "fd_step", "tolerance", "checks"}),
               "");
    std::vector<Shape> shapes{{1, 1}, {2, 2}, {2, 3}};
    if (cfg.contains("shapes")) {
        shapes.clear();
        const json& s = cfg.at("shapes");
        if (!s.is_array() || s.empty()) throw ConfigError("shapes", "expected a non-empty array of [n+, n-]");
        for (size_t i = 0; i < s.size(); ++i) {
            const std::string f = "shapes[" + std::to_string(i) + "]";
            if (!s[i].is_array() || s[i].size() != 2) throw ConfigError(f, "expected [n+, n-]");
            const long np = get_int(s[i][0], f), nm = get_int(s[i][1], f);
            if (np < 1 || nm < 1 || np > 6 || nm > 6) throw ConfigError(f, "sizes must be in 1..6");
            shapes.push_back({static_cast<int>(np), static_cast<int>(nm)});
        }
    }
    const int k_max = static_cast<int>(opt_int(cfg, "k_max", 5));
    if (k_max < 1 || k_max > 8) throw ConfigError("k_max", "must be in 1..8");
    const int m_max = static_cast<int>(opt_int(cfg, "m_max", 5));
    if (m_max < 1 || m_max > 8) throw ConfigError("m_max", "must be in 1..8");
    std::vector<double> lambdas{0.0, 0.7, -1.3};
    if (cfg.contains("lambdas")) lambdas = get_vector(cfg.at("lambdas"), "lambdas");
    SamplingOptions so;
    so.seed = plan.seed;
    so.samples = static_cast<int>(opt_int(cfg, "samples", 20));
    if (so.samples < 1) throw ConfigError("samples", "must be >= 1");
    so.fd_step = opt_positive(cfg, "fd_step", 1e-5);
    so.tolerance = opt_positive(cfg, "tolerance", 1e-6);
    std::vector<std::string> checks{"involution", "manley_rowe", "poisson_map", "gradients"};
    if (cfg.contains("checks")) {
        const json& c = cfg.at("checks");
        if (!c.is_array() || c.empty()) throw ConfigError("checks", "expected a non-empty array of names");
        checks.clear();
        for (const auto& x : c) {
            if (!x.is_string()) throw ConfigError("checks", "expected strings");
            const std::string n = x.get<std::string>();
            if (n != "involution" && n != "manley_rowe" && n != "poisson_map" && n != "gradients")
                throw ConfigError("checks", "unknown check '" + n + "'");
            checks.push_back(n);
        }
    }
    plan.run = [=](const fs::path& out, Checks& chk, std::ostream& log) {
        std::vector<ResidualReport> all;
        auto append = [&](std::vector<ResidualReport> r) { all.insert(all.end(), r.begin(), r.end()); };
        for (const auto& c : checks) {
            if (c == "involution") append(check_involution(shapes, k_max, lambdas, so));
            if (c == "manley_rowe") append(check_manley_rowe(shapes, 3, m_max, lambdas, so));
            if (c == "poisson_map") append(check_poisson_map(so));
            if (c == "gradients") append(check_gradients(k_max, lambdas, so));
        }
        std::sort(all.begin(), all.end(),
                  [](const ResidualReport& a, const ResidualReport& b) { return a.case_id < b.case_id; });
        write_with(out / "residuals.csv", [&](std::ostream& os) { write_residuals_csv(os, all); });
        write_with(out / "residuals.txt", [&](std::ostream& os) { write_residuals_text(os, all); });
        double worst = 0;
        int failed = 0;
        json flagged = json::array();
        for (const auto& r : all) {
            worst = std::max(worst, r.max_residual / r.tolerance);
            if (!r.pass) {
                ++failed;
                flagged.push_back({{"case_id", r.case_id}, {"max_residual", r.max_residual}});
            }
        }
        chk.add("worst residual / tolerance", worst, 1.0);
        log << "verify: " << all.size() << " cases, " << failed << " failed\n";
        return json{{"cases", all.size()}, {"failed", failed}, {"failures", flagged}};
    };
    return plan;
}

Plan plan_integrate(const json& cfg, Plan plan) {
    allow_only(cfg, with_common({"params", "state", "flow", "t_span", "samples", "rel_tol", "abs_tol",
                                 "drift_tolerance"}),
               "");
    const SystemParams params = get_params(cfg);
    const WaveState Z0 = get_state(cfg, params, plan.seed);
    std::string flow = "quartic";
    if (cfg.contains("flow")) {
        if (!cfg.at("flow").is_string()) throw ConfigError("flow", "expected a string");
        flow = cfg.at("flow").get<std::string>();
    }
    WaveFlow kind;
    if (flow == "quartic") kind = WaveFlow::Quartic;
    else if (flow == "quintic") kind = WaveFlow::Quintic;
    else if (flow == "hierarchy") kind = WaveFlow::Hierarchy;
    else throw ConfigError("flow", "expected quartic, quintic or hierarchy");
    const auto span = get_span(cfg, {0.0, 20.0});
    const std::size_t samples = get_samples(cfg, 201);
    const IntegratorOptions io = get_integrator(cfg);
    const double tol = opt_positive(cfg, "drift_tolerance", 1e-7);

    plan.run = [=](const fs::path& out, Checks& chk, std::ostream& log) {
        InvariantSet inv = wave_invariants(params);
        if (kind == WaveFlow::Hierarchy) {
            const auto n = params.n_plus(), m = params.n_minus();
            inv.add("H_k_lambda",
                    [params, n, m](std::span<const double> y) { return h_k_lambda(params, {unflatten(y, n, m)}); });
        }
        Trajectory traj = integrate(make_wave_field(params, kind), flatten(Z0.Z),
                                    uniform_grid(span.first, span.second, samples), io,
                                    coordinate_names(params.n_plus(), params.n_minus()), &inv);
        const DriftTable drift = conservation_report(traj, inv);
        write_csv((out / "trajectory.csv").string(), traj);
        write_with(out / "invariants.csv", [&](std::ostream& os) { write_drift_csv(os, drift); });
        for (const auto& r : drift) chk.add("drift " + r.name, r.max_rel, tol);
        log << "integrate: " << samples << " samples, worst relative drift "
            << format_double(*std::max_element(traj.drift.begin(), traj.drift.end())) << '\n';
        return json{{"flow", flow}, {"drift", drift_json(drift)}};
    };
    return plan;
}

Plan plan_reduce23(const json& cfg, Plan plan) {
    allow_only(cfg, with_common({"params", "state", "t_span", "samples", "rel_tol", "abs_tol", "ode_tolerance",
                                 "drift_tolerance", "g_tolerance"}),
               "");
    const SystemParams params = get_params(cfg);
    if (params.a.size() != 2 || params.d.size() != 3) throw ConfigError("params", "reduce23 needs |a| = 2, |d| = 3");
    if (params.a[0] == params.a[1]) throw ConfigError("params.a", "reduce23 needs a1 != a2");
    const WaveState Z0 = get_state(cfg, params, plan.seed);
    const auto span = get_span(cfg, {0.0, 5.0});
    const std::size_t samples = get_samples(cfg, 101);
    const IntegratorOptions io = get_integrator(cfg);
    const double ode_tol = opt_positive(cfg, "ode_tolerance", 1e-5);
    const double drift_tol = opt_positive(cfg, "drift_tolerance", 1e-7);
    const double g_tol = opt_positive(cfg, "g_tolerance", 1e-8);

    plan.run = [=](const fs::path& out, Checks& chk, std::ostream& log) {
        const Reduce23Check rc = reduce23_consistency(params, Z0, uniform_grid(span.first, span.second, samples), io);
        write_csv((out / "trajectory.csv").string(), rc.reduced);
        write_csv((out / "full_trajectory.csv").string(), rc.full);
        const DriftTable drift = conservation_report(rc.full, wave_invariants(params));
        write_with(out / "invariants.csv", [&](std::ostream& os) {
            DriftTable all = drift;
            const char* names[] = {"H_reduced", "G_reduced", "R_reduced"};
            for (int i = 0; i < 3; ++i) {
                DriftRow row;
                row.name = names[i];
                row.initial = rc.reduced.invariants.front()[static_cast<size_t>(i)];
                for (const auto& v : rc.reduced.invariants)
                    row.max_abs = std::max(row.max_abs, std::abs(v[static_cast<size_t>(i)] - row.initial));
                row.max_rel = rc.reduced.drift[static_cast<size_t>(i)];
                all.push_back(row);
            }
            write_drift_csv(os, all);
        });
        chk.add("reduced ODE residual", rc.ode_residual, ode_tol);
        chk.add("drift H_reduced", rc.drift_H, drift_tol);
        chk.add("drift G_reduced", rc.drift_G, drift_tol);
        chk.add("drift R_reduced", rc.drift_R, drift_tol);
        chk.add("G polar vs full-space combination", rc.g_mismatch, g_tol);
        chk.add("H polar vs full-space", rc.h_mismatch, g_tol);
        log << "reduce23: ODE residual " << format_double(rc.ode_residual) << ", G mismatch "
            << format_double(rc.g_mismatch) << '\n';
        return json{{"time_scale", kLeafBracketScale},
                    {"ode_residual", rc.ode_residual},
                    {"g_mismatch", rc.g_mismatch},
                    {"h_mismatch", rc.h_mismatch},
                    {"r_mismatch", rc.r_mismatch},
                    {"drift", drift_json(drift)}};
    };
    return plan;
}

// Crossings of r1 = level in the upward direction, located on dense output.
std::vector<double> upward_crossings(const DenseSolution& sol, double level, double t0, double t1, std::size_t n) {
    std::vector<double> out;
    auto f = [&](double t) { return sol(t)[0] - level; };
    double ta = t0, fa = f(ta);
    for (std::size_t i = 1; i <= n; ++i) {
        const double tb = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);
        const double fb = f(tb);
        if (fa < 0 && fb >= 0) {
            boost::uintmax_t it = 200;
            auto tolf = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); };
            const auto br = boost::math::tools::toms748_solve(f, ta, tb, fa, fb, tolf, it);
            out.push_back(0.5 * (br.first + br.second));
        }
        ta = tb;
        fa = fb;
    }
    return out;
}

Plan plan_solve22(const json& cfg, Plan plan) {
    allow_only(cfg, with_common({"params", "leaf", "initial", "periods", "t_span", "samples", "shadow", "rel_tol",
                                 "abs_tol", "shadow_tolerance", "period_tolerance", "energy_tolerance"}),
               "");
    const SystemParams params = get_params(cfg);
    if (params.a.size() != 2 || params.d.size() != 2) throw ConfigError("params", "solve22 needs |a| = 2, |d| = 2");
    const json& lj = require(cfg, "leaf", "");
    allow_only(lj, {"s1", "s2", "r"}, "leaf.");
    Leaf22 leaf{get_number(require(lj, "s1", "leaf."), "leaf.s1"), get_number(require(lj, "s2", "leaf."), "leaf.s2"),
                opt_number(lj, "r", 0.0, "leaf."), params.a[0], params.a[1], params.d[0], params.d[1]};
    try {
        leaf.validate();
    } catch (const Error& e) {
        throw ConfigError("leaf", e.what());
    }
    const json& ij = require(cfg, "initial", "");
    allow_only(ij, {"r1", "psi1"}, "initial.");
    const double r1_0 = get_number(require(ij, "r1", "initial."), "initial.r1");
    const double psi1_0 = get_number(require(ij, "psi1", "initial."), "initial.psi1");
    if (std::abs(r1_0) >= leaf.s1 || std::abs(leaf.r - r1_0) >= leaf.s2)
        throw ConfigError("initial.r1", "must lie strictly inside the sphere product");
    const double periods = opt_positive(cfg, "periods", 2.0);
    const bool has_span = cfg.contains("t_span");
    const auto span = get_span(cfg, {0.0, 1.0});
    const std::size_t samples = get_samples(cfg, 401);
    bool shadow = true;
    if (cfg.contains("shadow")) {
        if (!cfg.at("shadow").is_boolean()) throw ConfigError("shadow", "expected true or false");
        shadow = cfg.at("shadow").get<bool>();
    }
    IntegratorOptions io = get_integrator(cfg);
    if (!cfg.contains("rel_tol")) io.rel_tol = 1e-12;
    if (!cfg.contains("abs_tol")) io.abs_tol = 1e-14;
    const double shadow_tol = opt_positive(cfg, "shadow_tolerance", 1e-6);
    const double period_tol = opt_positive(cfg, "period_tolerance", 1e-6);
    const double energy_tol = opt_positive(cfg, "energy_tolerance", 1e-9);

    plan.run = [=](const fs::path& out, Checks& chk, std::ostream& log) {
        double t0 = span.first, t1 = span.second;
        const double H = h22(r1_0, psi1_0, leaf);
        double period = 0;
        bool equilibrium = false;
        try {
            period = build_quartic(leaf, H, r1_0).period;
        } catch (const NoMotionError&) {
            equilibrium = true;
        }
        if (!has_span) {
            t0 = 0.0;
            t1 = equilibrium ? 1.0 : periods * period;
        }
        const std::vector<double> grid = uniform_grid(t0, t1, samples);
        const Solve22Result sr = solve_22(leaf, r1_0, psi1_0, grid);
        write_csv((out / "trajectory.csv").string(), sr.trajectory);
        InvariantSet inv;
        inv.add("H", [leaf](std::span<const double> y) { return h22(y[0], y[1], leaf); });
        const DriftTable drift = conservation_report(sr.trajectory, inv);
        write_with(out / "invariants.csv", [&](std::ostream& os) { write_drift_csv(os, drift); });
        chk.add("energy closure |H(t) - H(0)|", drift.front().max_abs, energy_tol);

        json rep{{"H", H},
                 {"equilibrium", sr.equilibrium},
                 {"period", sr.period},
                 {"turning_points", sr.turning_points},
                 {"rho_minus", sr.quartic.rho_minus},
                 {"rho_plus", sr.quartic.rho_plus},
                 {"w4_degree", sr.quartic.degree},
                 {"w4_coefficients", sr.quartic.coeffs},
                 {"w4_roots", sr.quartic.roots}};
        if (shadow) {
            const double t_end = sr.equilibrium ? t1 : t1 + 0.25 * sr.period;
            const DenseSolution sol = solve_dense(make_reduced22_field(leaf), {r1_0, psi1_0}, t0, t_end, io);
            Trajectory sh;
            sh.coordinate_names = {"r1", "psi1"};
            sh.times = grid;
            double sup = 0;
            for (size_t i = 0; i < grid.size(); ++i) {
                sh.states.push_back(sol(grid[i]));
                sup = std::max(sup, std::abs(sh.states.back()[0] - sr.trajectory.states[i][0]));
            }
            attach_invariants(sh, inv);
            write_csv((out / "shadow.csv").string(), sh);
            chk.add("sup |r1 closed form - r1 ODE|", sup, shadow_tol);
            rep["shadow_sup_norm"] = sup;
            if (!sr.equilibrium) {
                const double mid = 0.5 * (sr.quartic.rho_minus + sr.quartic.rho_plus);
                const auto cr = upward_crossings(sol, mid, t0, t_end, std::max<std::size_t>(samples * 4, 400));
                if (cr.size() >= 2) {
                    const double emp = cr[1] - cr[0];
                    rep["empirical_period"] = emp;
                    chk.add("period |T - T_empirical| / T", std::abs(emp - sr.period) / sr.period, period_tol);
                } else {
                    chk.add("period |T - T_empirical| / T", std::numeric_limits<double>::infinity(), period_tol);
                }
            }
        }
        log << "solve22: period " << format_double(sr.period) << ", " << sr.turning_points << " turning points\n";
        return rep;
    };
    return plan;
}

Plan plan_angle_action(const json& cfg, Plan plan) {
    allow_only(cfg, with_common({"params", "leaf", "initial", "t_span", "samples", "base", "rel_tol", "abs_tol",
                                 "tolerance"}),
               "");
    const SystemParams params = get_params(cfg);
    if (params.a.size() != 2 || params.d.size() != 3)
        throw ConfigError("params", "angle_action needs |a| = 2, |d| = 3");
    const json& lj = require(cfg, "leaf", "");
    allow_only(lj, {"s", "r"}, "leaf.");
    const std::vector<double> s = get_vector(require(lj, "s", "leaf."), "leaf.s");
    if (s.size() != 3 || *std::min_element(s.begin(), s.end()) <= 0)
        throw ConfigError("leaf.s", "expected three positive radii");
    LeafParams leaf{{s[0], s[1], s[2]}, opt_number(lj, "r", 0.0, "leaf.")};
    const std::vector<double> y0 = get_vector(require(cfg, "initial", ""), "initial");
    if (y0.size() != 4) throw ConfigError("initial", "expected [r1, r2, psi1, psi2]");
    if (std::abs(y0[0]) >= s[0] || std::abs(y0[1]) >= s[1] || std::abs(leaf.r - y0[0] - y0[1]) >= s[2])
        throw ConfigError("initial", "must lie strictly inside the leaf");
    GeneratingOptions go;
    if (cfg.contains("base")) {
        const std::vector<double> b = get_vector(cfg.at("base"), "base");
        if (b.size() != 2) throw ConfigError("base", "expected [r1, r2]");
        go.base_r1 = b[0];
        go.base_r2 = b[1];
    }
    const auto span = get_span(cfg, {0.0, 0.6});
    const std::size_t samples = get_samples(cfg, 13);
    IntegratorOptions io = get_integrator(cfg);
    if (!cfg.contains("rel_tol")) io.rel_tol = 1e-12;
    if (!cfg.contains("abs_tol")) io.abs_tol = 1e-14;
    const double tol = opt_positive(cfg, "tolerance", 1e-4);

    plan.run = [=](const fs::path& out, Checks& chk, std::ostream& log) {
        const std::vector<double> grid = uniform_grid(span.first, span.second, samples);
        Trajectory traj = integrate(make_reduced23_field(leaf, params), y0, grid, io, {"r1", "r2", "psi1", "psi2"});
        traj.invariant_names = {"G", "H", "gamma", "tau"};
        GeneratingOptions o = go;
        const ReducedState first{leaf, y0[0], y0[1], y0[2], y0[3]};
        o.base_psi_guess = base_angles_for(first, params, go);
        json events = json::array();
        double tmin = INFINITY, tmax = -INFINITY, gmin = INFINITY, gmax = -INFINITY;
        double Gdev = 0, Hdev = 0;
        AngleActionPoint p0{};
        bool broke = false;
        for (size_t i = 0; i < grid.size(); ++i) {
            const auto& y = traj.states[i];
            const ReducedState st{leaf, y[0], y[1], y[2], y[3]};
            AngleActionPoint p;
            try {
                p = angle_action(st, params, o);
            } catch (const BranchPointError& e) {
                events.push_back({{"t", grid[i]}, {"message", e.what()}, {"s", e.location()}});
                broke = true;
                break;
            }
            if (i == 0) p0 = p;
            traj.invariants.push_back({p.G, p.H, p.gamma, p.tau});
            tmin = std::min(tmin, p.tau - grid[i]);
            tmax = std::max(tmax, p.tau - grid[i]);
            gmin = std::min(gmin, p.gamma);
            gmax = std::max(gmax, p.gamma);
            Gdev = std::max(Gdev, std::abs(p.G - p0.G));
            Hdev = std::max(Hdev, std::abs(p.H - p0.H));
        }
        if (broke) {
            traj.times.resize(traj.invariants.size());
            traj.states.resize(traj.invariants.size());
        }
        write_csv((out / "trajectory.csv").string(), traj);
        write_with(out / "invariants.csv", [&](std::ostream& os) {
            os << "name,initial,max_abs_drift\n";
            os << "G," << format_double(p0.G) << ',' << format_double(Gdev) << '\n';
            os << "H," << format_double(p0.H) << ',' << format_double(Hdev) << '\n';
        });
        chk.add("G constancy", Gdev, 1e-8);
        chk.add("H constancy", Hdev, 1e-8);
        if (broke) {
            chk.failure = {{"type", to_string(ErrorCode::BranchPoint)},
                           {"message", events.back()["message"].get<std::string>()}};
            log << "angle_action: left the branch at t = " << format_double(events.back()["t"].get<double>()) << '\n';
        } else {
            chk.add("spread of tau - t", tmax - tmin, tol);
            chk.add("spread of gamma", gmax - gmin, tol);
            log << "angle_action: tau - t spread " << format_double(tmax - tmin) << ", gamma spread "
                << format_double(gmax - gmin) << '\n';
        }
        return json{{"branch_events", events},
                    {"samples_evaluated", traj.times.size()},
                    {"base", {go.base_r1, go.base_r2}},
                    {"base_psi", {o.base_psi_guess[0], o.base_psi_guess[1]}},
                    {"tau_minus_t_spread", tmax - tmin},
                    {"gamma_spread", gmax - gmin}};
    };
    return plan;
}

Plan parse(const json& cfg, const RunOptions& ro) {
    if (!cfg.is_object()) throw ConfigError("<document>", "expected a JSON object");
    const json& k = require(cfg, "kind", "");
    if (!k.is_string()) throw ConfigError("kind", "expected a string");
    Plan plan;
    plan.kind = k.get<std::string>();
    std::string out = "nwave_out";
    if (cfg.contains("output")) {
        if (!cfg.at("output").is_string()) throw ConfigError("output", "expected a path string");
        out = cfg.at("output").get<std::string>();
    }
    if (ro.out_dir) out = *ro.out_dir;
    plan.out = out;
    if (cfg.contains("seed")) {
        const json& s = cfg.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("seed", "expected a non-negative integer");
        plan.seed = s.get<std::uint64_t>();
    }
    if (ro.seed) plan.seed = *ro.seed;
    if (cfg.contains("description") && !cfg.at("description").is_string())
        throw ConfigError("description", "expected a string");

    if (plan.kind == "verify") return plan_verify(cfg, plan);
    if (plan.kind == "integrate") return plan_integrate(cfg, plan);
    if (plan.kind == "reduce23") return plan_reduce23(cfg, plan);
    if (plan.kind == "solve22") return plan_solve22(cfg, plan);
    if (plan.kind == "angle_action") return plan_angle_action(cfg, plan);
    throw ConfigError("kind", "unknown scenario kind '" + plan.kind +
                                  "' (expected verify, integrate, reduce23, solve22 or angle_action)");
}

} // namespace

ScenarioOutcome run_scenario_text(const std::string& json_text, const RunOptions& ro, std::ostream& log) {
    ScenarioOutcome oc;
    std::ostringstream sink;
    std::ostream& lg = ro.quiet ? sink : log;
    Plan plan;
    try {
        json cfg;
        try {
            cfg = json::parse(json_text);
        } catch (const json::parse_error& e) {
            throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
        }
        plan = parse(cfg, ro);
    } catch (const ConfigError& e) {
        oc.exit_code = kExitConfig;
        oc.message = e.what();
        log << "config error: " << e.what() << '\n';
        return oc;
    }

    json report{{"kind", plan.kind}, {"seed", plan.seed}};
    Checks checks;
    try {
        fs::create_directories(plan.out);
        oc.output_dir = plan.out.string();
        report["result"] = plan.run(plan.out, checks, lg);
        if (!checks.failure.is_null()) {
            oc.exit_code = kExitNumerical;
            oc.message = checks.failure["message"].get<std::string>();
            report["status"] = "numerical_error";
            report["error"] = checks.failure;
            log << "numerical error: " << oc.message << '\n';
        } else {
            oc.exit_code = checks.ok ? kExitPass : kExitTolerance;
            report["status"] = checks.ok ? "pass" : "tolerance_failure";
            oc.message = checks.ok ? "all tolerances met" : "tolerance failure";
        }
    } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        oc.exit_code = kExitNumerical;
        oc.message = e.what();
        report["status"] = "numerical_error";
        report["error"] = {{"type", err ? to_string(err->code()) : "internal"}, {"message", e.what()}};
        log << "numerical error: " << e.what() << '\n';
    }
    report["checks"] = checks.list;
    report["exit_code"] = oc.exit_code;
    if (!oc.output_dir.empty()) {
        try {
            write_text(plan.out / "report.json", report.dump(2) + "\n");
        } catch (const std::exception& e) {
            log << "could not write report.json: " << e.what() << '\n';
            oc.exit_code = kExitNumerical;
        }
    }
    for (const auto& c : checks.list)
        if (!c["pass"].get<bool>())
            lg << "  FAIL " << c["name"].get<std::string>() << ": " << format_double(c["value"].get<double>())
               << " > " << format_double(c["tolerance"].get<double>()) << '\n';
    return oc;
}

ScenarioOutcome run_scenario_file(const std::string& path, const RunOptions& ro, std::ostream& log) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        ScenarioOutcome oc;
        oc.exit_code = kExitConfig;
        oc.message = "config field '<path>': cannot read " + path;
        log << "config error: " << oc.message << '\n';
        return oc;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return run_scenario_text(ss.str(), ro, log);
}

} // namespace nwave

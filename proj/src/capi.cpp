#include "nwave/nwave.h"

#include <iostream>
#include <string>

#include "nwave/flow.hpp"
#include "nwave/hierarchy.hpp"
#include "nwave/reduction22.hpp"
#include "nwave/reduction23.hpp"
#include "nwave/scenario.hpp"
#include "nwave/verify.hpp"

struct nwave_params {
    nwave::SystemParams p;
};
struct nwave_state {
    nwave::WaveState s;
};
struct nwave_trajectory {
    nwave::Trajectory t;
};

namespace {

thread_local std::string g_last_error;

nwave_status fail(nwave_status s, const std::string& msg) {
    g_last_error = msg;
    return s;
}

class ArgError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void need(bool ok, const char* what) {
    if (!ok) throw ArgError(what);
}

template <class Fn>
nwave_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return NWAVE_OK;
    } catch (const ArgError& e) {
        return fail(NWAVE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const nwave::Error& e) {
        return fail(static_cast<nwave_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(NWAVE_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(NWAVE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(NWAVE_ERR_INTERNAL, "unknown exception");
    }
}

nwave::WaveFlow to_flow(nwave_flow f) {
    switch (f) {
    case NWAVE_FLOW_QUARTIC: return nwave::WaveFlow::Quartic;
    case NWAVE_FLOW_QUINTIC: return nwave::WaveFlow::Quintic;
    case NWAVE_FLOW_HIERARCHY: return nwave::WaveFlow::Hierarchy;
    }
    throw ArgError("unknown flow");
}

}  // namespace

extern "C" {

const char* nwave_last_error(void) { return g_last_error.c_str(); }

const char* nwave_status_string(nwave_status s) {
    switch (s) {
    case NWAVE_OK: return "ok";
    case NWAVE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case NWAVE_ERR_INTERNAL: return "internal";
    default:
        if (s >= 1 && s <= 11) return nwave::to_string(static_cast<nwave::ErrorCode>(s));
        return "unknown";
    }
}

nwave_status nwave_params_create(const double* a, size_t n_plus, const double* d, size_t n_minus, double lambda,
                                 int k, nwave_params** out) {
    return guarded([&] {
        need(out && a && d && n_plus > 0 && n_minus > 0, "null pointer or empty spectrum");
        nwave::SystemParams p;
        p.a.assign(a, a + n_plus);
        p.d.assign(d, d + n_minus);
        p.lambda = lambda;
        p.k = k;
        p.validate();
        *out = new nwave_params{std::move(p)};
    });
}

void nwave_params_destroy(nwave_params* params) { delete params; }

nwave_status nwave_state_create(const nwave_params* params, const double* z, size_t len, nwave_state** out) {
    return guarded([&] {
        need(params && z && out, "null pointer");
        const auto n = params->p.n_plus(), m = params->p.n_minus();
        if (len != static_cast<size_t>(2 * n * m))
            throw nwave::DimensionError("state needs " + std::to_string(2 * n * m) + " doubles, got " +
                                        std::to_string(len));
        *out = new nwave_state{{nwave::unflatten({z, len}, n, m)}};
    });
}

nwave_status nwave_state_random(const nwave_params* params, double scale, uint64_t seed, int index,
                                nwave_state** out) {
    return guarded([&] {
        need(params && out, "null pointer");
        need(scale > 0, "scale must be positive");
        const nwave::Shape sh{static_cast<int>(params->p.n_plus()), static_cast<int>(params->p.n_minus())};
        *out = new nwave_state{nwave::random_state(sh, scale, seed, index)};
    });
}

size_t nwave_state_length(const nwave_state* state) {
    return state ? static_cast<size_t>(2 * state->s.Z.size()) : 0;
}

nwave_status nwave_state_get(const nwave_state* state, double* z, size_t len) {
    return guarded([&] {
        need(state && z, "null pointer");
        const auto y = nwave::flatten(state->s.Z);
        if (len != y.size()) throw nwave::DimensionError("buffer length mismatch");
        std::copy(y.begin(), y.end(), z);
    });
}

void nwave_state_destroy(nwave_state* state) { delete state; }

nwave_status nwave_hamiltonian(const nwave_params* params, const nwave_state* state, double* out) {
    return guarded([&] {
        need(params && state && out, "null pointer");
        *out = nwave::h_k_lambda(params->p, state->s);
    });
}

nwave_status nwave_quartic_quintic(const nwave_params* params, const nwave_state* state, double* H, double* F) {
    return guarded([&] {
        need(params && state && H && F, "null pointer");
        const auto q = nwave::quartic_quintic(params->p, state->s);
        *H = q.H;
        *F = q.F;
    });
}

nwave_status nwave_manley_rowe(const nwave_params* params, const nwave_state* state, int k, double* alpha,
                               double* delta) {
    return guarded([&] {
        need(params && state && alpha && delta, "null pointer");
        need(k >= 0, "k must be >= 0");
        const auto mr = nwave::manley_rowe(params->p, state->s, k);
        *alpha = mr.alpha;
        *delta = mr.delta;
    });
}

nwave_status nwave_gradient(const nwave_params* params, const nwave_state* state, nwave_flow which, double* out,
                            size_t len) {
    return guarded([&] {
        need(params && state && out, "null pointer");
        nwave::ComplexMatrix g;
        switch (to_flow(which)) {
        case nwave::WaveFlow::Quartic: g = nwave::grad_quartic(params->p, state->s); break;
        case nwave::WaveFlow::Quintic: g = nwave::grad_quintic(params->p, state->s); break;
        case nwave::WaveFlow::Hierarchy: g = nwave::grad_h_k_lambda(params->p, state->s); break;
        }
        const auto y = nwave::flatten(g);
        if (len != y.size()) throw nwave::DimensionError("buffer length mismatch");
        std::copy(y.begin(), y.end(), out);
    });
}

nwave_status nwave_integrate(const nwave_params* params, const nwave_state* state, nwave_flow flow, double t0,
                             double t1, size_t samples, double rel_tol, double abs_tol, nwave_trajectory** out) {
    return guarded([&] {
        need(params && state && out, "null pointer");
        need(samples >= 2 && t1 > t0, "need samples >= 2 and t1 > t0");
        need(rel_tol > 0 && abs_tol > 0, "tolerances must be positive");
        nwave::check_shape(params->p, state->s);
        nwave::IntegratorOptions o;
        o.rel_tol = rel_tol;
        o.abs_tol = abs_tol;
        const auto n = params->p.n_plus(), m = params->p.n_minus();
        const auto inv = nwave::wave_invariants(params->p);
        auto tr = nwave::integrate(nwave::make_wave_field(params->p, to_flow(flow)), nwave::flatten(state->s.Z),
                                   nwave::uniform_grid(t0, t1, samples), o, nwave::coordinate_names(n, m), &inv);
        *out = new nwave_trajectory{std::move(tr)};
    });
}

size_t nwave_trajectory_samples(const nwave_trajectory* traj) { return traj ? traj->t.times.size() : 0; }

size_t nwave_trajectory_dimension(const nwave_trajectory* traj) {
    return traj && !traj->t.states.empty() ? traj->t.states.front().size() : 0;
}

size_t nwave_trajectory_invariant_count(const nwave_trajectory* traj) {
    return traj ? traj->t.invariant_names.size() : 0;
}

nwave_status nwave_trajectory_time(const nwave_trajectory* traj, size_t i, double* t) {
    return guarded([&] {
        need(traj && t, "null pointer");
        need(i < traj->t.times.size(), "sample index out of range");
        *t = traj->t.times[i];
    });
}

nwave_status nwave_trajectory_state(const nwave_trajectory* traj, size_t i, double* y, size_t len) {
    return guarded([&] {
        need(traj && y, "null pointer");
        need(i < traj->t.states.size(), "sample index out of range");
        const auto& s = traj->t.states[i];
        if (len != s.size()) throw nwave::DimensionError("buffer length mismatch");
        std::copy(s.begin(), s.end(), y);
    });
}

nwave_status nwave_trajectory_drift(const nwave_trajectory* traj, size_t j, double* drift) {
    return guarded([&] {
        need(traj && drift, "null pointer");
        need(j < traj->t.drift.size(), "invariant index out of range");
        *drift = traj->t.drift[j];
    });
}

nwave_status nwave_trajectory_write_csv(const nwave_trajectory* traj, const char* path) {
    return guarded([&] {
        need(traj && path, "null pointer");
        nwave::write_csv(std::string(path), traj->t);
    });
}

void nwave_trajectory_destroy(nwave_trajectory* traj) { delete traj; }

nwave_status nwave_solve22(const double a[2], const double d[2], double s1, double s2, double r, double r1_0,
                           double psi1_0, double t0, double t1, size_t samples, double* period,
                           nwave_trajectory** out) {
    return guarded([&] {
        need(a && d && period && out, "null pointer");
        need(samples >= 2 && t1 > t0, "need samples >= 2 and t1 > t0");
        nwave::Leaf22 leaf{s1, s2, r, a[0], a[1], d[0], d[1]};
        leaf.validate();
        auto res = nwave::solve_22(leaf, r1_0, psi1_0, nwave::uniform_grid(t0, t1, samples));
        *period = res.period;
        *out = new nwave_trajectory{std::move(res.trajectory)};
    });
}

nwave_status nwave_angle_action(const double a[2], const double d[3], const double s[3], double r, const double y[4],
                                const double base[2], double* gamma, double* tau) {
    return guarded([&] {
        need(a && d && s && y && gamma && tau, "null pointer");
        nwave::SystemParams p;
        p.a = {a[0], a[1]};
        p.d = {d[0], d[1], d[2]};
        p.validate();
        const nwave::ReducedState st{{{s[0], s[1], s[2]}, r}, y[0], y[1], y[2], y[3]};
        nwave::GeneratingOptions go;
        if (base) {
            go.base_r1 = base[0];
            go.base_r2 = base[1];
        }
        go.base_psi_guess = nwave::base_angles_for(st, p, go);
        const auto pt = nwave::angle_action(st, p, go);
        *gamma = pt.gamma;
        *tau = pt.tau;
    });
}

nwave_status nwave_run_scenario_file(const char* config_path, const char* out_dir, const uint64_t* seed, int quiet,
                                     int* exit_code) {
    return guarded([&] {
        need(config_path && exit_code, "null pointer");
        nwave::RunOptions ro;
        if (out_dir) ro.out_dir = out_dir;
        if (seed) ro.seed = *seed;
        ro.quiet = quiet != 0;
        const auto oc = nwave::run_scenario_file(config_path, ro, std::cerr);
        *exit_code = oc.exit_code;
        if (oc.exit_code != nwave::kExitPass) g_last_error = oc.message;
    });
}

}  // extern "C"

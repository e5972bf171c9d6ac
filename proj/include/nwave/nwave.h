/* C interface to the n-wave library. All functions return an nwave_status;
 * on failure nwave_last_error() describes the problem (per thread). */
#ifndef NWAVE_H
#define NWAVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(NWAVE_BUILDING_LIBRARY)
#define NWAVE_API __attribute__((visibility("default")))
#else
#define NWAVE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nwave_status {
    NWAVE_OK = 0,
    NWAVE_ERR_DIMENSION = 1,
    NWAVE_ERR_VALIDATION = 2,
    NWAVE_ERR_NUMERICAL = 3,
    NWAVE_ERR_STEP_UNDERFLOW = 4,
    NWAVE_ERR_DOMAIN = 5,
    NWAVE_ERR_CONVERGENCE = 6,
    NWAVE_ERR_BRANCH_POINT = 7,
    NWAVE_ERR_NO_MOTION = 8,
    NWAVE_ERR_CONSISTENCY = 9,
    NWAVE_ERR_CONFIG = 10,
    NWAVE_ERR_IO = 11,
    NWAVE_ERR_INVALID_ARGUMENT = 20,
    NWAVE_ERR_INTERNAL = 99
} nwave_status;

typedef enum nwave_flow {
    NWAVE_FLOW_QUARTIC = 0,
    NWAVE_FLOW_QUINTIC = 1,
    NWAVE_FLOW_HIERARCHY = 2 /* H_{k,lambda} of the params */
} nwave_flow;

typedef struct nwave_params nwave_params;
typedef struct nwave_state nwave_state;
typedef struct nwave_trajectory nwave_trajectory;

NWAVE_API const char* nwave_last_error(void);
NWAVE_API const char* nwave_status_string(nwave_status status);

/* a has n_plus entries, d has n_minus. */
NWAVE_API nwave_status nwave_params_create(const double* a, size_t n_plus, const double* d, size_t n_minus,
                                           double lambda, int k, nwave_params** out);
NWAVE_API void nwave_params_destroy(nwave_params* params);

/* Z as 2 * n_plus * n_minus doubles: row-major, re/im interleaved. */
NWAVE_API nwave_status nwave_state_create(const nwave_params* params, const double* z, size_t len,
                                          nwave_state** out);
NWAVE_API nwave_status nwave_state_random(const nwave_params* params, double scale, uint64_t seed, int index,
                                          nwave_state** out);
NWAVE_API nwave_status nwave_state_get(const nwave_state* state, double* z, size_t len);
NWAVE_API size_t nwave_state_length(const nwave_state* state);
NWAVE_API void nwave_state_destroy(nwave_state* state);

NWAVE_API nwave_status nwave_hamiltonian(const nwave_params* params, const nwave_state* state, double* out);
NWAVE_API nwave_status nwave_quartic_quintic(const nwave_params* params, const nwave_state* state, double* H,
                                             double* F);
NWAVE_API nwave_status nwave_manley_rowe(const nwave_params* params, const nwave_state* state, int k,
                                         double* alpha, double* delta);
/* dF/dZ^+ in the same layout as nwave_state_create. */
NWAVE_API nwave_status nwave_gradient(const nwave_params* params, const nwave_state* state, nwave_flow which,
                                      double* out, size_t len);

/* Samples the flow on a uniform grid of `samples` points in [t0, t1]. */
NWAVE_API nwave_status nwave_integrate(const nwave_params* params, const nwave_state* state, nwave_flow flow,
                                       double t0, double t1, size_t samples, double rel_tol, double abs_tol,
                                       nwave_trajectory** out);

NWAVE_API size_t nwave_trajectory_samples(const nwave_trajectory* traj);
NWAVE_API size_t nwave_trajectory_dimension(const nwave_trajectory* traj);
NWAVE_API size_t nwave_trajectory_invariant_count(const nwave_trajectory* traj);
NWAVE_API nwave_status nwave_trajectory_time(const nwave_trajectory* traj, size_t i, double* t);
NWAVE_API nwave_status nwave_trajectory_state(const nwave_trajectory* traj, size_t i, double* y, size_t len);
/* Max relative drift of invariant j over the run. */
NWAVE_API nwave_status nwave_trajectory_drift(const nwave_trajectory* traj, size_t j, double* drift);
NWAVE_API nwave_status nwave_trajectory_write_csv(const nwave_trajectory* traj, const char* path);
NWAVE_API void nwave_trajectory_destroy(nwave_trajectory* traj);

/* Closed-form (2+2) solution; coordinates (r1, psi1). period is 0 at an equilibrium. */
NWAVE_API nwave_status nwave_solve22(const double a[2], const double d[2], double s1, double s2, double r,
                                     double r1_0, double psi1_0, double t0, double t1, size_t samples,
                                     double* period, nwave_trajectory** out);

/* Conjugate angles (gamma, tau) of the reduced (2+3) state y = (r1, r2, psi1, psi2)
 * on the leaf (s, r), with the generating function based at `base` (may be NULL: origin). */
NWAVE_API nwave_status nwave_angle_action(const double a[2], const double d[3], const double s[3], double r,
                                          const double y[4], const double base[2], double* gamma, double* tau);

/* Runs a JSON scenario. out_dir and seed may be NULL. exit_code receives 0..3. */
NWAVE_API nwave_status nwave_run_scenario_file(const char* config_path, const char* out_dir, const uint64_t* seed,
                                               int quiet, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif

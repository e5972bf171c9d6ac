#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nwave/flow.hpp"
#include "nwave/linalg.hpp"

namespace nwave {

// The 2x3 case: Z has rows z (= Z.row(0)) and v (= Z.row(1)).

using Vec3c = std::array<Complex, 3>;
using Vec3 = std::array<double, 3>;

struct LeafCoords {
    Vec3c eta;  // conj(v_k) z_k
    Vec3 r;     // |z_k|^2 - |v_k|^2
    Vec3 s;     // |z_k|^2 + |v_k|^2
};

LeafCoords to_leaf_coords(const Vec3c& z, const Vec3c& v);
LeafCoords to_leaf_coords(const WaveState& state);  // requires 2x3

/// k-th block i [[|z_k|^2, conj(v_k) z_k], [v_k conj(z_k), |v_k|^2]].
std::array<Eigen::Matrix2cd, 3> momentum_map(const Vec3c& z, const Vec3c& v);

// Polar coordinates on the leaf. phi_k is the full angle of conj(eta_k),
//   eta_k = 1/2 sqrt(s_k^2 - r_k^2) exp(-i phi_k),
// so that the reduced Hamiltonians carry cos(phi_k - phi_l). Under the
// bracket on Z these satisfy {r_k, phi_l} = 2 delta_kl (kLeafBracketScale);
// the reduced equations below are written for the unit-normalised pair,
// i.e. in the reduced time t_red = kLeafBracketScale * t.
inline constexpr double kLeafBracketScale = 2.0;

struct PolarLeafState {
    Vec3 s;
    Vec3 r;
    Vec3 phi;  // in (-pi, pi]
};

PolarLeafState to_polar(const LeafCoords& c);
/// A point (z, v) on the leaf with the given polar coordinates (z_k real >= 0).
WaveState from_polar(const PolarLeafState& p);

struct LeafParams {
    Vec3 s{};
    double r = 0.0;  // level of R = r1 + r2 + r3
};

struct ReducedState {
    LeafParams leaf;
    double r1 = 0, r2 = 0;
    double psi1 = 0, psi2 = 0;  // phi_i - phi_3
    double r3() const { return leaf.r - r1 - r2; }
};

ReducedState to_reduced(const WaveState& state);

struct ReducedInvariants {
    double H, G, R;
};

/// Polar-coordinate H, G, R. Throws DomainError when |r_k| > s_k.
ReducedInvariants reduced_invariants(const PolarLeafState& state, const SystemParams& params);
double reduced_h(const ReducedState& state, const SystemParams& params);
double reduced_g(const ReducedState& state, const SystemParams& params);

/// (2 alpha_1 - (a1 + a2) alpha_0) / (a1 - a2), equal to r1 + r2 + r3.
double r_corrected(const SystemParams& params, const WaveState& state);
/// alpha_0 - 2/(a2 - a1) alpha_1, the variant that does not reduce to r1 + r2 + r3.
double r_printed(const SystemParams& params, const WaveState& state);
/// G assembled from F, H, R, delta_1 and the column norms s_k.
double g_from_full_space(const SystemParams& params, const WaveState& state);

struct ReducedDerivative {
    double dr1, dr2, dpsi1, dpsi2;
};

/// dr_i = dH/dpsi_i, dpsi_i = -dH/dr_i. A sphere with s_k == 0 is treated
/// as frozen (its square-root terms are dropped); any other vanishing square
/// root is a DomainError naming the sphere.
ReducedDerivative reduced_vector_field(const ReducedState& state, const SystemParams& params);
/// Same for G.
ReducedDerivative reduced_g_vector_field(const ReducedState& state, const SystemParams& params);

/// Field on y = (r1, r2, psi1, psi2).
VectorField make_reduced23_field(const LeafParams& leaf, const SystemParams& params);

struct AngleTargets {
    double G, H;
};

/// Newton on {H(r, psi) = H*, G(r, psi) = G*} from the guess.
std::array<double, 2> solve_angles(double r1, double r2, const AngleTargets& targets, const LeafParams& leaf,
                                   const SystemParams& params, std::array<double, 2> guess);

struct GeneratingOptions {
    double base_r1 = 0.0, base_r2 = 0.0;  // ray origin
    std::array<double, 2> base_psi_guess{0.0, 0.0};
    int min_nodes = 64;
    double quad_tol = 1e-13;
};

struct GeneratingResult {
    double Phi = 0;
    std::array<double, 2> psi_base{};
    std::array<double, 2> psi_end{};
    std::size_t nodes = 0;
};

/// Phi = int_0^1 psi(b + s (x - b)) . (x - b) ds along the ray from the base
/// point b to x = (r1, r2), with psi continued along the ray. Throws
/// BranchPointError (with the s-location) if the angle Jacobian degenerates.
GeneratingResult generating_function(double r1, double r2, const AngleTargets& targets, const LeafParams& leaf,
                                     const SystemParams& params, const GeneratingOptions& opts = {});

/// Continues the angles of `state` back along the ray to the base point and
/// returns the base angles on the state's branch.
std::array<double, 2> base_angles_for(const ReducedState& state, const SystemParams& params,
                                      const GeneratingOptions& opts);

struct AngleActionPoint {
    double gamma = 0, tau = 0;  // conjugate to G and H
    double G = 0, H = 0;
};

/// gamma = dPhi/dG, tau = dPhi/dH by central differences (step 1e-6 * scale).
/// If opts.base_psi_guess is to be derived from the state, use base_angles_for.
AngleActionPoint angle_action(const ReducedState& state, const SystemParams& params,
                              const GeneratingOptions& opts);

struct Reduce23Check {
    Trajectory full;     // flattened Z
    Trajectory reduced;  // r1, r2, psi1, psi2 (psi unwrapped); invariants H, G, R
    double ode_residual = 0;  // max |d/dt pushforward - kLeafBracketScale * reduced field|
    double drift_H = 0, drift_G = 0, drift_R = 0;  // max relative deviation
    double h_mismatch = 0;  // max |H polar - H full|
    double g_mismatch = 0;  // max |G polar - G from full-space quantities|
    double r_mismatch = 0;  // max |r_corrected - (r1 + r2 + r3)|
};

/// Integrates the quartic flow from Z0 and checks it against the reduced
/// description at every grid point.
Reduce23Check reduce23_consistency(const SystemParams& params, const WaveState& Z0, const std::vector<double>& grid,
                                   const IntegratorOptions& opts = {});

} // namespace nwave

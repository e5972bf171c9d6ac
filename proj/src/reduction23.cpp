#include "nwave/reduction23.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nwave/hierarchy.hpp"

namespace nwave {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double x) {
    double y = std::remainder(x, 2 * kPi);
    if (y <= -kPi) y += 2 * kPi;
    return y;
}

void require_23(const SystemParams& p) {
    if (p.a.size() != 2 || p.d.size() != 3)
        throw DimensionError("the (2+3) reduction needs n+ = 2 and n- = 3");
}

void require_23(const WaveState& s) {
    if (s.Z.rows() != 2 || s.Z.cols() != 3) throw DimensionError("the (2+3) reduction needs a 2x3 state");
}

// The three square-root couplings f = 1/2 sqrt(P1 P2), f1 = 1/2 sqrt(P1 P3),
// f2 = 1/2 sqrt(P2 P3), P_k = s_k^2 - r_k^2, with r3 = r - r1 - r2, and their
// derivatives in (r1, r2).
struct Couplings {
    std::array<double, 3> val{};  // f, f1, f2
    std::array<double, 3> d1{};   // d/dr1
    std::array<double, 3> d2{};   // d/dr2
};

Couplings couplings(const LeafParams& leaf, double r1, double r2) {
    const std::array<double, 3> r{r1, r2, leaf.r - r1 - r2};
    std::array<double, 3> P{};
    std::array<bool, 3> frozen{};
    for (int k = 0; k < 3; ++k) {
        const double s = leaf.s[static_cast<size_t>(k)];
        if (s < 0) throw DomainError("sphere " + std::to_string(k + 1) + " has negative radius");
        frozen[k] = (s == 0.0);
        P[k] = s * s - r[k] * r[k];
        if (frozen[k]) {
            if (std::abs(r[k]) > 1e-12) throw DomainError("degenerate sphere " + std::to_string(k + 1) + " needs r = 0");
        } else if (!(P[k] > 0.0)) {
            throw DomainError("square root vanishes on sphere " + std::to_string(k + 1) + " (|r" +
                              std::to_string(k + 1) + "| >= s" + std::to_string(k + 1) + ")");
        }
    }
    // dP_k/dr1, dP_k/dr2
    const std::array<double, 3> dP1{-2 * r[0], 0.0, 2 * r[2]};
    const std::array<double, 3> dP2{0.0, -2 * r[1], 2 * r[2]};
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    Couplings c;
    for (int q = 0; q < 3; ++q) {
        const int i = pairs[q][0], j = pairs[q][1];
        if (frozen[i] || frozen[j]) continue;
        const double root = std::sqrt(P[i] * P[j]);
        c.val[q] = 0.5 * root;
        c.d1[q] = (dP1[i] * P[j] + P[i] * dP1[j]) / (4 * root);
        c.d2[q] = (dP2[i] * P[j] + P[i] * dP2[j]) / (4 * root);
    }
    return c;
}

struct PolyPart {
    double val, d1, d2;
};

PolyPart h_poly(const LeafParams& leaf, const SystemParams& p, double r1, double r2) {
    const auto& s = leaf.s;
    const auto& d = p.d;
    const double a1 = p.a[0], a2 = p.a[1];
    const double r = leaf.r, r3 = r - r1 - r2;
    const double S = s[0] + s[1] + s[2];
    const double val = -0.25 * (r1 * r1 + r2 * r2 + r3 * r3) + 0.25 * (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) +
                       0.25 * r * r + 0.5 * (a1 - a2) * (d[0] * r1 + d[1] * r2 + d[2] * r3) + 0.25 * S * S +
                       0.5 * (a1 + a2) * (d[0] * s[0] + d[1] * s[1] + d[2] * s[2]);
    return {val, -0.5 * r1 + 0.5 * r3 + 0.5 * (a1 - a2) * (d[0] - d[2]),
            -0.5 * r2 + 0.5 * r3 + 0.5 * (a1 - a2) * (d[1] - d[2])};
}

PolyPart g_poly(const LeafParams& leaf, const SystemParams& p, double r1, double r2) {
    const auto& s = leaf.s;
    const auto& d = p.d;
    const double a1 = p.a[0], a2 = p.a[1];
    const double r = leaf.r;
    const std::array<double, 3> rr{r1, r2, r - r1 - r2};
    double val = 0, dr = 0;
    for (int k = 0; k < 3; ++k) {
        val += -0.5 * d[k] * rr[k] * rr[k] + 0.5 * d[k] * s[k] * s[k] + 0.5 * (a1 - a2) * d[k] * d[k] * rr[k];
        dr += d[k] * rr[k];
    }
    val += 0.5 * r * dr;
    auto deriv = [&](int i) {
        return -d[i] * rr[i] + d[2] * rr[2] + 0.5 * (a1 - a2) * (d[i] * d[i] - d[2] * d[2]) + 0.5 * r * (d[i] - d[2]);
    };
    return {val, deriv(0), deriv(1)};
}

// Coefficients of the three couplings: 1 for H; d_i + d_j for G.
std::array<double, 3> coupling_weights(const SystemParams& p, bool is_g) {
    if (!is_g) return {1.0, 1.0, 1.0};
    return {p.d[0] + p.d[1], p.d[0] + p.d[2], p.d[1] + p.d[2]};
}

struct Eval {
    double val;
    double dr1, dr2, dpsi1, dpsi2;
};

Eval evaluate(const LeafParams& leaf, const SystemParams& p, double r1, double r2, double psi1, double psi2,
              bool is_g) {
    require_23(p);
    const Couplings c = couplings(leaf, r1, r2);
    const PolyPart poly = is_g ? g_poly(leaf, p, r1, r2) : h_poly(leaf, p, r1, r2);
    const auto w = coupling_weights(p, is_g);
    const std::array<double, 3> cs{std::cos(psi1 - psi2), std::cos(psi1), std::cos(psi2)};
    const std::array<double, 3> sn{std::sin(psi1 - psi2), std::sin(psi1), std::sin(psi2)};
    Eval e{poly.val, poly.d1, poly.d2, 0, 0};
    for (int q = 0; q < 3; ++q) {
        e.val += w[q] * c.val[q] * cs[q];
        e.dr1 += w[q] * c.d1[q] * cs[q];
        e.dr2 += w[q] * c.d2[q] * cs[q];
    }
    e.dpsi1 = -w[0] * c.val[0] * sn[0] - w[1] * c.val[1] * sn[1];
    e.dpsi2 = w[0] * c.val[0] * sn[0] - w[2] * c.val[2] * sn[2];
    return e;
}

Eval evaluate(const ReducedState& s, const SystemParams& p, bool is_g) {
    return evaluate(s.leaf, p, s.r1, s.r2, s.psi1, s.psi2, is_g);
}

} // namespace

LeafCoords to_leaf_coords(const Vec3c& z, const Vec3c& v) {
    LeafCoords c;
    for (size_t k = 0; k < 3; ++k) {
        c.eta[k] = std::conj(v[k]) * z[k];
        c.r[k] = std::norm(z[k]) - std::norm(v[k]);
        c.s[k] = std::norm(z[k]) + std::norm(v[k]);
    }
    return c;
}

LeafCoords to_leaf_coords(const WaveState& state) {
    require_23(state);
    Vec3c z, v;
    for (Eigen::Index k = 0; k < 3; ++k) {
        z[static_cast<size_t>(k)] = state.Z(0, k);
        v[static_cast<size_t>(k)] = state.Z(1, k);
    }
    return to_leaf_coords(z, v);
}

std::array<Eigen::Matrix2cd, 3> momentum_map(const Vec3c& z, const Vec3c& v) {
    std::array<Eigen::Matrix2cd, 3> J;
    const Complex I(0, 1);
    for (size_t k = 0; k < 3; ++k) {
        Eigen::Matrix2cd M;
        M << std::norm(z[k]), std::conj(v[k]) * z[k], v[k] * std::conj(z[k]), std::norm(v[k]);
        J[k] = I * M;
    }
    return J;
}

PolarLeafState to_polar(const LeafCoords& c) {
    PolarLeafState p;
    for (size_t k = 0; k < 3; ++k) {
        p.s[k] = c.s[k];
        p.r[k] = c.r[k];
        p.phi[k] = std::arg(std::conj(c.eta[k]));
    }
    return p;
}

WaveState from_polar(const PolarLeafState& p) {
    WaveState w{ComplexMatrix(2, 3)};
    for (size_t k = 0; k < 3; ++k) {
        if (p.s[k] < 0 || std::abs(p.r[k]) > p.s[k])
            throw DomainError("from_polar: |r" + std::to_string(k + 1) + "| > s" + std::to_string(k + 1));
        const double zm = std::sqrt(0.5 * (p.s[k] + p.r[k]));
        const double vm = std::sqrt(std::max(0.0, 0.5 * (p.s[k] - p.r[k])));
        const auto kk = static_cast<Eigen::Index>(k);
        w.Z(0, kk) = zm;
        w.Z(1, kk) = std::polar(vm, p.phi[k]);
    }
    return w;
}

ReducedState to_reduced(const WaveState& state) {
    const PolarLeafState p = to_polar(to_leaf_coords(state));
    ReducedState s;
    s.leaf.s = p.s;
    s.leaf.r = p.r[0] + p.r[1] + p.r[2];
    s.r1 = p.r[0];
    s.r2 = p.r[1];
    s.psi1 = wrap_angle(p.phi[0] - p.phi[2]);
    s.psi2 = wrap_angle(p.phi[1] - p.phi[2]);
    return s;
}

ReducedInvariants reduced_invariants(const PolarLeafState& state, const SystemParams& params) {
    require_23(params);
    for (size_t k = 0; k < 3; ++k)
        if (std::abs(state.r[k]) > state.s[k])
            throw DomainError("|r" + std::to_string(k + 1) + "| > s" + std::to_string(k + 1));
    ReducedState s;
    s.leaf.s = state.s;
    s.leaf.r = state.r[0] + state.r[1] + state.r[2];
    s.r1 = state.r[0];
    s.r2 = state.r[1];
    s.psi1 = state.phi[0] - state.phi[2];
    s.psi2 = state.phi[1] - state.phi[2];
    // Pole and boundary points are legitimate here: evaluate the couplings
    // directly so that vanishing roots contribute zero.
    const auto& p = params;
    const std::array<double, 3> P{state.s[0] * state.s[0] - state.r[0] * state.r[0],
                                  state.s[1] * state.s[1] - state.r[1] * state.r[1],
                                  state.s[2] * state.s[2] - state.r[2] * state.r[2]};
    auto root = [&](int i, int j) { return 0.5 * std::sqrt(std::max(0.0, P[i]) * std::max(0.0, P[j])); };
    const std::array<double, 3> f{root(0, 1), root(0, 2), root(1, 2)};
    const std::array<double, 3> cs{std::cos(s.psi1 - s.psi2), std::cos(s.psi1), std::cos(s.psi2)};
    const auto wg = coupling_weights(p, true);
    double H = h_poly(s.leaf, p, s.r1, s.r2).val, G = g_poly(s.leaf, p, s.r1, s.r2).val;
    for (int q = 0; q < 3; ++q) {
        H += f[q] * cs[q];
        G += wg[q] * f[q] * cs[q];
    }
    return {H, G, s.leaf.r};
}

double reduced_h(const ReducedState& state, const SystemParams& params) { return evaluate(state, params, false).val; }
double reduced_g(const ReducedState& state, const SystemParams& params) { return evaluate(state, params, true).val; }

double r_corrected(const SystemParams& params, const WaveState& state) {
    require_23(params);
    const double a1 = params.a[0], a2 = params.a[1];
    if (a1 == a2) throw DomainError("R needs a1 != a2");
    return (2 * manley_rowe(params, state, 1).alpha - (a1 + a2) * manley_rowe(params, state, 0).alpha) / (a1 - a2);
}

double r_printed(const SystemParams& params, const WaveState& state) {
    require_23(params);
    const double a1 = params.a[0], a2 = params.a[1];
    if (a1 == a2) throw DomainError("R needs a1 != a2");
    return manley_rowe(params, state, 0).alpha - 2.0 / (a2 - a1) * manley_rowe(params, state, 1).alpha;
}

double g_from_full_space(const SystemParams& params, const WaveState& state) {
    require_23(params);
    require_23(state);
    const double a1 = params.a[0], a2 = params.a[1];
    const auto hf = quartic_quintic(params, state);
    const LeafCoords c = to_leaf_coords(state);
    const double R = c.r[0] + c.r[1] + c.r[2];
    const double S = c.s[0] + c.s[1] + c.s[2];
    double ds = 0, d2s = 0;
    for (size_t k = 0; k < 3; ++k) {
        ds += params.d[k] * c.s[k];
        d2s += params.d[k] * params.d[k] * c.s[k];
    }
    return hf.F - (a1 + a2) * hf.H + 0.5 * (a2 - a1) * S * R + a1 * a2 * manley_rowe(params, state, 1).delta -
           0.5 * (a1 + a2) * d2s - 0.5 * S * ds;
}

ReducedDerivative reduced_vector_field(const ReducedState& state, const SystemParams& params) {
    const Eval e = evaluate(state, params, false);
    return {e.dpsi1, e.dpsi2, -e.dr1, -e.dr2};
}

ReducedDerivative reduced_g_vector_field(const ReducedState& state, const SystemParams& params) {
    const Eval e = evaluate(state, params, true);
    return {e.dpsi1, e.dpsi2, -e.dr1, -e.dr2};
}

VectorField make_reduced23_field(const LeafParams& leaf, const SystemParams& params) {
    require_23(params);
    return [leaf, params](double, std::span<const double> y, std::span<double> dy) {
        ReducedState s{leaf, y[0], y[1], y[2], y[3]};
        const ReducedDerivative d = reduced_vector_field(s, params);
        dy[0] = d.dr1;
        dy[1] = d.dr2;
        dy[2] = d.dpsi1;
        dy[3] = d.dpsi2;
    };
}

namespace {

struct NewtonOutcome {
    std::array<double, 2> psi;
    double det;  // Jacobian determinant at the solution
};

NewtonOutcome newton_angles(double r1, double r2, const AngleTargets& t, const LeafParams& leaf,
                            const SystemParams& p, std::array<double, 2> psi) {
    const double scale = std::max({1.0, std::abs(t.H), std::abs(t.G)});
    for (int it = 0; it < 50; ++it) {
        const Eval h = evaluate(leaf, p, r1, r2, psi[0], psi[1], false);
        const Eval g = evaluate(leaf, p, r1, r2, psi[0], psi[1], true);
        const double fH = h.val - t.H, fG = g.val - t.G;
        const double det = h.dpsi1 * g.dpsi2 - h.dpsi2 * g.dpsi1;
        if (std::abs(fH) <= 1e-12 * scale && std::abs(fG) <= 1e-12 * scale) return {psi, det};
        const double jn = std::abs(h.dpsi1) + std::abs(h.dpsi2) + std::abs(g.dpsi1) + std::abs(g.dpsi2);
        if (!(std::abs(det) > 1e-14 * jn * jn))
            throw BranchPointError("singular angle Jacobian", {r1, r2, psi[0], psi[1]});
        double s1 = -(g.dpsi2 * fH - h.dpsi2 * fG) / det;
        double s2 = -(-g.dpsi1 * fH + h.dpsi1 * fG) / det;
        const double len = std::hypot(s1, s2);
        if (len > 0.5) {
            s1 *= 0.5 / len;
            s2 *= 0.5 / len;
        }
        psi[0] += s1;
        psi[1] += s2;
        if (!std::isfinite(psi[0]) || !std::isfinite(psi[1]))
            throw ConvergenceError("angle Newton diverged", {r1, r2, psi[0], psi[1]});
    }
    throw ConvergenceError("angle Newton did not converge in 50 iterations", {r1, r2, psi[0], psi[1]});
}

// Continuation of the angles along b + s (x - b), s in [0, 1].
struct Ray {
    std::vector<double> s;
    std::vector<std::array<double, 2>> psi;
};

Ray continue_ray(double b1, double b2, double x1, double x2, const AngleTargets& t, const LeafParams& leaf,
                 const SystemParams& p, std::array<double, 2> guess, int min_nodes) {
    Ray ray;
    NewtonOutcome o = newton_angles(b1, b2, t, leaf, p, guess);
    ray.s.push_back(0.0);
    ray.psi.push_back(o.psi);
    double sign = o.det > 0 ? 1.0 : -1.0;
    const double hmax = 1.0 / std::max(1, min_nodes);
    double h = hmax, s = 0.0;
    while (s < 1.0) {
        const double sn = std::min(1.0, s + h);
        std::array<double, 2> pred = ray.psi.back();
        if (ray.s.size() >= 2) {
            const size_t n = ray.s.size();
            const double w = (sn - ray.s[n - 1]) / (ray.s[n - 1] - ray.s[n - 2]);
            for (int i = 0; i < 2; ++i) pred[i] += w * (ray.psi[n - 1][i] - ray.psi[n - 2][i]);
        }
        bool ok = false;
        NewtonOutcome next{};
        try {
            next = newton_angles(b1 + sn * (x1 - b1), b2 + sn * (x2 - b2), t, leaf, p, pred);
            const double jump = std::hypot(next.psi[0] - pred[0], next.psi[1] - pred[1]);
            ok = jump < 0.1 && (next.det > 0 ? 1.0 : -1.0) == sign;
        } catch (const ConvergenceError&) {
        } catch (const BranchPointError&) {
        }
        if (!ok) {
            h *= 0.5;
            if (h < 1e-7)
                throw BranchPointError("angle continuation hit a branch point", {ray.psi.back()[0], ray.psi.back()[1]},
                                       s);
            continue;
        }
        s = sn;
        ray.s.push_back(s);
        ray.psi.push_back(next.psi);
        h = std::min(hmax, 1.5 * h);
    }
    return ray;
}

std::array<double, 2> interpolate(const Ray& ray, double s) {
    auto it = std::upper_bound(ray.s.begin(), ray.s.end(), s);
    size_t j = static_cast<size_t>(std::distance(ray.s.begin(), it));
    if (j == 0) return ray.psi.front();
    if (j >= ray.s.size()) return ray.psi.back();
    const double w = (s - ray.s[j - 1]) / (ray.s[j] - ray.s[j - 1]);
    return {ray.psi[j - 1][0] + w * (ray.psi[j][0] - ray.psi[j - 1][0]),
            ray.psi[j - 1][1] + w * (ray.psi[j][1] - ray.psi[j - 1][1])};
}

} // namespace

std::array<double, 2> solve_angles(double r1, double r2, const AngleTargets& targets, const LeafParams& leaf,
                                   const SystemParams& params, std::array<double, 2> guess) {
    require_23(params);
    return newton_angles(r1, r2, targets, leaf, params, guess).psi;
}

GeneratingResult generating_function(double r1, double r2, const AngleTargets& targets, const LeafParams& leaf,
                                     const SystemParams& params, const GeneratingOptions& opts) {
    require_23(params);
    const double b1 = opts.base_r1, b2 = opts.base_r2;
    const Ray ray = continue_ray(b1, b2, r1, r2, targets, leaf, params, opts.base_psi_guess, opts.min_nodes);
    const double dx1 = r1 - b1, dx2 = r2 - b2;

    auto integrand = [&](double s) {
        const std::array<double, 2> guess = interpolate(ray, s);
        const NewtonOutcome o = newton_angles(b1 + s * dx1, b2 + s * dx2, targets, leaf, params, guess);
        if (std::hypot(o.psi[0] - guess[0], o.psi[1] - guess[1]) > 0.1)
            throw BranchPointError("quadrature node left the continued branch", {o.psi[0], o.psi[1]}, s);
        return o.psi[0] * dx1 + o.psi[1] * dx2;
    };
    double err = 0;
    const double Phi =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 12, opts.quad_tol, &err);
    if (!std::isfinite(Phi)) throw NumericalError("generating function quadrature is not finite");
    if (err > 1e3 * opts.quad_tol * std::max(1.0, std::abs(Phi)))
        throw NumericalError("generating function quadrature did not converge (error estimate " +
                             std::to_string(err) + ")");
    GeneratingResult res;
    res.Phi = Phi;
    res.psi_base = ray.psi.front();
    res.psi_end = ray.psi.back();
    res.nodes = ray.s.size();
    return res;
}

std::array<double, 2> base_angles_for(const ReducedState& state, const SystemParams& params,
                                      const GeneratingOptions& opts) {
    require_23(params);
    const AngleTargets t{reduced_g(state, params), reduced_h(state, params)};
    const Ray back = continue_ray(state.r1, state.r2, opts.base_r1, opts.base_r2, t, state.leaf, params,
                                  {state.psi1, state.psi2}, opts.min_nodes);
    return back.psi.back();
}

AngleActionPoint angle_action(const ReducedState& state, const SystemParams& params, const GeneratingOptions& opts) {
    require_23(params);
    AngleActionPoint out;
    out.G = reduced_g(state, params);
    out.H = reduced_h(state, params);
    const double dG = 1e-6 * std::max(1.0, std::abs(out.G));
    const double dH = 1e-6 * std::max(1.0, std::abs(out.H));

    const GeneratingResult centre =
        generating_function(state.r1, state.r2, {out.G, out.H}, state.leaf, params, opts);
    // The base guess must land on the branch that reaches this state.
    const double mism = std::hypot(wrap_angle(centre.psi_end[0] - state.psi1), wrap_angle(centre.psi_end[1] - state.psi2));
    if (mism > 1e-6)
        throw BranchPointError("generating-function branch does not reach the state's angles",
                               {centre.psi_end[0], centre.psi_end[1]}, 1.0);

    GeneratingOptions o = opts;
    o.base_psi_guess = centre.psi_base;
    auto phi = [&](double G, double H) {
        return generating_function(state.r1, state.r2, {G, H}, state.leaf, params, o).Phi;
    };
    out.gamma = (phi(out.G + dG, out.H) - phi(out.G - dG, out.H)) / (2 * dG);
    out.tau = (phi(out.G, out.H + dH) - phi(out.G, out.H - dH)) / (2 * dH);
    return out;
}

} // namespace nwave

namespace nwave {

Reduce23Check reduce23_consistency(const SystemParams& params, const WaveState& Z0, const std::vector<double>& grid,
                                   const IntegratorOptions& opts) {
    require_23(params);
    require_23(Z0);
    Reduce23Check out;
    const InvariantSet inv = wave_invariants(params);
    out.full = integrate(make_wave_field(params, WaveFlow::Quartic), flatten(Z0.Z), grid, opts, coordinate_names(2, 3),
                         &inv);

    Trajectory& red = out.reduced;
    red.times = out.full.times;
    red.coordinate_names = {"r1", "r2", "psi1", "psi2"};
    red.invariant_names = {"H", "G", "R"};
    std::array<double, 2> prev{};
    std::array<double, 3> first{};
    for (size_t i = 0; i < out.full.states.size(); ++i) {
        const WaveState w{unflatten(out.full.states[i], 2, 3)};
        ReducedState s = to_reduced(w);
        if (i > 0) {
            s.psi1 += 2 * kPi * std::round((prev[0] - s.psi1) / (2 * kPi));
            s.psi2 += 2 * kPi * std::round((prev[1] - s.psi2) / (2 * kPi));
        }
        prev = {s.psi1, s.psi2};
        red.states.push_back({s.r1, s.r2, s.psi1, s.psi2});

        const double H = reduced_h(s, params), G = reduced_g(s, params), R = s.leaf.r;
        red.invariants.push_back({H, G, R});
        if (i == 0) first = {H, G, R};
        auto rel = [](double v, double v0) { return std::abs(v - v0) / std::max(std::abs(v0), 1e-300); };
        out.drift_H = std::max(out.drift_H, rel(H, first[0]));
        out.drift_G = std::max(out.drift_G, rel(G, first[1]));
        out.drift_R = std::max(out.drift_R, first[2] != 0.0 ? rel(R, first[2]) : std::abs(R));

        out.h_mismatch = std::max(out.h_mismatch, std::abs(H - quartic_quintic(params, w).H));
        out.g_mismatch = std::max(out.g_mismatch, std::abs(G - g_from_full_space(params, w)));
        out.r_mismatch = std::max(out.r_mismatch, std::abs(r_corrected(params, w) - R));

        // Exact time derivative of the pushforward from Zdot.
        const ComplexMatrix Zd = quartic_vector_field(params, w);
        std::array<double, 3> rdot{}, phidot{};
        for (Eigen::Index k = 0; k < 3; ++k) {
            const Complex z = w.Z(0, k), v = w.Z(1, k), zd = Zd(0, k), vd = Zd(1, k);
            rdot[static_cast<size_t>(k)] = 2 * (std::conj(z) * zd).real() - 2 * (std::conj(v) * vd).real();
            const Complex q = v * std::conj(z);
            phidot[static_cast<size_t>(k)] = ((vd * std::conj(z) + v * std::conj(zd)) / q).imag();
        }
        const ReducedDerivative f = reduced_vector_field(s, params);
        const double res[4] = {rdot[0] - kLeafBracketScale * f.dr1, rdot[1] - kLeafBracketScale * f.dr2,
                               phidot[0] - phidot[2] - kLeafBracketScale * f.dpsi1,
                               phidot[1] - phidot[2] - kLeafBracketScale * f.dpsi2};
        for (double r : res) out.ode_residual = std::max(out.ode_residual, std::abs(r));
    }
    red.drift = {out.drift_H, out.drift_G, out.drift_R};
    return out;
}

} // namespace nwave

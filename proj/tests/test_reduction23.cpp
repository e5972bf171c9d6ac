#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nwave/hierarchy.hpp"
#include "nwave/reduction23.hpp"
#include "nwave/verify.hpp"
#include "oracles.hpp"

using namespace nwave;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams params23() { return SystemParams{{0.3, -0.8}, {0.5, -0.4, 1.1}}; }

ReducedState sample_state() { return ReducedState{{{1.0, 1.3, 0.9}, 0.2}, 0.1, -0.2, 0.7, -0.4}; }

double wrap(double x) { return std::remainder(x, 2 * kPi); }

}  // namespace

TEST_CASE("leaf coordinates") {
    const Vec3c e1{1.0, 0.0, 0.0}, e2{0.0, 1.0, 0.0}, ones{1.0, 1.0, 1.0};
    auto c = to_leaf_coords(e1, e2);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(c.eta[k]) == 0.0);
    CHECK(c.r == Vec3{1, -1, 0});
    CHECK(c.s == Vec3{1, 1, 0});
    c = to_leaf_coords(ones, ones);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(c.eta[k] - 1.0) == 0.0);
    CHECK(c.r == Vec3{0, 0, 0});
    CHECK(c.s == Vec3{2, 2, 2});
    for (int i = 0; i < 10; ++i) {
        const auto w = random_state({2, 3}, 2.0, 71, i);
        const auto lc = to_leaf_coords(w);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(lc.s[k] * lc.s[k] - lc.r[k] * lc.r[k] - 4 * std::norm(lc.eta[k])) <= 1e-12 * 16);
            CHECK(std::abs(lc.r[k]) <= lc.s[k]);
        }
    }
    CHECK_THROWS_AS(to_leaf_coords(WaveState{ComplexMatrix::Zero(3, 2)}), DimensionError);
}

TEST_CASE("momentum map") {
    const auto J = momentum_map({1.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    Eigen::Matrix2cd e;
    e << Complex(0, 1), 0, 0, 0;
    CHECK((J[0] - e).norm() == 0.0);
    CHECK(J[1].norm() == 0.0);
    CHECK(J[2].norm() == 0.0);

    const auto w = random_state({2, 3}, 1.0, 73, 0);
    Vec3c z, v;
    for (int k = 0; k < 3; ++k) {
        z[k] = w.Z(0, k);
        v[k] = w.Z(1, k);
    }
    for (const auto& Jk : momentum_map(z, v)) {
        const Eigen::Matrix2cd M = Complex(0, -1) * Jk;
        CHECK((M - M.adjoint()).norm() <= 1e-15);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(M);
        CHECK(es.eigenvalues()(0) >= -1e-14);
        CHECK(std::abs(es.eigenvalues()(0)) <= 1e-14 * std::max(1.0, es.eigenvalues()(1)));  // rank <= 1
    }
}

TEST_CASE("polar coordinates round-trip") {
    const auto w = random_state({2, 3}, 1.0, 79, 0);
    const auto pol = to_polar(to_leaf_coords(w));
    const auto back = to_polar(to_leaf_coords(from_polar(pol)));
    for (int k = 0; k < 3; ++k) {
        CHECK(back.s[k] == doctest::Approx(pol.s[k]).epsilon(1e-13));
        CHECK(back.r[k] == doctest::Approx(pol.r[k]).epsilon(1e-13));
        CHECK(std::abs(wrap(back.phi[k] - pol.phi[k])) <= 1e-12);
    }
}

TEST_CASE("reduced invariants") {
    const SystemParams p = params23();
    SUBCASE("at the poles only the polynomial part survives") {
        const PolarLeafState poles{{1, 1.5, 0.5}, {1, 1.5, 0.5}, {0.3, -1.0, 2.0}};
        const PolarLeafState rotated{{1, 1.5, 0.5}, {1, 1.5, 0.5}, {-2.0, 0.1, 0.7}};
        CHECK(reduced_invariants(poles, p).H == doctest::Approx(reduced_invariants(rotated, p).H).epsilon(1e-14));
        CHECK(reduced_invariants(poles, p).G == doctest::Approx(reduced_invariants(rotated, p).G).epsilon(1e-14));
    }
    SUBCASE("R is the sum of the r_k") {
        const PolarLeafState st{{2, 3, 4}, {1, 2, 3}, {0, 0, 0}};
        CHECK(reduced_invariants(st, p).R == doctest::Approx(6.0));
        const PolarLeafState bad{{1, 1, 1}, {1.5, 0, 0}, {0, 0, 0}};
        CHECK_THROWS_AS(reduced_invariants(bad, p), DomainError);
    }
    SUBCASE("polar H, G, R agree with the full-space expressions") {
        for (int i = 0; i < 10; ++i) {
            const auto w = random_state({2, 3}, 1.5, 83, i);
            const auto ri = reduced_invariants(to_polar(to_leaf_coords(w)), p);
            const double H = quartic_quintic(p, w).H;
            CHECK(std::abs(ri.H - H) <= 1e-9 * std::max(1.0, std::abs(H)));
            CHECK(std::abs(ri.G - g_from_full_space(p, w)) <= 1e-9 * std::max(1.0, std::abs(ri.G)));
            CHECK(std::abs(ri.R - r_corrected(p, w)) <= 1e-12 * std::max(1.0, std::abs(ri.R)));
        }
    }
    SUBCASE("the alternative R normalisation is not r1 + r2 + r3") {
        const auto w = random_state({2, 3}, 1.0, 89, 0);
        CHECK(std::abs(r_printed(p, w) - r_corrected(p, w)) > 1e-3);
    }
    SUBCASE("reduced_h / reduced_g match the polar invariants") {
        const auto w = random_state({2, 3}, 1.0, 97, 0);
        const auto pol = to_polar(to_leaf_coords(w));
        const auto rs = to_reduced(w);
        CHECK(reduced_h(rs, p) == doctest::Approx(reduced_invariants(pol, p).H).epsilon(1e-12));
        CHECK(reduced_g(rs, p) == doctest::Approx(reduced_invariants(pol, p).G).epsilon(1e-12));
        CHECK(rs.r3() == doctest::Approx(pol.r[2]).epsilon(1e-12));
    }
}

TEST_CASE("reduced vector fields") {
    const SystemParams p = params23();
    ReducedState st = sample_state();
    st.psi1 = st.psi2 = 0;
    auto f = reduced_vector_field(st, p);
    CHECK(std::abs(f.dr1) <= 1e-15);
    CHECK(std::abs(f.dr2) <= 1e-15);

    for (int which = 0; which < 2; ++which) {
        const ReducedState s0 = sample_state();
        auto value = [&](const ReducedState& s) { return which == 0 ? reduced_h(s, p) : reduced_g(s, p); };
        auto vary = [&](int c) {
            return [&, c](double x) {
                ReducedState s = s0;
                (c == 0 ? s.r1 : c == 1 ? s.r2 : c == 2 ? s.psi1 : s.psi2) = x;
                return value(s);
            };
        };
        const double dHdr1 = oracle::derivative(vary(0), s0.r1), dHdr2 = oracle::derivative(vary(1), s0.r2);
        const double dHdp1 = oracle::derivative(vary(2), s0.psi1), dHdp2 = oracle::derivative(vary(3), s0.psi2);
        const auto v = which == 0 ? reduced_vector_field(s0, p) : reduced_g_vector_field(s0, p);
        CHECK(std::abs(v.dr1 - dHdp1) <= 1e-8);
        CHECK(std::abs(v.dr2 - dHdp2) <= 1e-8);
        CHECK(std::abs(v.dpsi1 + dHdr1) <= 1e-8);
        CHECK(std::abs(v.dpsi2 + dHdr2) <= 1e-8);
    }

    ReducedState edge = sample_state();
    edge.r1 = 1.0;  // on the pole of a non-degenerate sphere
    CHECK_THROWS_AS(reduced_vector_field(edge, p), DomainError);
}

TEST_CASE("pushforward of the full flow satisfies the reduced equations") {
    const SystemParams p = params23();
    for (int i = 0; i < 3; ++i) {
        const auto w = random_state({2, 3}, 1.0, 101, i);
        const auto rc = reduce23_consistency(p, w, uniform_grid(0, 5, 51));
        CHECK(rc.ode_residual <= 1e-5);
        CHECK(rc.drift_H <= 1e-7);
        CHECK(rc.drift_G <= 1e-7);
        CHECK(rc.drift_R <= 1e-7);
        CHECK(rc.g_mismatch <= 1e-8);
        CHECK(rc.h_mismatch <= 1e-8);
        CHECK(rc.r_mismatch <= 1e-10);
    }
}

TEST_CASE("solve_angles") {
    const SystemParams p = params23();
    const ReducedState st = sample_state();
    const AngleTargets tg{reduced_g(st, p), reduced_h(st, p)};
    const auto psi = solve_angles(st.r1, st.r2, tg, st.leaf, p, {st.psi1 + 0.05, st.psi2 - 0.04});
    CHECK(std::abs(wrap(psi[0] - st.psi1)) <= 1e-10);
    CHECK(std::abs(wrap(psi[1] - st.psi2)) <= 1e-10);

    ReducedState zero = st;
    zero.psi1 = zero.psi2 = 0;
    const AngleTargets tz{reduced_g(zero, p), reduced_h(zero, p)};
    const auto pz = solve_angles(zero.r1, zero.r2, tz, zero.leaf, p, {0.0, 0.0});
    CHECK(pz[0] == 0.0);
    CHECK(pz[1] == 0.0);

    const AngleTargets unreachable{tg.G, tg.H + 100.0};
    CHECK_THROWS_AS(solve_angles(st.r1, st.r2, unreachable, st.leaf, p, {0.7, -0.4}), NumericalError);
}

TEST_CASE("generating function") {
    const SystemParams p = params23();
    const ReducedState st = sample_state();
    const AngleTargets tg{reduced_g(st, p), reduced_h(st, p)};
    GeneratingOptions go;
    go.base_psi_guess = base_angles_for(st, p, go);

    SUBCASE("vanishes at the base point") {
        const auto g0 = generating_function(0.0, 0.0, tg, st.leaf, p, go);
        CHECK(g0.Phi == 0.0);
    }
    SUBCASE("dPhi/dr_i reproduces psi_i") {
        const auto res = generating_function(st.r1, st.r2, tg, st.leaf, p, go);
        CHECK(std::abs(wrap(res.psi_end[0] - st.psi1)) <= 1e-9);
        auto phi_at = [&](double r1, double r2) { return generating_function(r1, r2, tg, st.leaf, p, go).Phi; };
        const double h = 1e-4;
        const double d1 = (phi_at(st.r1 + h, st.r2) - phi_at(st.r1 - h, st.r2)) / (2 * h);
        const double d2 = (phi_at(st.r1, st.r2 + h) - phi_at(st.r1, st.r2 - h)) / (2 * h);
        CHECK(std::abs(d1 - res.psi_end[0]) <= 1e-6);
        CHECK(std::abs(d2 - res.psi_end[1]) <= 1e-6);
    }
    SUBCASE("symmetric configuration") {
        // s1 = s2, d1 = d2: swapping (r1, psi1) <-> (r2, psi2) preserves H and G, so
        // Phi at swapped points agrees when the base angles are swapped too.
        // (psi1 = psi2 on the diagonal would be a branch point, so keep them apart.)
        const SystemParams ps{{0.3, -0.8}, {0.5, 0.5, 1.1}};
        const LeafParams leaf{{1.1, 1.1, 0.9}, 0.1};
        const ReducedState a{leaf, 0.2, 0.1, 0.6, 0.2}, b{leaf, 0.1, 0.2, 0.2, 0.6};
        CHECK(reduced_h(a, ps) == doctest::Approx(reduced_h(b, ps)).epsilon(1e-14));
        CHECK(reduced_g(a, ps) == doctest::Approx(reduced_g(b, ps)).epsilon(1e-14));
        const AngleTargets ts{reduced_g(a, ps), reduced_h(a, ps)};
        GeneratingOptions oa, ob;
        oa.base_psi_guess = base_angles_for(a, ps, oa);
        ob.base_psi_guess = {oa.base_psi_guess[1], oa.base_psi_guess[0]};
        const double pa = generating_function(a.r1, a.r2, ts, leaf, ps, oa).Phi;
        const double pb = generating_function(b.r1, b.r2, ts, leaf, ps, ob).Phi;
        CHECK(std::abs(pa - pb) <= 1e-10);
    }
}

TEST_CASE("angle-action coordinates linearise the flow") {
    const SystemParams p = params23();
    const LeafParams leaf{{1.0, 1.3, 0.9}, 0.2};
    const std::vector<double> y0{0.0, 0.0, 0.7, -0.4};
    IntegratorOptions io;
    io.rel_tol = 1e-12;
    io.abs_tol = 1e-14;
    const auto grid = uniform_grid(0, 0.6, 11);
    const auto tr = integrate(make_reduced23_field(leaf, p), y0, grid, io);
    GeneratingOptions go;
    go.base_psi_guess = base_angles_for(ReducedState{leaf, y0[0], y0[1], y0[2], y0[3]}, p, go);
    double tmin = 1e300, tmax = -1e300, gmin = 1e300, gmax = -1e300;
    AngleActionPoint first{};
    for (size_t i = 0; i < grid.size(); ++i) {
        const auto& y = tr.states[i];
        const auto pt = angle_action(ReducedState{leaf, y[0], y[1], y[2], y[3]}, p, go);
        if (i == 0) first = pt;
        CHECK(std::abs(pt.G - first.G) <= 1e-8);
        CHECK(std::abs(pt.H - first.H) <= 1e-8);
        tmin = std::min(tmin, pt.tau - grid[i]);
        tmax = std::max(tmax, pt.tau - grid[i]);
        gmin = std::min(gmin, pt.gamma);
        gmax = std::max(gmax, pt.gamma);
    }
    CHECK(tmax - tmin <= 1e-4);
    CHECK(gmax - gmin <= 1e-4);
}

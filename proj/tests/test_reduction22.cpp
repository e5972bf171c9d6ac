#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nwave/reduction22.hpp"
#include "nwave/reduction23.hpp"
#include "oracles.hpp"

using namespace nwave;

namespace {

constexpr double kPi = std::numbers::pi;

Leaf22 generic_leaf() { return Leaf22{1.0, 1.3, 0.2, 0.3, -0.8, 0.5, -0.4}; }
Leaf22 harmonic_leaf(double s) { return Leaf22{s, s, 0.0, 0.4, 0.4, 0.5, -0.4}; }

double pq(double r1, const Leaf22& l) {
    return (l.s1 * l.s1 - r1 * r1) * (l.s2 * l.s2 - (l.r - r1) * (l.r - r1));
}

}  // namespace

TEST_CASE("w2") {
    SUBCASE("equal a, equal radii, r = 0: a downward parabola") {
        const Leaf22 l = harmonic_leaf(1.2);
        const auto c = w2_coefficients(l);
        CHECK(c[1] == doctest::Approx(0.0));
        CHECK(c[2] == doctest::Approx(-0.5));
        for (double r1 : {-0.7, 0.1, 0.9}) CHECK(w2(r1, l) == doctest::Approx(c[0] - 0.5 * r1 * r1));
    }
    SUBCASE("value at r1 = 0") {
        const Leaf22 l = generic_leaf();
        const double expect = -l.r * l.r / 4 + 0.25 * (l.s1 * l.s1 + l.s2 * l.s2) + 0.25 * l.r * l.r +
                              0.5 * (l.a1 - l.a2) * l.d2 * l.r + 0.25 * (l.s1 + l.s2) * (l.s1 + l.s2) +
                              0.5 * (l.a1 + l.a2) * (l.d1 * l.s1 + l.d2 * l.s2);
        CHECK(w2(0.0, l) == doctest::Approx(expect).epsilon(1e-14));
    }
    SUBCASE("equals H at psi1 = pi/2") {
        const Leaf22 l = generic_leaf();
        for (double r1 : {-0.5, 0.0, 0.3, 0.8}) CHECK(w2(r1, l) == doctest::Approx(h22(r1, kPi / 2, l)).epsilon(1e-14));
    }
    SUBCASE("Leaf22 validation") {
        CHECK_THROWS_AS((Leaf22{1, 1, 2.5, 0, 0, 0, 0}.validate()), ValidationError);
        CHECK_THROWS_AS((Leaf22{0, 1, 0, 0, 0, 0, 0}.validate()), ValidationError);
    }
}

TEST_CASE("quartic polynomial") {
    SUBCASE("w4(0) = 1 on the unit leaf at H = w2(0)") {
        const Leaf22 l{1, 1, 0, 0.3, -0.8, 0.5, -0.4};
        const auto q = expand_quartic(l, w2(0.0, l));
        CHECK(q.w4(0.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("coefficients reproduce the defining expression") {
        const Leaf22 l = generic_leaf();
        const double H = h22(0.1, 0.7, l);
        const auto q = expand_quartic(l, H);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const double r1 = u(rng);
            const double e = H - w2(r1, l);
            const double direct = pq(r1, l) - 4 * e * e;
            CHECK(std::abs(q.w4(r1) - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
        }
        for (double end : {-l.s1, l.s1}) {
            const double e = H - w2(end, l);
            CHECK(q.w4(end) < 0);
            CHECK(q.w4(end) == doctest::Approx(pq(end, l) - 4 * e * e).epsilon(1e-10));
        }
        CHECK(q.degree == 3);
        for (double root : q.roots) CHECK(std::abs(q.w4(root)) <= 1e-12);
    }
    SUBCASE("harmonic factorisation") {
        const double s = 1.2;
        const Leaf22 l = harmonic_leaf(s);
        const double E = -0.3;
        const double H = w2(0.0, l) + E;
        const auto q = build_quartic(l, H, 0.0);
        for (double r1 : {-0.5, 0.0, 0.4})
            CHECK(q.w4(r1) == doctest::Approx((s * s + 2 * E) * (s * s - 2 * E - 2 * r1 * r1)).epsilon(1e-12));
        const double root = std::sqrt((s * s - 2 * E) / 2);
        CHECK(q.rho_minus == doctest::Approx(-root).epsilon(1e-12));
        CHECK(q.rho_plus == doctest::Approx(root).epsilon(1e-12));
        const double T = 2 * kPi / std::sqrt((s * s + 2 * E) / 2);
        CHECK(std::abs(q.period - T) <= 1e-8 * T);
    }
    SUBCASE("empty energy level") {
        const Leaf22 l = generic_leaf();
        CHECK_THROWS_AS(build_quartic(l, 1e3), NoMotionError);
    }
}

TEST_CASE("time map and inversion") {
    const Leaf22 l = generic_leaf();
    const auto q = build_quartic(l, h22(0.1, 0.7, l), 0.1);
    CHECK(time_of_r1(q.rho_minus, q) == 0.0);
    CHECK(time_of_r1(q.rho_plus, q) == doctest::Approx(q.period / 2).epsilon(1e-12));
    CHECK_THROWS_AS(time_of_r1(q.rho_plus + 0.1, q), DomainError);
    CHECK(r1_of_t(0.0, q, 0.1, -1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r1_of_t(q.period, q, 0.1, -1) == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(r1_of_t(3 * q.period, q, 0.1, +1) == doctest::Approx(0.1).epsilon(1e-10));
    // Quadrature against a direct adaptive integral of 2/sqrt(w4) away from the endpoints.
    const double a = q.rho_minus + 0.2 * (q.rho_plus - q.rho_minus), b = q.rho_minus + 0.7 * (q.rho_plus - q.rho_minus);
    double direct = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {  // composite Simpson
        const double x0 = a + (b - a) * i / n, x1 = a + (b - a) * (i + 1) / n, xm = 0.5 * (x0 + x1);
        direct += (x1 - x0) / 6 * (2 / std::sqrt(q.w4(x0)) + 8 / std::sqrt(q.w4(xm)) + 2 / std::sqrt(q.w4(x1)));
    }
    CHECK(std::abs(time_of_r1(b, q) - time_of_r1(a, q) - direct) <= 1e-10 * direct);
}

TEST_CASE("psi1 reconstruction") {
    const Leaf22 l = generic_leaf();
    const double r1 = 0.2;
    auto q = expand_quartic(l, w2(r1, l) + 0.5 * std::sqrt(pq(r1, l)));
    CHECK(std::abs(psi1_of_r1(r1, q, l, +1)) <= 1e-7);
    q = expand_quartic(l, w2(r1, l));
    CHECK(psi1_of_r1(r1, q, l, +1) == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(psi1_of_r1(r1, q, l, -1) == doctest::Approx(-kPi / 2).epsilon(1e-12));
    q = expand_quartic(l, w2(r1, l) + std::sqrt(pq(r1, l)));
    CHECK_THROWS_AS(psi1_of_r1(r1, q, l, +1), ConsistencyError);
}

TEST_CASE("derived reduced field is Hamilton's equations for h22") {
    const Leaf22 l = generic_leaf();
    const auto field = make_reduced22_field(l);
    for (auto [r1, psi] : {std::pair{0.1, 0.7}, std::pair{-0.4, 2.5}, std::pair{0.6, -1.0}}) {
        std::vector<double> dy(2);
        field(0.0, std::vector<double>{r1, psi}, dy);
        const double dHdpsi = oracle::derivative([&](double x) { return h22(r1, x, l); }, psi);
        const double dHdr = oracle::derivative([&](double x) { return h22(x, psi, l); }, r1);
        CHECK(std::abs(dy[0] - dHdpsi) <= 1e-9);
        CHECK(std::abs(dy[1] + dHdr) <= 1e-9);
    }
}

TEST_CASE("solve_22") {
    IntegratorOptions io;
    io.rel_tol = 1e-12;
    io.abs_tol = 1e-14;
    SUBCASE("generic point against the ODE over two periods") {
        const Leaf22 l = generic_leaf();
        for (auto [r1_0, psi1_0] : {std::pair{0.1, 0.7}, std::pair{-0.05, -2.0}, std::pair{0.3, 0.0}}) {
            const double T = build_quartic(l, h22(r1_0, psi1_0, l), r1_0).period;
            const auto grid = uniform_grid(0, 2 * T, 301);
            const auto res = solve_22(l, r1_0, psi1_0, grid);
            CHECK(res.period == doctest::Approx(T));
            CHECK(res.turning_points >= 3);
            const auto sol = solve_dense(make_reduced22_field(l), {r1_0, psi1_0}, 0.0, 2.3 * T, io);
            double sup = 0, energy = 0;
            const double H0 = h22(r1_0, psi1_0, l);
            for (size_t i = 0; i < grid.size(); ++i) {
                const auto& s = res.trajectory.states[i];
                sup = std::max(sup, std::abs(s[0] - sol(grid[i])[0]));
                energy = std::max(energy, std::abs(h22(s[0], s[1], l) - H0));
                CHECK(std::abs(std::remainder(s[1] - sol(grid[i])[1], 2 * kPi)) <= 1e-5);
            }
            CHECK(sup <= 1e-6);
            CHECK(energy <= 1e-9);
            const double mid = 0.5 * (res.quartic.rho_minus + res.quartic.rho_plus);
            const auto cr = oracle::upward_crossings(sol, mid, 0.0, 2.3 * T);
            REQUIRE(cr.size() >= 2);
            CHECK(std::abs(cr[1] - cr[0] - T) <= 1e-6 * T);
        }
    }
    SUBCASE("harmonic case against the sine solution") {
        const double s = 1.1;
        const Leaf22 l = harmonic_leaf(s);
        const double r1_0 = 0.15, psi1_0 = 0.9;
        const double E = h22(r1_0, psi1_0, l) - w2(0.0, l);
        const auto h = oracle::harmonic(s, E, r1_0, psi1_0);
        const auto grid = uniform_grid(0, 4 * kPi / h.omega, 201);
        const auto res = solve_22(l, r1_0, psi1_0, grid);
        double sup = 0;
        for (size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(res.trajectory.states[i][0] - h.r1(grid[i])));
        CHECK(sup <= 1e-8);
        CHECK(res.period == doctest::Approx(2 * kPi / h.omega).epsilon(1e-10));
    }
    SUBCASE("equilibrium stays put") {
        // psi1 = 0 and the top of H over r1 at that angle: a double root of w4.
        const Leaf22 l = generic_leaf();
        auto dH = [&](double r1) { return oracle::derivative([&](double x) { return h22(x, 0.0, l); }, r1, 1e-4); };
        double lo = -0.8, hi = 0.8;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            (dH(mid) > 0 ? lo : hi) = mid;
        }
        const double r_eq = 0.5 * (lo + hi);
        const auto res = solve_22(l, r_eq, 0.0, uniform_grid(0, 5, 11));
        CHECK(res.equilibrium);
        for (const auto& st : res.trajectory.states) {
            CHECK(st[0] == doctest::Approx(r_eq).epsilon(1e-9));
            CHECK(std::abs(st[1]) <= 1e-6);
        }
    }
}

TEST_CASE("a (2+3) leaf with a collapsed third sphere reproduces the (2+2) motion") {
    const SystemParams p{{0.3, -0.8}, {0.5, -0.4, 1.1}};
    const Leaf22 l = Leaf22::from(p, 1.0, 1.3, 0.2);
    const LeafParams leaf{{1.0, 1.3, 0.0}, 0.2};
    const double r1_0 = 0.1, psi1_0 = 0.7;
    const double r2_0 = 0.2 - r1_0;
    IntegratorOptions io;
    io.rel_tol = 1e-12;
    io.abs_tol = 1e-14;
    const auto grid = uniform_grid(0, 8, 81);
    const auto full = integrate(make_reduced23_field(leaf, p), {r1_0, r2_0, psi1_0, 0.0}, grid, io);
    const auto red = solve_22(l, r1_0, psi1_0, grid);
    double sup = 0;
    for (size_t i = 0; i < grid.size(); ++i) sup = std::max(sup, std::abs(full.states[i][0] - red.trajectory.states[i][0]));
    CHECK(sup <= 1e-6);
}

#include "nwave/reduction22.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace nwave {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

double polyder(const std::vector<double>& c, double x) {
    double acc = 0;
    for (size_t i = c.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * c[i];
    return acc;
}

double coeff_scale(const std::vector<double>& c) {
    double m = 0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> real_roots(const std::vector<double>& c, int degree) {
    std::vector<double> roots;
    if (degree <= 0) return roots;
    if (degree == 1) {
        roots.push_back(-c[0] / c[1]);
    } else {
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(degree, degree);
        for (int i = 1; i < degree; ++i) C(i, i - 1) = 1.0;
        for (int i = 0; i < degree; ++i) C(i, degree - 1) = -c[static_cast<size_t>(i)] / c[static_cast<size_t>(degree)];
        Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
        for (int i = 0; i < degree; ++i) {
            const std::complex<double> z = es.eigenvalues()(i);
            if (std::abs(z.imag()) <= 1e-7 * std::max(1.0, std::abs(z.real()))) roots.push_back(z.real());
        }
    }
    const double scale = coeff_scale(c);
    for (double& x : roots) {
        for (int it = 0; it < 30; ++it) {
            const double p = polyval(c, x), dp = polyder(c, x);
            if (std::abs(p) <= 1e-15 * scale || dp == 0.0) break;
            const double step = p / dp;
            x -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
        }
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double x : roots)
        if (unique.empty() || std::abs(x - unique.back()) > 1e-9 * std::max(1.0, std::abs(x))) unique.push_back(x);
    return unique;
}

// Quotient of c by (x - p)(x - q), ascending coefficients.
std::vector<double> deflate(const std::vector<double>& c, int degree, double p, double q) {
    std::vector<double> rem(c.begin(), c.begin() + degree + 1);
    const double b = -(p + q), e = p * q;  // divisor x^2 + b x + e
    std::vector<double> quot(static_cast<size_t>(std::max(0, degree - 1)), 0.0);
    for (int k = degree; k >= 2; --k) {
        const double t = rem[static_cast<size_t>(k)];
        quot[static_cast<size_t>(k - 2)] = t;
        rem[static_cast<size_t>(k)] = 0;
        rem[static_cast<size_t>(k - 1)] -= t * b;
        rem[static_cast<size_t>(k - 2)] -= t * e;
    }
    return quot;
}

double rho_of_theta(const QuarticData& q, double th) {
    const double s = std::sin(th);
    return q.rho_minus + (q.rho_plus - q.rho_minus) * s * s;
}

double g_of_theta(const QuarticData& q, double th) {
    const double g = polyval(q.deflated, rho_of_theta(q, th));
    if (!(g > 0.0)) throw NumericalError("deflated quartic is not positive inside the motion interval");
    return g;
}

// int_0^theta 4 / sqrt(g) ; equals int_{rho_-}^{rho} 2 / sqrt(w4).
double time_in_theta(const QuarticData& q, double theta) {
    if (theta <= 0.0) return 0.0;
    if (q.deflated.size() == 1) return 4.0 * theta / std::sqrt(g_of_theta(q, 0.0));
    auto f = [&](double th) { return 4.0 / std::sqrt(g_of_theta(q, th)); };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, theta, 12, 1e-13);
}

double theta_of_r1(const QuarticData& q, double r1) {
    const double u = std::clamp((r1 - q.rho_minus) / (q.rho_plus - q.rho_minus), 0.0, 1.0);
    return std::asin(std::sqrt(u));
}

// Smallest theta in [0, pi/2] with time_in_theta = target.
double invert_time(const QuarticData& q, double target) {
    const double half = 0.5 * q.period;
    if (target <= 0.0) return 0.0;
    if (target >= half) return 0.5 * kPi;
    double lo = 0.0, hi = 0.5 * kPi;
    double th = 0.5 * kPi * target / half;
    for (int it = 0; it < 100; ++it) {
        const double err = time_in_theta(q, th) - target;
        if (std::abs(err) <= 1e-13 * std::max(1.0, half)) return th;
        if (err > 0) hi = th;
        else lo = th;
        double next = th - err / (4.0 / std::sqrt(g_of_theta(q, th)));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        th = next;
    }
    throw ConvergenceError("time inversion did not converge", {target, th});
}

double sqrt_w4_at_theta(const QuarticData& q, double th) {
    return (q.rho_plus - q.rho_minus) * std::sin(th) * std::cos(th) * std::sqrt(g_of_theta(q, th));
}

} // namespace

void Leaf22::validate() const {
    if (!(s1 > 0) || !(s2 > 0)) throw ValidationError("s1 and s2 must be positive");
    if (std::abs(r) > s1 + s2) throw ValidationError("R-level is empty: |r| > s1 + s2");
    for (double x : {r, a1, a2, d1, d2})
        if (!std::isfinite(x)) throw ValidationError("leaf parameters must be finite");
}

Leaf22 Leaf22::from(const SystemParams& params, double s1, double s2, double r) {
    if (params.a.size() != 2 || params.d.size() < 2)
        throw DimensionError("the (2+2) leaf needs two a entries and at least two d entries");
    Leaf22 l{s1, s2, r, params.a[0], params.a[1], params.d[0], params.d[1]};
    l.validate();
    return l;
}

double polyval(const std::vector<double>& c, double x) {
    double acc = 0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

std::vector<double> w2_coefficients(const Leaf22& l) {
    const double C = 0.25 * (l.s1 * l.s1 + l.s2 * l.s2) + 0.25 * l.r * l.r + 0.25 * (l.s1 + l.s2) * (l.s1 + l.s2) +
                     0.5 * (l.a1 + l.a2) * (l.d1 * l.s1 + l.d2 * l.s2);
    return {-0.25 * l.r * l.r + C + 0.5 * (l.a1 - l.a2) * l.d2 * l.r,
            0.5 * l.r + 0.5 * (l.a1 - l.a2) * (l.d1 - l.d2), -0.5};
}

double w2(double r1, const Leaf22& leaf) { return polyval(w2_coefficients(leaf), r1); }

double h22(double r1, double psi1, const Leaf22& l) {
    const double P = l.s1 * l.s1 - r1 * r1;
    const double Q = l.s2 * l.s2 - (l.r - r1) * (l.r - r1);
    if (P < 0 || Q < 0) throw DomainError("h22: r1 outside the sphere product");
    return 0.5 * std::sqrt(P * Q) * std::cos(psi1) + w2(r1, l);
}

QuarticData expand_quartic(const Leaf22& leaf, double H) {
    leaf.validate();
    const std::vector<double> P{leaf.s1 * leaf.s1, 0.0, -1.0};
    const std::vector<double> Q{leaf.s2 * leaf.s2 - leaf.r * leaf.r, 2 * leaf.r, -1.0};
    const std::vector<double> w = w2_coefficients(leaf);
    const std::vector<double> e{H - w[0], -w[1], -w[2]};
    std::vector<double> c = polymul(P, Q);
    const std::vector<double> e2 = polymul(e, e);
    for (size_t i = 0; i < c.size(); ++i) c[i] -= 4 * e2[i];

    QuarticData q;
    q.H = H;
    const double scale = coeff_scale(c);
    c[4] = 0.0;  // cancels identically
    q.degree = 3;
    while (q.degree > 0 && std::abs(c[static_cast<size_t>(q.degree)]) <= 1e-14 * scale) {
        c[static_cast<size_t>(q.degree)] = 0.0;
        --q.degree;
    }
    q.coeffs = c;
    q.roots = real_roots(c, q.degree);
    return q;
}

QuarticData build_quartic(const Leaf22& leaf, double H, std::optional<double> hint) {
    QuarticData q = expand_quartic(leaf, H);
    const double lo = std::max(-leaf.s1, leaf.r - leaf.s2);
    const double hi = std::min(leaf.s1, leaf.r + leaf.s2);
    std::vector<double> pts{lo};
    for (double x : q.roots)
        if (x > lo && x < hi) pts.push_back(x);
    pts.push_back(hi);

    const double tol = 1e-9 * std::max(1.0, hi - lo);
    bool found = false;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        if (b - a <= 0 || !(q.w4(0.5 * (a + b)) > 0)) continue;
        if (hint && (*hint < a - tol || *hint > b + tol)) continue;
        q.rho_minus = a;
        q.rho_plus = b;
        found = true;
        break;
    }
    if (!found)
        throw NoMotionError(hint ? "w4 is not positive around the initial r1 (energy level empty or equilibrium)"
                                 : "w4 is nowhere positive on the physical range of r1 (energy level empty)");
    q.deflated = deflate(q.coeffs, q.degree, q.rho_minus, q.rho_plus);
    for (double& x : q.deflated) x = -x;
    if (q.deflated.empty()) throw NumericalError("motion interval is not bounded by two roots");
    q.period = 2.0 * time_in_theta(q, 0.5 * kPi);
    return q;
}

double time_of_r1(double r1, const QuarticData& q, int branch_sign) {
    const double tol = 1e-12 * std::max(1.0, std::abs(q.rho_plus - q.rho_minus));
    if (r1 < q.rho_minus - tol || r1 > q.rho_plus + tol)
        throw DomainError("r1 = " + format_double(r1) + " is outside the motion interval [" +
                          format_double(q.rho_minus) + ", " + format_double(q.rho_plus) + "]");
    return (branch_sign >= 0 ? 1.0 : -1.0) * time_in_theta(q, theta_of_r1(q, r1));
}

namespace {

struct Phase {
    double p;     // in [0, T)
    double half;  // T/2
};

Phase phase_at(double t, const QuarticData& q, double r1_0, int sign_0) {
    const double T = q.period;
    const double tau0 = time_of_r1(r1_0, q, +1);
    const double p0 = sign_0 >= 0 ? tau0 : T - tau0;
    double p = std::fmod(p0 + t, T);
    if (p < 0) p += T;
    return {p, 0.5 * T};
}

} // namespace

double r1_of_t(double t, const QuarticData& q, double r1_0, int sign_0) {
    if (!(q.period > 0)) throw DomainError("r1_of_t needs a quartic with a motion interval");
    const Phase ph = phase_at(t, q, r1_0, sign_0);
    const double target = ph.p <= ph.half ? ph.p : 2 * ph.half - ph.p;
    return rho_of_theta(q, invert_time(q, target));
}

double psi1_of_r1(double r1, const QuarticData& q, const Leaf22& l, int sign) {
    const double P = l.s1 * l.s1 - r1 * r1;
    const double Q = l.s2 * l.s2 - (l.r - r1) * (l.r - r1);
    if (!(P > 0 && Q > 0)) throw DomainError("psi1_of_r1: r1 on the boundary of the sphere product");
    const double e = 2 * (q.H - w2(r1, l));
    const double c = e / std::sqrt(P * Q);
    if (std::abs(c) > 1 + 1e-12)
        throw ConsistencyError("arccos argument " + format_double(c) + " outside [-1, 1]: (H, r1) inconsistent");
    const double sw = std::sqrt(std::max(0.0, q.w4(r1)));
    return (sign >= 0 ? 1.0 : -1.0) * std::atan2(sw, e);
}

Solve22Result solve_22(const Leaf22& leaf, double r1_0, double psi1_0, const std::vector<double>& t_grid) {
    leaf.validate();
    if (t_grid.empty()) throw ValidationError("solve_22: empty time grid");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw ValidationError("solve_22: time grid must be strictly increasing");
    const double H = h22(r1_0, psi1_0, leaf);

    Solve22Result res;
    res.trajectory.coordinate_names = {"r1", "psi1"};
    res.trajectory.times = t_grid;

    InvariantSet inv;
    inv.add("H", [leaf](std::span<const double> y) { return h22(y[0], y[1], leaf); });

    QuarticData probe = expand_quartic(leaf, H);
    const double w4_0 = probe.w4(r1_0);
    const double dw4_0 = polyder(probe.coeffs, r1_0);
    if (std::abs(w4_0) <= 1e-10 * std::max(1.0, coeff_scale(probe.coeffs)) && std::abs(dw4_0) < 1e-8) {
        res.equilibrium = true;
        res.quartic = probe;
        for (size_t i = 0; i < t_grid.size(); ++i) res.trajectory.states.push_back({r1_0, psi1_0});
        attach_invariants(res.trajectory, inv);
        return res;
    }

    QuarticData q = build_quartic(leaf, H, r1_0);
    res.quartic = q;
    res.period = q.period;

    int sign_0;
    const double sn = std::sin(psi1_0);
    if (std::abs(sn) > 1e-14) {
        sign_0 = sn < 0 ? +1 : -1;  // dr1 = -1/2 sqrt(PQ) sin psi1
    } else {
        sign_0 = std::abs(r1_0 - q.rho_minus) <= std::abs(r1_0 - q.rho_plus) ? +1 : -1;
    }

    const double t0 = t_grid.front();
    double prev = psi1_0;
    for (size_t i = 0; i < t_grid.size(); ++i) {
        const Phase ph = phase_at(t_grid[i] - t0, q, r1_0, sign_0);
        const bool rising = ph.p < ph.half;
        const double target = rising ? ph.p : 2 * ph.half - ph.p;
        const double th = invert_time(q, target);
        const double r1 = rho_of_theta(q, th);
        const double e = 2 * (H - w2(r1, leaf));
        const double P = leaf.s1 * leaf.s1 - r1 * r1;
        const double Q = leaf.s2 * leaf.s2 - (leaf.r - r1) * (leaf.r - r1);
        if (std::abs(e) > (1 + 1e-12) * std::sqrt(std::max(0.0, P * Q)) + 1e-300)
            throw ConsistencyError("reconstructed (H, r1) pair leaves the arccos range");
        // sin psi1 has the sign opposite to dr1.
        double psi = std::atan2((rising ? -1.0 : 1.0) * sqrt_w4_at_theta(q, th), e);
        psi += 2 * kPi * std::round((prev - psi) / (2 * kPi));
        prev = psi;
        res.trajectory.states.push_back({r1, psi});
    }
    {
        const Phase a = phase_at(0.0, q, r1_0, sign_0);
        const double span = t_grid.back() - t0;
        res.turning_points =
            static_cast<int>(std::floor((a.p + span) / a.half) - std::floor(a.p / a.half));
    }
    attach_invariants(res.trajectory, inv);
    return res;
}

VectorField make_reduced22_field(const Leaf22& leaf) {
    leaf.validate();
    return [leaf](double, std::span<const double> y, std::span<double> dy) {
        const double r1 = y[0], psi = y[1];
        const double P = leaf.s1 * leaf.s1 - r1 * r1;
        const double Q = leaf.s2 * leaf.s2 - (leaf.r - r1) * (leaf.r - r1);
        if (!(P > 0 && Q > 0)) throw DomainError("reduced (2+2) field: r1 reached the boundary of the sphere product");
        const double root = std::sqrt(P * Q);
        dy[0] = -0.5 * root * std::sin(psi);
        dy[1] = r1 - 0.5 * leaf.r - 0.5 * (leaf.a1 - leaf.a2) * (leaf.d1 - leaf.d2) -
                (-r1 * Q + (leaf.r - r1) * P) / (2 * root) * std::cos(psi);
    };
}

} // namespace nwave

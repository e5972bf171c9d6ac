// Independent reference computations for the tests. Nothing here calls the
// library routine it is used to check.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nwave/flow.hpp"
#include "nwave/linalg.hpp"

namespace oracle {

using nwave::Complex;
using nwave::ComplexMatrix;

// mu + lambda P+ built by hand, then Tr(.)^k as a sum of eigenvalue powers.
inline double power_sum(const std::vector<double>& a, const std::vector<double>& d, const ComplexMatrix& Z,
                        double lambda, int k) {
    const auto n = static_cast<Eigen::Index>(a.size()), m = static_cast<Eigen::Index>(d.size());
    ComplexMatrix M = ComplexMatrix::Zero(n + m, n + m);
    for (Eigen::Index i = 0; i < n; ++i) M(i, i) = a[static_cast<size_t>(i)] + lambda;
    for (Eigen::Index j = 0; j < m; ++j) M(n + j, n + j) = d[static_cast<size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            M(i, n + j) = Z(i, j);
            M(n + j, i) = std::conj(Z(i, j));
        }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(M, Eigen::EigenvaluesOnly);
    double s = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::pow(es.eigenvalues()(i), k);
    return s;
}

inline double eig_power_sum(const ComplexMatrix& H, int k) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H, Eigen::EigenvaluesOnly);
    double s = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::pow(es.eigenvalues()(i), k);
    return s;
}

// 1/2 sum_{j,l} |sum_i conj(Z_ij) Z_il|^2 + sum a_i d_j |Z_ij|^2 with explicit loops.
inline double quartic_loops(const std::vector<double>& a, const std::vector<double>& d, const ComplexMatrix& Z) {
    double h = 0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        for (Eigen::Index l = 0; l < Z.cols(); ++l) {
            Complex g = 0;
            for (Eigen::Index i = 0; i < Z.rows(); ++i) g += std::conj(Z(i, j)) * Z(i, l);
            h += 0.5 * std::norm(g);
        }
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j)
            h += a[static_cast<size_t>(i)] * d[static_cast<size_t>(j)] * std::norm(Z(i, j));
    return h;
}

// Two-row vector form: 1/2 (z+z)^2 + 1/2 (v+v)^2 + |v+z|^2 + a1 z+Dz + a2 v+Dv.
inline double quartic_vector_form(double a1, double a2, const std::vector<double>& d, const ComplexMatrix& Z) {
    double zz = 0, vv = 0, zDz = 0, vDv = 0;
    Complex vz = 0;
    for (Eigen::Index k = 0; k < Z.cols(); ++k) {
        const Complex z = Z(0, k), v = Z(1, k);
        zz += std::norm(z);
        vv += std::norm(v);
        vz += std::conj(v) * z;
        zDz += d[static_cast<size_t>(k)] * std::norm(z);
        vDv += d[static_cast<size_t>(k)] * std::norm(v);
    }
    return 0.5 * zz * zz + 0.5 * vv * vv + std::norm(vz) + a1 * zDz + a2 * vDv;
}

using RealFn = std::function<double(const ComplexMatrix&)>;

// Bracket in real coordinates Z = X + iY, {f, g} = -1/2 sum (f_X g_Y - f_Y g_X),
// with fourth-order central differences.
inline double darboux_bracket(const RealFn& f, const RealFn& g, const ComplexMatrix& Z, double h = 1e-3) {
    auto partial = [&](const RealFn& fn, Eigen::Index i, Eigen::Index j, Complex dir) {
        auto at = [&](double s) {
            ComplexMatrix W = Z;
            W(i, j) += s * h * dir;
            return fn(W);
        };
        return (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
    };
    double s = 0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) {
            const double fx = partial(f, i, j, 1.0), fy = partial(f, i, j, Complex(0, 1));
            const double gx = partial(g, i, j, 1.0), gy = partial(g, i, j, Complex(0, 1));
            s += fx * gy - fy * gx;
        }
    return -0.5 * s;
}

// Quintic F = Tr A(ZZ+)^2 + Tr D^2 Z+AZ + Tr D Z+A^2 Z + Tr D(Z+Z)^2 with explicit index sums.
inline double quintic_loops(const std::vector<double>& a, const std::vector<double>& d, const ComplexMatrix& Z) {
    const auto n = Z.rows(), m = Z.cols();
    double f = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) {
            Complex g = 0;  // (Z Z+)_ik
            for (Eigen::Index j = 0; j < m; ++j) g += Z(i, j) * std::conj(Z(k, j));
            f += a[static_cast<size_t>(i)] * std::norm(g);
        }
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index l = 0; l < m; ++l) {
            Complex g = 0;  // (Z+ Z)_jl
            for (Eigen::Index i = 0; i < n; ++i) g += std::conj(Z(i, j)) * Z(i, l);
            f += d[static_cast<size_t>(j)] * std::norm(g);
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double ai = a[static_cast<size_t>(i)], dj = d[static_cast<size_t>(j)];
            f += (dj * dj * ai + dj * ai * ai) * std::norm(Z(i, j));
        }
    return f;
}

inline double alpha_loops(const std::vector<double>& a, const ComplexMatrix& Z, int k) {
    double s = 0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) s += std::pow(a[static_cast<size_t>(i)], k) * Z.row(i).squaredNorm();
    return s;
}

inline double delta_loops(const std::vector<double>& d, const ComplexMatrix& Z, int k) {
    double s = 0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j) s += std::pow(d[static_cast<size_t>(j)], k) * Z.col(j).squaredNorm();
    return s;
}

// (df/dX_ij, df/dY_ij) by fourth-order central differences.
struct RealGradient {
    Eigen::MatrixXd dx, dy;
};

inline RealGradient real_gradient(const RealFn& f, const ComplexMatrix& Z, double h = 1e-3) {
    RealGradient g{Eigen::MatrixXd(Z.rows(), Z.cols()), Eigen::MatrixXd(Z.rows(), Z.cols())};
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j)
            for (int part = 0; part < 2; ++part) {
                const Complex dir = part == 0 ? Complex(1, 0) : Complex(0, 1);
                auto at = [&](double s) {
                    ComplexMatrix W = Z;
                    W(i, j) += s * h * dir;
                    return f(W);
                };
                const double v = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h);
                (part == 0 ? g.dx : g.dy)(i, j) = v;
            }
    return g;
}

inline double bracket(const RealGradient& f, const RealGradient& g) {
    return -0.5 * (f.dx.cwiseProduct(g.dy) - f.dy.cwiseProduct(g.dx)).sum();
}

// df/d conj(Z_ij) = 1/2 (df/dX + i df/dY).
inline ComplexMatrix conj_derivative(const RealGradient& g) {
    return 0.5 * (g.dx.cast<Complex>() + Complex(0, 1) * g.dy.cast<Complex>());
}

// Harmonic (2+2) case a1 = a2, s1 = s2 = s, r = 0: r1'' = -omega^2 r1 with
// omega^2 = (s^2 + 2E)/2, E = H - w2(0).
struct Harmonic {
    double omega, amplitude, phase;
    double r1(double t) const { return amplitude * std::sin(omega * t + phase); }
};

inline Harmonic harmonic(double s, double E, double r1_0, double psi1_0) {
    Harmonic h;
    h.omega = std::sqrt((s * s + 2 * E) / 2);
    const double v0 = -0.5 * (s * s - r1_0 * r1_0) * std::sin(psi1_0);  // dr1/dt at t = 0
    h.amplitude = std::hypot(r1_0, v0 / h.omega);
    h.phase = std::atan2(r1_0, v0 / h.omega);
    return h;
}

// Times where component 0 of the dense solution crosses `level` upward,
// bracketed on a fine grid and refined by bisection.
inline std::vector<double> upward_crossings(const nwave::DenseSolution& sol, double level, double t0, double t1,
                                            int n = 4000) {
    std::vector<double> out;
    auto f = [&](double t) { return sol(t)[0] - level; };
    double ta = t0, fa = f(t0);
    for (int i = 1; i <= n; ++i) {
        const double tb = t0 + (t1 - t0) * i / n, fb = f(tb);
        if (fa < 0 && fb >= 0) {
            double lo = ta, hi = tb;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                (f(mid) < 0 ? lo : hi) = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
        ta = tb;
        fa = fb;
    }
    return out;
}

// Central finite-difference derivative of a scalar function of one variable.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace oracle

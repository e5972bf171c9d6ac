#pragma once

#include <optional>
#include <vector>

#include "nwave/flow.hpp"

namespace nwave {

// One-degree-of-freedom system left when the third sphere collapses
// (s3 = 0): H = 1/2 sqrt(P Q) cos psi1 + w2(r1),
// P = s1^2 - r1^2, Q = s2^2 - (r - r1)^2, canonical {r1, psi1} = 1.

struct Leaf22 {
    double s1 = 1, s2 = 1;
    double r = 0;
    double a1 = 0, a2 = 0, d1 = 0, d2 = 0;

    void validate() const;  // s1, s2 > 0, |r| <= s1 + s2
    static Leaf22 from(const SystemParams& params, double s1, double s2, double r);
};

/// w2 as ascending polynomial coefficients (degree 2).
std::vector<double> w2_coefficients(const Leaf22& leaf);
double w2(double r1, const Leaf22& leaf);
double h22(double r1, double psi1, const Leaf22& leaf);

/// Evaluates an ascending-coefficient polynomial.
double polyval(const std::vector<double>& c, double x);

struct QuarticData {
    double H = 0;
    std::vector<double> coeffs;  // ascending, 5 entries; the quartic term cancels
    int degree = 0;              // after trimming vanishing leading terms
    std::vector<double> roots;   // real roots, ascending, Newton polished
    // Motion interval [rho_minus, rho_plus] and w4 / ((r1 - rho_-)(rho_+ - r1)).
    double rho_minus = 0, rho_plus = 0;
    std::vector<double> deflated;
    double period = 0;

    double w4(double r1) const { return polyval(coeffs, r1); }
};

/// w4 = P Q - 4 (H - w2)^2 expanded, with its real roots; no interval.
QuarticData expand_quartic(const Leaf22& leaf, double H);

/// Adds the motion interval (the one containing `hint` if given, else the
/// first one inside the physical range) and the period. Throws NoMotionError
/// when w4 is nowhere positive there.
QuarticData build_quartic(const Leaf22& leaf, double H, std::optional<double> hint = std::nullopt);

/// branch_sign * int_{rho_-}^{r1} 2 / sqrt(w4).
double time_of_r1(double r1, const QuarticData& q, int branch_sign = +1);

/// r1 at time t after (r1_0, moving with sign_0); period-folded.
double r1_of_t(double t, const QuarticData& q, double r1_0, int sign_0);

/// sign * arccos(2 (H - w2) / sqrt(P Q)). Throws ConsistencyError when the
/// cosine leaves [-1, 1] by more than 1e-12.
double psi1_of_r1(double r1, const QuarticData& q, const Leaf22& leaf, int sign);

struct Solve22Result {
    Trajectory trajectory;  // coordinates r1, psi1; invariant H
    QuarticData quartic;
    double period = 0;      // 0 at an equilibrium
    bool equilibrium = false;
    int turning_points = 0;
};

Solve22Result solve_22(const Leaf22& leaf, double r1_0, double psi1_0, const std::vector<double>& t_grid);

/// dr1 = -1/2 sqrt(PQ) sin psi1,
/// dpsi1 = r1 - r/2 - (a1-a2)(d1-d2)/2 - (-r1 Q + (r - r1) P) / (2 sqrt(PQ)) cos psi1.
VectorField make_reduced22_field(const Leaf22& leaf);

} // namespace nwave

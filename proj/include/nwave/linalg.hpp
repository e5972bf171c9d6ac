#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nwave/error.hpp"

namespace nwave {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Extended precision twins, used by the finite-difference oracle.
using ExtComplex = std::complex<long double>;
using ExtMatrix = Eigen::Matrix<ExtComplex, Eigen::Dynamic, Eigen::Dynamic>;

struct SystemParams {
    std::vector<double> a;  // diagonal of A, length n+
    std::vector<double> d;  // diagonal of D, length n-
    double lambda = 0.0;
    int k = 1;

    Eigen::Index n_plus() const { return static_cast<Eigen::Index>(a.size()); }
    Eigen::Index n_minus() const { return static_cast<Eigen::Index>(d.size()); }

    /// Throws ValidationError for empty blocks, k < 1, or non-finite entries.
    /// Distinctness is *not* enforced here (the hierarchy does not need it);
    /// query has_distinct_spectra() for that.
    void validate() const;
    bool has_distinct_spectra() const;
};

struct WaveState {
    ComplexMatrix Z;  // n+ x n-
};

/// Throws DimensionError unless Z is n+ x n-.
void check_shape(const SystemParams& params, const WaveState& state);

/// [[diag(a), Z], [Z^+, diag(d)]].
ComplexMatrix assemble_mu(const SystemParams& params, const WaveState& state);

bool is_hermitian(const ComplexMatrix& M, double rel_tol = 1e-12);

/// Tr(M^k) for Hermitian M by repeated multiplication.
double trace_power(const ComplexMatrix& M, int k, double hermitian_tol = 1e-12);

// Interleaved (re, im) coordinates, row-major over Z. This is the layout of
// every flattened state handed to the integrator.
std::vector<double> flatten(const ComplexMatrix& Z);
ComplexMatrix unflatten(std::span<const double> y, Eigen::Index rows, Eigen::Index cols);
std::vector<std::string> coordinate_names(Eigen::Index rows, Eigen::Index cols);

ExtMatrix to_ext(const ComplexMatrix& Z);

// ---------------------------------------------------------------------------
// Finite-difference Wirtinger oracle.
//
// Convention: df = Tr(df/dZ dZ) + Tr(df/dZ^+ dZ^+), so
//   (df/dZ^+)_ij = df/d conj(z_ij)   (n+ x n-)
//   (df/dZ)_ji   = df/d z_ij          (n- x n+)
// and d Tr(Z^+ Z)/dZ^+ = Z.

/// Real functional of Z, evaluated in extended precision so that the
/// central differences are not swamped by roundoff on large states.
using Functional = std::function<long double(const ExtMatrix& Z)>;

struct WirtingerGradient {
    ComplexMatrix dZ;      // n- x n+
    ComplexMatrix dZplus;  // n+ x n-
};

WirtingerGradient wirtinger_gradient_fd(const Functional& f, const WaveState& state, double h = 1e-5);

/// i Tr(df/dZ dg/dZ^+ - dg/dZ df/dZ^+). Throws NumericalError when the
/// imaginary residue exceeds imag_tol * max(1, |result|).
double poisson_bracket(const WirtingerGradient& gf, const WirtingerGradient& gg, double imag_tol = 1e-9);

double poisson_bracket_fd(const Functional& f, const Functional& g, const WaveState& state, double h = 1e-5);

} // namespace nwave

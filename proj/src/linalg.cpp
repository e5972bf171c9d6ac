#include "nwave/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace nwave {

void SystemParams::validate() const {
    if (a.empty() || d.empty()) throw ValidationError("a and d must be non-empty");
    if (k < 1) throw ValidationError("hierarchy index k must be >= 1");
    if (!std::isfinite(lambda)) throw ValidationError("lambda is not finite");
    for (double x : a)
        if (!std::isfinite(x)) throw ValidationError("a has a non-finite entry");
    for (double x : d)
        if (!std::isfinite(x)) throw ValidationError("d has a non-finite entry");
}

namespace {
bool pairwise_distinct(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
}
} // namespace

bool SystemParams::has_distinct_spectra() const { return pairwise_distinct(a) && pairwise_distinct(d); }

void check_shape(const SystemParams& params, const WaveState& state) {
    if (state.Z.rows() != params.n_plus() || state.Z.cols() != params.n_minus())
        throw DimensionError("Z is " + std::to_string(state.Z.rows()) + "x" + std::to_string(state.Z.cols()) +
                             ", expected " + std::to_string(params.n_plus()) + "x" +
                             std::to_string(params.n_minus()));
}

ComplexMatrix assemble_mu(const SystemParams& params, const WaveState& state) {
    check_shape(params, state);
    const Eigen::Index np = params.n_plus(), nm = params.n_minus();
    ComplexMatrix mu = ComplexMatrix::Zero(np + nm, np + nm);
    for (Eigen::Index i = 0; i < np; ++i) mu(i, i) = params.a[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < nm; ++j) mu(np + j, np + j) = params.d[static_cast<size_t>(j)];
    mu.topRightCorner(np, nm) = state.Z;
    mu.bottomLeftCorner(nm, np) = state.Z.adjoint();
    return mu;
}

bool is_hermitian(const ComplexMatrix& M, double rel_tol) {
    if (M.rows() != M.cols()) return false;
    const double scale = M.cwiseAbs().maxCoeff();
    return (M - M.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

double trace_power(const ComplexMatrix& M, int k, double hermitian_tol) {
    if (k < 1) throw ValidationError("trace_power: k must be >= 1");
    if (M.rows() < 1 || M.rows() != M.cols()) throw DimensionError("trace_power: square non-empty matrix required");
    if (!is_hermitian(M, hermitian_tol)) throw ValidationError("trace_power: matrix is not Hermitian");
    ComplexMatrix P = M;
    for (int i = 1; i < k; ++i) P = P * M;
    const Complex tr = P.trace();
    // Relative to |result|, but floored at the norm scale so that exact
    // cancellations (odd powers of involutions) are not flagged on roundoff.
    const double floor = std::pow(M.norm(), k);
    if (std::abs(tr.imag()) > 1e-10 * std::max(std::abs(tr.real()), floor))
        throw NumericalError("trace_power: imaginary residue " + std::to_string(tr.imag()));
    return tr.real();
}

std::vector<double> flatten(const ComplexMatrix& Z) {
    std::vector<double> y;
    y.reserve(static_cast<size_t>(2 * Z.size()));
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) {
            y.push_back(Z(i, j).real());
            y.push_back(Z(i, j).imag());
        }
    return y;
}

ComplexMatrix unflatten(std::span<const double> y, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(y.size()) != 2 * rows * cols)
        throw DimensionError("unflatten: expected " + std::to_string(2 * rows * cols) + " coordinates, got " +
                             std::to_string(y.size()));
    ComplexMatrix Z(rows, cols);
    size_t p = 0;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j, p += 2) Z(i, j) = Complex(y[p], y[p + 1]);
    return Z;
}

std::vector<std::string> coordinate_names(Eigen::Index rows, Eigen::Index cols) {
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
            names.push_back("re_Z" + ij);
            names.push_back("im_Z" + ij);
        }
    return names;
}

ExtMatrix to_ext(const ComplexMatrix& Z) {
    ExtMatrix E(Z.rows(), Z.cols());
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j) E(i, j) = ExtComplex(Z(i, j).real(), Z(i, j).imag());
    return E;
}

WirtingerGradient wirtinger_gradient_fd(const Functional& f, const WaveState& state, double h) {
    if (!(h > 0.0)) throw ValidationError("wirtinger_gradient_fd: step must be positive");
    const Eigen::Index rows = state.Z.rows(), cols = state.Z.cols();
    ExtMatrix Z = to_ext(state.Z);

    auto eval = [&](const ExtMatrix& probe) {
        const long double v = f(probe);
        if (!std::isfinite(static_cast<double>(v))) {
            ComplexMatrix zd(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i)
                for (Eigen::Index j = 0; j < cols; ++j)
                    zd(i, j) = Complex(static_cast<double>(probe(i, j).real()),
                                       static_cast<double>(probe(i, j).imag()));
            throw NumericalError("functional is not finite at probe point", flatten(zd));
        }
        return v;
    };

    // Central difference along one real coordinate; divides by the step that
    // was actually realized in floating point.
    auto partial = [&](Eigen::Index i, Eigen::Index j, bool imag_part) {
        const ExtComplex z0 = Z(i, j);
        const long double x0 = imag_part ? z0.imag() : z0.real();
        const long double xp = x0 + h, xm = x0 - h;
        Z(i, j) = imag_part ? ExtComplex(z0.real(), xp) : ExtComplex(xp, z0.imag());
        const long double fp = eval(Z);
        Z(i, j) = imag_part ? ExtComplex(z0.real(), xm) : ExtComplex(xm, z0.imag());
        const long double fm = eval(Z);
        Z(i, j) = z0;
        return static_cast<double>((fp - fm) / (xp - xm));
    };

    WirtingerGradient g{ComplexMatrix(cols, rows), ComplexMatrix(rows, cols)};
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double fx = partial(i, j, false);
            const double fy = partial(i, j, true);
            g.dZplus(i, j) = 0.5 * Complex(fx, fy);
            g.dZ(j, i) = 0.5 * Complex(fx, -fy);
        }
    return g;
}

double poisson_bracket(const WirtingerGradient& gf, const WirtingerGradient& gg, double imag_tol) {
    if (gf.dZ.rows() != gg.dZ.rows() || gf.dZ.cols() != gg.dZ.cols())
        throw DimensionError("poisson_bracket: gradient shapes differ");
    const Complex v = Complex(0, 1) * (gf.dZ * gg.dZplus - gg.dZ * gf.dZplus).trace();
    if (std::abs(v.imag()) > imag_tol * std::max(1.0, std::abs(v.real())))
        throw NumericalError("poisson bracket has imaginary residue " + std::to_string(v.imag()) +
                             " (non-real functional or step too large)");
    return v.real();
}

double poisson_bracket_fd(const Functional& f, const Functional& g, const WaveState& state, double h) {
    return poisson_bracket(wirtinger_gradient_fd(f, state, h), wirtinger_gradient_fd(g, state, h));
}

} // namespace nwave

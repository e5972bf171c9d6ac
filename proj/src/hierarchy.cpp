#include "nwave/hierarchy.hpp"

#include <cmath>

namespace nwave {

namespace {

template <class S>
using CMat = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
CMat<S> diag_of(const std::vector<double>& v) {
    CMat<S> M = CMat<S>::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = S(v[i]);
    return M;
}

template <class S>
void require_shape(const SystemParams& p, const CMat<S>& Z) {
    if (Z.rows() != p.n_plus() || Z.cols() != p.n_minus())
        throw DimensionError("Z is " + std::to_string(Z.rows()) + "x" + std::to_string(Z.cols()) + ", expected " +
                             std::to_string(p.n_plus()) + "x" + std::to_string(p.n_minus()));
}

// (mu + lambda P+)^m, m >= 0
template <class S>
CMat<S> shifted_mu_power(const SystemParams& p, const CMat<S>& Z, int m) {
    require_shape(p, Z);
    const Eigen::Index np = p.n_plus(), nm = p.n_minus();
    CMat<S> M = CMat<S>::Zero(np + nm, np + nm);
    for (Eigen::Index i = 0; i < np; ++i) M(i, i) = S(p.a[static_cast<size_t>(i)]) + S(p.lambda);
    for (Eigen::Index j = 0; j < nm; ++j) M(np + j, np + j) = S(p.d[static_cast<size_t>(j)]);
    M.topRightCorner(np, nm) = Z;
    M.bottomLeftCorner(nm, np) = Z.adjoint();
    CMat<S> P = CMat<S>::Identity(np + nm, np + nm);
    for (int i = 0; i < m; ++i) P = P * M;
    return P;
}

template <class S>
S h_impl(const SystemParams& p, const CMat<S>& Z) {
    return shifted_mu_power<S>(p, Z, p.k).trace().real();
}

template <class S>
S alpha_impl(const SystemParams& p, const CMat<S>& Z, int k) {
    require_shape(p, Z);
    S acc = 0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        acc += std::pow(S(p.a[static_cast<size_t>(i)]), k) * Z.row(i).squaredNorm();
    return acc;
}

template <class S>
S delta_impl(const SystemParams& p, const CMat<S>& Z, int k) {
    require_shape(p, Z);
    S acc = 0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j)
        acc += std::pow(S(p.d[static_cast<size_t>(j)]), k) * Z.col(j).squaredNorm();
    return acc;
}

template <class S>
S quartic_impl(const SystemParams& p, const CMat<S>& Z) {
    require_shape(p, Z);
    const CMat<S> ZpZ = Z.adjoint() * Z;
    S free = 0;
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        for (Eigen::Index j = 0; j < Z.cols(); ++j)
            free += S(p.a[static_cast<size_t>(i)]) * S(p.d[static_cast<size_t>(j)]) * std::norm(Z(i, j));
    return S(0.5) * ZpZ.squaredNorm() + free;
}

template <class S>
S quintic_impl(const SystemParams& p, const CMat<S>& Z) {
    require_shape(p, Z);
    const CMat<S> A = diag_of<S>(p.a), D = diag_of<S>(p.d);
    const CMat<S> ZZp = Z * Z.adjoint(), ZpZ = Z.adjoint() * Z;
    const std::complex<S> t = (A * ZZp * ZZp).trace() + (D * D * Z.adjoint() * A * Z).trace() +
                              (D * Z.adjoint() * A * A * Z).trace() + (D * ZpZ * ZpZ).trace();
    return t.real();
}

CMat<double> A_of(const SystemParams& p) { return diag_of<double>(p.a); }
CMat<double> D_of(const SystemParams& p) { return diag_of<double>(p.d); }

ComplexMatrix matrix_power(const ComplexMatrix& M, int k) {
    ComplexMatrix P = ComplexMatrix::Identity(M.rows(), M.cols());
    for (int i = 0; i < k; ++i) P = P * M;
    return P;
}

const Complex I(0.0, 1.0);

} // namespace

double h_k_lambda(const SystemParams& params, const WaveState& state) { return h_impl<double>(params, state.Z); }

ComplexMatrix grad_h_k_lambda(const SystemParams& params, const WaveState& state) {
    const ComplexMatrix P = shifted_mu_power<double>(params, state.Z, params.k - 1);
    return double(params.k) * P.topRightCorner(params.n_plus(), params.n_minus());
}

ManleyRowe manley_rowe(const SystemParams& params, const WaveState& state, int k) {
    if (k < 0) throw ValidationError("manley_rowe: k must be >= 0");
    return {alpha_impl<double>(params, state.Z, k), delta_impl<double>(params, state.Z, k)};
}

ComplexMatrix grad_alpha(const SystemParams& params, const WaveState& state, int k) {
    check_shape(params, state);
    return matrix_power(A_of(params), k) * state.Z;
}

ComplexMatrix grad_delta(const SystemParams& params, const WaveState& state, int k) {
    check_shape(params, state);
    return state.Z * matrix_power(D_of(params), k);
}

QuarticQuintic quartic_quintic(const SystemParams& params, const WaveState& state) {
    return {quartic_impl<double>(params, state.Z), quintic_impl<double>(params, state.Z)};
}

ComplexMatrix grad_quartic(const SystemParams& params, const WaveState& state) {
    check_shape(params, state);
    const ComplexMatrix& Z = state.Z;
    return A_of(params) * Z * D_of(params) + Z * Z.adjoint() * Z;
}

ComplexMatrix grad_quintic(const SystemParams& params, const WaveState& state) {
    check_shape(params, state);
    const ComplexMatrix& Z = state.Z;
    const ComplexMatrix A = A_of(params), D = D_of(params);
    const ComplexMatrix Zp = Z.adjoint();
    return A * Z * Zp * Z + Z * Zp * A * Z + A * Z * D * D + A * A * Z * D + Z * D * Zp * Z + Z * Zp * Z * D;
}

QuarticTerms quartic_terms(const SystemParams& params, const WaveState& state) {
    check_shape(params, state);
    const ComplexMatrix& Z = state.Z;
    const Eigen::Index n = Z.rows(), m = Z.cols();
    QuarticTerms t;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m; ++j) {
            const double w = std::norm(Z(i, j));
            t.free += params.a[static_cast<size_t>(i)] * params.d[static_cast<size_t>(j)] * w;
            t.self_kerr += 0.5 * w * w;
            for (Eigen::Index jj = 0; jj < m; ++jj)
                if (jj != j) t.cross_kerr_row += 0.5 * w * std::norm(Z(i, jj));
            for (Eigen::Index ii = 0; ii < n; ++ii)
                if (ii != i) t.cross_kerr_column += 0.5 * w * std::norm(Z(ii, j));
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index ii = 0; ii < n; ++ii) {
            if (ii == i) continue;
            for (Eigen::Index j = 0; j < m; ++j)
                for (Eigen::Index jj = 0; jj < m; ++jj) {
                    if (jj == j) continue;
                    t.conversion +=
                        0.5 * (Z(i, j) * std::conj(Z(ii, j)) * std::conj(Z(i, jj)) * Z(ii, jj)).real();
                }
        }
    return t;
}

ComplexMatrix quartic_vector_field(const SystemParams& params, const WaveState& state) {
    return I * grad_quartic(params, state);
}

ComplexMatrix hierarchy_vector_field(const SystemParams& params, const WaveState& state) {
    return I * grad_h_k_lambda(params, state);
}

ComplexMatrix quintic_vector_field(const SystemParams& params, const WaveState& state) {
    return I * grad_quintic(params, state);
}

Functional functional_h(const SystemParams& params) {
    return [params](const ExtMatrix& Z) { return h_impl<long double>(params, Z); };
}
Functional functional_alpha(const SystemParams& params, int k) {
    return [params, k](const ExtMatrix& Z) { return alpha_impl<long double>(params, Z, k); };
}
Functional functional_delta(const SystemParams& params, int k) {
    return [params, k](const ExtMatrix& Z) { return delta_impl<long double>(params, Z, k); };
}
Functional functional_quartic(const SystemParams& params) {
    return [params](const ExtMatrix& Z) { return quartic_impl<long double>(params, Z); };
}
Functional functional_quintic(const SystemParams& params) {
    return [params](const ExtMatrix& Z) { return quintic_impl<long double>(params, Z); };
}

void InvariantSet::add(std::string name, Fn fn) {
    for (const auto& n : names_)
        if (n == name) throw ValidationError("duplicate invariant name '" + name + "'");
    names_.push_back(std::move(name));
    fns_.push_back(std::move(fn));
}

std::vector<double> InvariantSet::evaluate(std::span<const double> y) const {
    std::vector<double> out;
    out.reserve(fns_.size());
    for (const auto& f : fns_) out.push_back(f(y));
    return out;
}

InvariantSet wave_invariants(const SystemParams& params) {
    const Eigen::Index n = params.n_plus(), m = params.n_minus();
    auto wave = [n, m](std::span<const double> y) { return WaveState{unflatten(y, n, m)}; };
    InvariantSet set;
    set.add("H", [=](std::span<const double> y) { return quartic_quintic(params, wave(y)).H; });
    set.add("F", [=](std::span<const double> y) { return quartic_quintic(params, wave(y)).F; });
    for (int k = 0; k <= 2; ++k)
        set.add("alpha" + std::to_string(k),
                [=](std::span<const double> y) { return manley_rowe(params, wave(y), k).alpha; });
    for (int k = 1; k <= 2; ++k)
        set.add("delta" + std::to_string(k),
                [=](std::span<const double> y) { return manley_rowe(params, wave(y), k).delta; });
    for (Eigen::Index j = 0; j < m; ++j)
        set.add("s" + std::to_string(j + 1),
                [=](std::span<const double> y) { return wave(y).Z.col(j).squaredNorm(); });
    return set;
}

} // namespace nwave

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nwave/linalg.hpp"

namespace nwave {

/// Tr((mu + lambda P+)^k) with k, lambda taken from params.
double h_k_lambda(const SystemParams& params, const WaveState& state);

/// dH_{k,lambda}/dZ^+ = k * upper-right block of (mu + lambda P+)^(k-1).
ComplexMatrix grad_h_k_lambda(const SystemParams& params, const WaveState& state);

struct ManleyRowe {
    double alpha;  // Tr(A^k Z Z^+)
    double delta;  // Tr(D^k Z^+ Z)
};
ManleyRowe manley_rowe(const SystemParams& params, const WaveState& state, int k);
ComplexMatrix grad_alpha(const SystemParams& params, const WaveState& state, int k);  // A^k Z
ComplexMatrix grad_delta(const SystemParams& params, const WaveState& state, int k);  // Z D^k

struct QuarticQuintic {
    double H;  // 1/2 Tr((Z^+Z)^2) + Tr(A Z D Z^+)
    double F;  // Tr A(ZZ^+)^2 + Tr(D^2 Z^+AZ + D Z^+A^2 Z) + Tr D(Z^+Z)^2
};
QuarticQuintic quartic_quintic(const SystemParams& params, const WaveState& state);
ComplexMatrix grad_quartic(const SystemParams& params, const WaveState& state);
ComplexMatrix grad_quintic(const SystemParams& params, const WaveState& state);

// The quartic H split mode by mode. Optical reading of each piece:
//   free        - linear dispersion, a_i d_j |z_ij|^2
//   self_kerr   - |z_ij|^4 / 2, a mode's own intensity shifting its phase
//   cross_kerr_row, cross_kerr_column
//               - |z_ij|^2 |z_ij'|^2 (same row) and |z_ij|^2 |z_i'j|^2
//                 (same column): one mode's intensity acting on another
//   conversion  - z_ij conj(z_i'j) conj(z_ij') z_i'j': two photons absorbed
//                 while two others are emitted
// The five pieces sum to quartic_quintic().H.
struct QuarticTerms {
    double free = 0, self_kerr = 0, cross_kerr_row = 0, cross_kerr_column = 0, conversion = 0;
    double total() const { return free + self_kerr + cross_kerr_row + cross_kerr_column + conversion; }
};
QuarticTerms quartic_terms(const SystemParams& params, const WaveState& state);

/// Zdot = i (A Z D + Z Z^+ Z).
ComplexMatrix quartic_vector_field(const SystemParams& params, const WaveState& state);
/// Zdot = i dH_{k,lambda}/dZ^+.
ComplexMatrix hierarchy_vector_field(const SystemParams& params, const WaveState& state);
/// Zdot = i dF/dZ^+.
ComplexMatrix quintic_vector_field(const SystemParams& params, const WaveState& state);

// Extended-precision functionals for the finite-difference oracle.
Functional functional_h(const SystemParams& params);  // uses params.k, params.lambda
Functional functional_alpha(const SystemParams& params, int k);
Functional functional_delta(const SystemParams& params, int k);
Functional functional_quartic(const SystemParams& params);
Functional functional_quintic(const SystemParams& params);

/// Named scalar functions of a flattened state. Names are unique.
class InvariantSet {
public:
    using Fn = std::function<double(std::span<const double>)>;

    void add(std::string name, Fn fn);
    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    const std::vector<std::string>& names() const { return names_; }
    std::vector<double> evaluate(std::span<const double> y) const;

private:
    std::vector<std::string> names_;
    std::vector<Fn> fns_;
};

/// H, F, alpha_0..2, delta_1..2 and the column norms s_j = (Z^+Z)_jj.
InvariantSet wave_invariants(const SystemParams& params);

} // namespace nwave

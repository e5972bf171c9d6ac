#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "nwave/linalg.hpp"

namespace nwave {

struct ResidualReport {
    std::string case_id;
    std::string relation;
    int samples = 0;
    double max_residual = 0;
    double tolerance = 0;
    bool pass = false;  // max_residual <= tolerance
    std::string note;
};

struct Shape {
    int n_plus = 1, n_minus = 1;
    std::string label() const { return std::to_string(n_plus) + "x" + std::to_string(n_minus); }
};

struct SamplingOptions {
    std::uint64_t seed = 20240601;
    int samples = 20;
    std::vector<double> scales{0.1, 1.0, 3.0};  // cycled over samples
    double fd_step = 1e-5;
    double tolerance = 1e-6;
};

/// Fixed, pairwise distinct a and d for a shape.
SystemParams default_params(const Shape& shape);

/// Entries uniform in the unit disc, times `scale`.
WaveState random_state(const Shape& shape, double scale, std::uint64_t seed, int index);

using ParamsFactory = std::function<SystemParams(const Shape&)>;

/// |{H_{k,lambda}, H_{n,lambda'}}| for k, n <= k_max over all lambda pairs.
std::vector<ResidualReport> check_involution(const std::vector<Shape>& shapes, int k_max,
                                             const std::vector<double>& lambdas, const SamplingOptions& opts,
                                             const ParamsFactory& params_for = nullptr);

/// Brackets among alpha_k, delta_l (k, l <= k_max) and against H_{m,lambda}
/// (m <= m_max).
std::vector<ResidualReport> check_manley_rowe(const std::vector<Shape>& shapes, int k_max, int m_max,
                                              const std::vector<double>& lambdas, const SamplingOptions& opts,
                                              const ParamsFactory& params_for = nullptr);

/// Pulled-back (s_k, r_k, Re eta_k, Im eta_k) on C^6 against the u(2)*
/// Lie-Poisson values (with the orientation fixed by the Z bracket), plus
/// centrality of s_k and of the per-block Casimir c_k = r_k^2/2 + 2|eta_k|^2.
std::vector<ResidualReport> check_poisson_map(const SamplingOptions& opts);

/// Analytic dF/dZ^+ against the oracle for the hierarchy (k <= k_max),
/// quartic H and quintic F, on 2x3 states.
std::vector<ResidualReport> check_gradients(int k_max, const std::vector<double>& lambdas,
                                            const SamplingOptions& opts);

bool all_pass(const std::vector<ResidualReport>& reports);
void write_residuals_csv(std::ostream& os, const std::vector<ResidualReport>& reports);
void write_residuals_text(std::ostream& os, const std::vector<ResidualReport>& reports);

} // namespace nwave

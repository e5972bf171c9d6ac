#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nwave/hierarchy.hpp"
#include "nwave/linalg.hpp"

namespace nwave {

using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_max = 0.0;    // 0: span length
    double h_init = 0.0;   // 0: automatic
    long max_steps = 2'000'000;
};

/// Dense output of one DOP853 run (Dormand-Prince 8(5,3) with the 7th order
/// continuous extension). Valid on [t_begin, t_end], either direction.
class DenseSolution {
public:
    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    std::size_t dimension() const { return n_; }
    long accepted_steps() const { return accepted_; }
    long rejected_steps() const { return rejected_; }
    long evaluations() const { return evaluations_; }

    std::vector<double> operator()(double t) const;
    void evaluate(double t, std::span<double> y) const;

private:
    friend DenseSolution solve_dense(const VectorField&, std::vector<double>, double, double,
                                     const IntegratorOptions&);
    struct Segment {
        double t0, h;
        std::vector<double> r;  // 8 blocks of n coefficients
    };
    std::size_t n_ = 0;
    double t_begin_ = 0, t_end_ = 0;
    std::vector<Segment> segs_;
    long accepted_ = 0, rejected_ = 0, evaluations_ = 0;
};

/// Throws StepUnderflowError (carrying the last accepted time) when the step
/// shrinks below roundoff, NumericalError on a non-finite derivative.
DenseSolution solve_dense(const VectorField& field, std::vector<double> y0, double t0, double t1,
                          const IntegratorOptions& opts = {});

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::string> coordinate_names;
    std::vector<std::string> invariant_names;
    std::vector<std::vector<double>> invariants;  // one row per time
    std::vector<double> drift;                    // max relative deviation per invariant
};

/// Integrates from grid.front() and samples on the (strictly increasing) grid.
Trajectory integrate(const VectorField& field, const std::vector<double>& y0, const std::vector<double>& grid,
                     const IntegratorOptions& opts = {}, std::vector<std::string> coordinate_names = {},
                     const InvariantSet* invariants = nullptr);

std::vector<double> uniform_grid(double t0, double t1, std::size_t samples);

struct DriftRow {
    std::string name;
    double initial = 0;
    double max_abs = 0;
    double max_rel = 0;  // max_abs / |initial|, or max_abs when initial == 0
};
using DriftTable = std::vector<DriftRow>;

/// Evaluates each invariant along the trajectory; fills traj.invariants/drift
/// when it is non-const.
DriftTable conservation_report(const Trajectory& traj, const InvariantSet& invariants);
DriftTable attach_invariants(Trajectory& traj, const InvariantSet& invariants);

/// Shortest decimal that round-trips.
std::string format_double(double x);
void write_csv(std::ostream& os, const Trajectory& traj);
void write_csv(const std::string& path, const Trajectory& traj);
void write_drift_csv(std::ostream& os, const DriftTable& table);

enum class WaveFlow { Quartic, Quintic, Hierarchy };
/// Z-flow as a field on flattened coordinates (see flatten()).
VectorField make_wave_field(const SystemParams& params, WaveFlow kind);

} // namespace nwave

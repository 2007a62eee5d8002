#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nprk/tableau.hpp"

namespace nprk {

using State = std::vector<double>;

/// Arguments of F: one state view per partition.
using ArgList = std::span<const std::span<const double>>;

/**
 * Right-hand side y' = F(y, ..., y) given through an M-argument partition F.
 * `eval` must be re-entrant; it writes F(args) into `out` (length dim).
 */
struct PartitionedOde {
    int dim = 0;
    int partitions = 2;
    std::function<void(ArgList args, std::span<double> out)> eval;
    std::string description;
    /// Optional closed form of f(y) = F(y, ..., y), used for consistency checks.
    std::function<void(std::span<const double> y, std::span<double> out)> unpartitioned;

    State operator()(std::span<const State> args) const;
    /// F(y, ..., y)
    State diagonal(std::span<const double> y) const;
};

struct StageSolverConfig {
    double newton_tol = 1e-12;
    int max_newton_iters = 50;
    double fd_epsilon = 1e-7;
    bool fallback_fixed_point = true;
    int fixed_point_max_iters = 200;
};

struct StepStats {
    int newton_iterations = 0;
    int fixed_point_iterations = 0;
    bool used_fixed_point = false;
    bool coupled = false; ///< all stages solved as one Newton system
    double residual_norm = 0.0;
};

struct StepResult {
    State y;
    State increment; ///< y - y_n, before rounding into y
    std::vector<State> stages;
    StepStats stats;
};

/// Stage coupling of a tableau, detected from its nonzero pattern.
struct StageStructure {
    std::vector<bool> explicit_stage; ///< row i only references stages < i
    bool sequential = true;           ///< no row references a later stage
};

StageStructure analyze_stages(const NprkTableau& t);

/// One step of the method; throws SolverError on non-convergence or non-finite stages.
StepResult step_detail(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h,
                       const StageSolverConfig& cfg = {});

State step(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h,
           const StageSolverConfig& cfg = {});

/// Max-norm residual of the stage equations for given stages.
double stage_residual(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h,
                      const std::vector<State>& stages);

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<StepStats> stats;
};

/**
 * Fixed steps of size h from t0; the last step is shortened to land exactly on t_end.
 * Increments are accumulated with compensated summation.
 */
Trajectory integrate(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y0, double t0,
                     double t_end, double h, const StageSolverConfig& cfg = {});

/**
 * l1 norm of the difference between the updates of two tableaux that share
 * their a tensor, computed from a single stage solve as
 * h * || sum_K (b_K - b~_K) F(Y_K) ||_1.
 */
double embedded_diff(const NprkTableau& primary, const NprkTableau& embedded, const PartitionedOde& ode,
                     std::span<const double> y, double h, const StageSolverConfig& cfg = {});

/// CSV with header t,y0,y1,... and one row per stored state.
void write_csv(const Trajectory& traj, std::ostream& os);

} // namespace nprk

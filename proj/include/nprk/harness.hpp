#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nprk/integrator.hpp"
#include "nprk/tree.hpp"

namespace nprk {

/// u' = u - a u v, v' = v + a u v, partitioned as F((u1,v1),(u2,v2)) = (u2 - a u1 v2, v1 + a u2 v1).
PartitionedOde lotka_volterra(double alpha);

/// Periodic viscous Burgers on [0,1) with n_cells points: F(u,v) = eps D u + diag(v) A u.
PartitionedOde burgers(double epsilon, int n_cells);

/**
 * Triangular polynomial system whose only elementary differential that is
 * nonzero at y = 0 belongs to `tree`. Node k of the canonical tree owns
 * component |tree| - 1 - k, so the root is the last component. Leaves satisfy
 * y' = 1; an inner node multiplies its children's components, each taken
 * from the argument matching the edge color, and divides by the product of
 * mu! over its runs of identical branches. With y(0) = 0 the exact solution is
 *   y_k(t) = alpha(subtree_k) t^|subtree_k| / |subtree_k|!.
 */
PartitionedOde witness_ode(const ColoredTree& tree);

/// Exact witness solution at time t, one entry per component.
State witness_exact(const ColoredTree& tree, double t);

/**
 * Coefficient c_n of y(h) = c_n h^n + ... fitted from samples: a least-squares
 * polynomial of `degree` in h through y(h)/h^n, evaluated at h = 0.
 */
double taylor_coefficient(const std::vector<double>& h, const std::vector<double>& y, int n, int degree = 3);

/// h^|tau| coefficient of the root component after one step of `t` on the witness of `tree`.
double witness_coefficient(const NprkTableau& t, const ColoredTree& tree);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_stderr = 0.0; ///< sqrt(SSR / (n - 2))
};

/// Ordinary least squares y = slope * x + intercept; needs at least 3 points.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Slope fit of log10(value) against log10(h).
LinearFit fit_loglog(const std::vector<double>& h, const std::vector<double>& value);

struct ConvergenceResult {
    std::vector<double> h_values;
    std::vector<double> errors;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double residual_stderr = 0.0;
    bool fitted = false; ///< false when some error is zero or the fit is degenerate
};

/// Minimum span of h values, in decades, accepted by convergence_study.
inline constexpr double kMinDecades = 1.0;

/**
 * Integrates to t_end for each h (strictly decreasing, at least 4 values
 * spanning kMinDecades) and fits the l1 error against `reference`.
 */
ConvergenceResult convergence_study(const NprkTableau& t, const PartitionedOde& ode, const State& y0, double t_end,
                                    const std::vector<double>& h_values, const State& reference,
                                    const StageSolverConfig& cfg = {}, unsigned threads = 1);

/// Reference step used for Lotka-Volterra studies (Method 1).
inline constexpr double kReferenceStep = 1e-4;

/**
 * Lotka-Volterra state at t_end from y0 computed with Method 1 at
 * kReferenceStep. When `cache_dir` is set the result is read from or stored in
 * a file named by a hash of the run parameters.
 */
State lotka_volterra_reference(double alpha, const State& y0, double t_end,
                               const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

struct ScanPoint {
    double alpha = 0.0;
    double h = 0.0;
    double estimate = 0.0;
};

/// One step of Methods 1 and 2 from y0 for every (alpha, h); rows ordered alpha-major.
std::vector<ScanPoint> coupling_scan(const std::vector<double>& alpha_grid, const std::vector<double>& h_values,
                                     const State& y0, const StageSolverConfig& cfg = {}, unsigned threads = 1);

/// 0, 0.05, ..., 3
std::vector<double> default_alpha_grid();

/// 64-bit FNV-1a, used to name cache files.
std::uint64_t fnv1a(const std::string& text);

} // namespace nprk

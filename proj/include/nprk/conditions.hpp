#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nprk/tableau.hpp"
#include "nprk/tree.hpp"

namespace nprk {

/// Default absolute residual tolerance for order verification.
inline constexpr double kDefaultOrderTol = 1e-10;

/// Default iteration cap for the naive multi-index summation.
inline constexpr std::uint64_t kNaiveIterationCap = 1'000'000'000;

/// One order condition evaluated for one tableau.
struct ConditionReport {
    ColoredTree tree;
    int order = 0;
    double weight = 0.0;   ///< Phi(tau)
    double target = 0.0;   ///< 1/gamma(tau)
    double residual = 0.0; ///< Phi(tau) - 1/gamma(tau)
    ConditionClass cls;
};

struct OrderVerdict {
    int detected_order = 0;
    int examined_order = 0; ///< highest order whose conditions were evaluated
    std::vector<ConditionReport> failing; ///< failing conditions of order detected_order + 1
    double tol = kDefaultOrderTol;
};

/**
 * Elementary weight Phi(tau) by recursive contraction.
 *
 * Each non-root node contributes a stage vector
 *   V_q = sum_K a[q, K] * prod_{children (t, c)} V(t)_{K_c},
 * and Phi = sum_J b[J] * prod_{root children (t, c)} V(t)_{J_c}.
 * Cost is O(|tau| * s^(M+1)).
 */
double elementary_weight(const NprkTableau& t, const ColoredTree& tree);

/// Literal full multi-index summation over every node; exponential in |tau|, used as an oracle.
double elementary_weight_naive(const NprkTableau& t, const ColoredTree& tree,
                               std::uint64_t max_iterations = kNaiveIterationCap);

ConditionReport evaluate_condition(const NprkTableau& t, const ColoredTree& tree);

/// result[q-1] holds the reports for order q, in canonical tree order.
std::vector<std::vector<ConditionReport>> condition_set(const NprkTableau& t, int max_order,
                                                        std::uint64_t max_trees = kDefaultTreeCap,
                                                        unsigned threads = 1);

OrderVerdict verify_order(const NprkTableau& t, int p_max, double tol = kDefaultOrderTol,
                          std::uint64_t max_trees = kDefaultTreeCap);

enum class RenderStyle { Text, Latex };

/// "† Σ b_{ij} a_{iuv} a_{jkl} = 1/3"; Latex style is wrapped in \[ ... \].
std::string render_condition(const ColoredTree& tree, RenderStyle style = RenderStyle::Text);

/// "1/6", "1"
std::string rational_reciprocal(std::uint64_t denominator);

} // namespace nprk

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace nprk {

using BigInt = boost::multiprecision::cpp_int;

/// Default cap on the number of trees a single generation request may produce.
inline constexpr std::uint64_t kDefaultTreeCap = 10'000'000;

/**
 * Edge-colored rooted tree in level-sequence form.
 *
 * Nodes are listed in depth-first order. `level_seq[k]` is the depth of node k
 * (root = 1). `color_seq[k]` is the color of the edge joining node k to its
 * parent; `color_seq[0]` belongs to the root, is always 0 and is never read.
 * Colors are 0-based: color r means differentiation in argument r+1 of F.
 */
struct ColoredTree {
    std::vector<int> level_seq;
    std::vector<int> color_seq;
    int num_colors = 1;

    std::size_t order() const noexcept { return level_seq.size(); }

    friend bool operator==(const ColoredTree&, const ColoredTree&) = default;
};

/// The single-node tree for M colors.
ColoredTree single_node(int num_colors);

/// Throws ValidationError naming the offending index if the sequences are not a valid tree.
void validate(const ColoredTree& tree);

/// parent[k] for k >= 1; parent[0] == -1.
std::vector<int> parents(const ColoredTree& tree);

/// A child subtree together with the color of the edge that joins it to the root.
struct Branch {
    ColoredTree subtree;
    int color = 0;

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// Splits tau = [t1|a1, ..., tm|am] into its branches, in the stored sibling order.
std::vector<Branch> branches(const ColoredTree& tree);

/// Inverse of branches(): attaches each subtree to a new root, preserving order.
ColoredTree graft(const std::vector<Branch>& children, int num_colors);

/**
 * Total order used for canonical forms: position-wise comparison of the
 * (level, color) pairs, lexicographic, a proper prefix comparing smaller.
 * The root color is included but is always 0 in valid trees.
 */
std::strong_ordering compare_trees(const ColoredTree& lhs, const ColoredTree& rhs);

/// Ordering of branches as siblings: first by edge color, then by compare_trees.
std::strong_ordering compare_branches(const Branch& lhs, const Branch& rhs);

/// Maximal representative of the sibling-permutation class of `tree`.
ColoredTree canonicalize(const ColoredTree& tree);

bool is_canonical(const ColoredTree& tree);

/// All canonical trees of the given order, ascending in compare_trees order.
std::vector<ColoredTree> generate_trees(int num_colors, int order,
                                        std::uint64_t max_trees = kDefaultTreeCap);

/**
 * Streams the canonical trees of `order` in ascending canonical order without
 * materializing them. Trees of lower orders are built once and kept in memory.
 */
void for_each_tree(int num_colors, int order, const std::function<void(const ColoredTree&)>& visit,
                   std::uint64_t max_trees = kDefaultTreeCap);

/// gamma(tau) = |tau| * gamma(t1) * ... * gamma(tm).
std::uint64_t density(const ColoredTree& tree);

/// Symmetry factor alpha(tau): number of heap-ordered labelings of the class.
BigInt symmetry(const ColoredTree& tree);

/// Number of color-preserving automorphisms: the product of mu! over all nodes.
BigInt automorphisms(const ColoredTree& tree);

/// True iff some node has at least two out-edges of different colors.
bool is_color_branching(const ColoredTree& tree);

enum class ConditionKind { UnderlyingRK, LinearCoupling, NonlinearCoupling };

struct ConditionClass {
    ConditionKind kind = ConditionKind::UnderlyingRK;
    int color = 0; ///< Edge color for UnderlyingRK; 0 for the single node.

    /// "", "*" or "†" as in the usual printed condition lists.
    std::string_view tag() const noexcept;
    /// "underlying", "linear" or "nonlinear".
    std::string_view name() const noexcept;

    friend bool operator==(const ConditionClass&, const ConditionClass&) = default;
};

ConditionClass classify(const ColoredTree& tree);

struct ConditionCount {
    std::uint64_t total = 0;
    std::uint64_t coupling = 0; ///< linear + nonlinear
    std::uint64_t underlying = 0;
    std::uint64_t linear = 0;
    std::uint64_t nonlinear = 0;
};

/// Per-class census of the order conditions of one order. Throws BudgetExceeded above `max_trees`.
ConditionCount count_conditions(int num_colors, int order, std::uint64_t max_trees = kDefaultTreeCap);

/// Number of M-edge-colored trees of `order` from the generating-function recurrence.
BigInt count_ark_conditions(int num_colors, int order);

/// "L:1,2,2;C:0,1,0"
std::string to_compact(const ColoredTree& tree);
ColoredTree parse_compact(std::string_view text, int num_colors);

} // namespace nprk

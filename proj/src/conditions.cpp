#include "nprk/conditions.hpp"

#include <algorithm>
#include <cmath>

#include "nprk/errors.hpp"
#include "nprk/parallel.hpp"

namespace nprk {

namespace {

void check_colors(const NprkTableau& t, const ColoredTree& tree) {
    validate(tree);
    if (tree.num_colors != t.M())
        throw DomainError("tree has " + std::to_string(tree.num_colors) + " edge colors but the tableau has M = " +
                          std::to_string(t.M()) + " partitions");
}

// prod_r w[r][K_r] for every multi-index K; w[r] is a length-s factor for argument r.
std::vector<double> multi_products(const NprkTableau& t, const std::vector<std::vector<double>>& w) {
    std::vector<double> prod(t.multi_count(), 1.0);
    for (std::size_t K = 0; K < prod.size(); ++K)
        for (int r = 0; r < t.M(); ++r) prod[K] *= w[static_cast<std::size_t>(r)][static_cast<std::size_t>(t.component(K, r))];
    return prod;
}

} // namespace

double elementary_weight(const NprkTableau& t, const ColoredTree& tree) {
    check_colors(t, tree);
    const auto n = tree.order();
    const auto s = static_cast<std::size_t>(t.s());
    const auto M = static_cast<std::size_t>(t.M());
    const auto par = parents(tree);

    // factors[k][r][q]: product of the stage vectors of the children of node k joined by color r.
    std::vector<std::vector<std::vector<double>>> factors(n, std::vector<std::vector<double>>(M, std::vector<double>(s, 1.0)));
    // Children follow their parent in depth-first order, so a reverse sweep sees every child first.
    for (std::size_t k = n; k-- > 1;) {
        const auto prod = multi_products(t, factors[k]);
        auto& into = factors[static_cast<std::size_t>(par[k])][static_cast<std::size_t>(tree.color_seq[k])];
        for (std::size_t q = 0; q < s; ++q) {
            double v = 0.0;
            for (std::size_t K = 0; K < prod.size(); ++K) v += t.a_at(static_cast<int>(q), K) * prod[K];
            into[q] *= v;
        }
    }
    const auto prod = multi_products(t, factors[0]);
    double phi = 0.0;
    for (std::size_t K = 0; K < prod.size(); ++K) phi += t.b_at(K) * prod[K];
    return phi;
}

double elementary_weight_naive(const NprkTableau& t, const ColoredTree& tree, std::uint64_t max_iterations) {
    check_colors(t, tree);
    const std::size_t n = tree.order();
    const std::size_t per_node = t.multi_count();
    double iterations = std::pow(static_cast<double>(per_node), static_cast<double>(n));
    if (iterations > static_cast<double>(max_iterations))
        throw BudgetExceeded("naive summation needs " + std::to_string(iterations) + " iterations, above the cap of " +
                             std::to_string(max_iterations) + "; use elementary_weight instead");
    const auto par = parents(tree);

    // One M-multi-index per node, advanced like an odometer.
    std::vector<std::size_t> idx(n, 0);
    double sum = 0.0;
    while (true) {
        double prod = 1.0;
        for (std::size_t k = n; k-- > 1;) {
            const std::size_t p = static_cast<std::size_t>(par[k]);
            const int parent_component = t.component(idx[p], tree.color_seq[k]);
            prod *= t.a_at(parent_component, idx[k]);
        }
        sum += t.b_at(idx[0]) * prod;

        std::size_t d = 0;
        while (d < n && ++idx[d] == per_node) idx[d++] = 0;
        if (d == n) break;
    }
    return sum;
}

ConditionReport evaluate_condition(const NprkTableau& t, const ColoredTree& tree) {
    ConditionReport rep;
    rep.tree = tree;
    rep.order = static_cast<int>(tree.order());
    rep.weight = elementary_weight(t, tree);
    rep.target = 1.0 / static_cast<double>(density(tree));
    rep.residual = rep.weight - rep.target;
    rep.cls = classify(tree);
    return rep;
}

std::vector<std::vector<ConditionReport>> condition_set(const NprkTableau& t, int max_order, std::uint64_t max_trees,
                                                        unsigned threads) {
    if (max_order < 1) throw DomainError("max_order must be >= 1");
    std::vector<std::vector<ConditionReport>> out;
    for (int q = 1; q <= max_order; ++q) {
        const auto trees = generate_trees(t.M(), q, max_trees);
        std::vector<ConditionReport> reports(trees.size());
        parallel_for(trees.size(), threads, [&](std::size_t k) { reports[k] = evaluate_condition(t, trees[k]); });
        out.push_back(std::move(reports));
    }
    return out;
}

OrderVerdict verify_order(const NprkTableau& t, int p_max, double tol, std::uint64_t max_trees) {
    if (p_max < 1) throw DomainError("p_max must be >= 1");
    if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
    OrderVerdict v;
    v.tol = tol;
    for (int q = 1; q <= p_max; ++q) {
        v.examined_order = q;
        for (const auto& tree : generate_trees(t.M(), q, max_trees)) {
            auto rep = evaluate_condition(t, tree);
            if (!(std::abs(rep.residual) <= tol)) v.failing.push_back(std::move(rep));
        }
        if (!v.failing.empty()) return v;
        v.detected_order = q;
    }
    return v;
}

std::string rational_reciprocal(std::uint64_t denominator) {
    return denominator == 1 ? std::string("1") : "1/" + std::to_string(denominator);
}

namespace {

// Index names per node: pairs for M = 2 and triples for M = 3 follow the usual
// printed alphabet; other M draw consecutive letters from a general pool.
std::vector<std::vector<std::string>> index_names(int num_colors, std::size_t nodes) {
    static const std::vector<std::string> pairs = {"ij", "kl", "uv", "ab", "mn", "pq", "rs",
                                                   "wx", "yz", "cd", "ef", "gh", "ot"};
    static const std::vector<std::string> triples = {"ijk", "uvw", "abc", "def", "lmn", "pqr", "stx", "ghy"};
    static const std::string pool = "ijkluvabmnpqrswxyzcdefghot";
    const auto M = static_cast<std::size_t>(num_colors);

    std::vector<std::vector<std::string>> names(nodes);
    const bool letters = (M == 2 && nodes <= pairs.size()) || (M == 3 && nodes <= triples.size()) ||
                         (M != 2 && M != 3 && nodes * M <= pool.size());
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t r = 0; r < M; ++r) {
            if (!letters)
                names[k].push_back(std::string(1, pool[r % pool.size()]) + std::to_string(k + 1));
            else if (M == 2)
                names[k].push_back(std::string(1, pairs[k][r]));
            else if (M == 3)
                names[k].push_back(std::string(1, triples[k][r]));
            else
                names[k].push_back(std::string(1, pool[k * M + r]));
        }
    }
    return names;
}

std::string join_indices(const std::vector<std::string>& tokens) {
    const bool single = std::all_of(tokens.begin(), tokens.end(), [](const std::string& x) { return x.size() == 1; });
    std::string out;
    for (std::size_t k = 0; k < tokens.size(); ++k) out += (k && !single ? "," : "") + tokens[k];
    return out;
}

} // namespace

std::string render_condition(const ColoredTree& input, RenderStyle style) {
    const ColoredTree tree = canonicalize(input);
    const auto names = index_names(tree.num_colors, tree.order());
    const auto par = parents(tree);

    std::vector<std::string> a_factors;
    for (std::size_t k = 1; k < tree.order(); ++k) {
        std::vector<std::string> tokens{names[static_cast<std::size_t>(par[k])][static_cast<std::size_t>(tree.color_seq[k])]};
        tokens.insert(tokens.end(), names[k].begin(), names[k].end());
        a_factors.push_back(join_indices(tokens));
    }
    std::sort(a_factors.begin(), a_factors.end());

    const auto cls = classify(tree);
    const auto gamma = density(tree);
    std::string out;
    if (style == RenderStyle::Latex) {
        out = "\\[ ";
        if (cls.kind == ConditionKind::LinearCoupling) out += "{}^{*}";
        if (cls.kind == ConditionKind::NonlinearCoupling) out += "{}^{\\dagger}";
        out += "\\sum b_{" + join_indices(names[0]) + "}";
        for (const auto& f : a_factors) out += " a_{" + f + "}";
        out += gamma == 1 ? std::string(" = 1") : " = \\frac{1}{" + std::to_string(gamma) + "}";
        out += " \\]";
        return out;
    }
    if (!cls.tag().empty()) out += std::string(cls.tag()) + " ";
    out += "Σ b_{" + join_indices(names[0]) + "}";
    for (const auto& f : a_factors) out += " a_{" + f + "}";
    out += " = " + rational_reciprocal(gamma);
    return out;
}

} // namespace nprk

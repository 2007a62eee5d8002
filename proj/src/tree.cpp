#include "nprk/tree.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "nprk/errors.hpp"

namespace nprk {

namespace {

BigInt factorial(int n) {
    BigInt f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

void check_counts(int num_colors, int order) {
    if (num_colors < 1) throw DomainError("number of colors must be >= 1, got " + std::to_string(num_colors));
    if (order < 1) throw DomainError("order must be >= 1, got " + std::to_string(order));
}

// Sizes of the subtree rooted at every node.
std::vector<int> subtree_sizes(const ColoredTree& tree) {
    const auto par = parents(tree);
    std::vector<int> size(tree.order(), 1);
    for (std::size_t k = tree.order(); k-- > 1;) size[static_cast<std::size_t>(par[k])] += size[k];
    return size;
}

struct Item {
    int size;
    const ColoredTree* tree;
    int color;
};

// Canonical trees of every order up to some bound, plus the sorted list of
// (subtree, edge color) items from which trees of the next order are assembled.
class Catalog {
public:
    explicit Catalog(int num_colors) : num_colors_(num_colors) {
        by_order_.reserve(64);
        by_order_.emplace_back();                       // order 0 unused
        by_order_.push_back({single_node(num_colors)}); // order 1
    }

    int built() const { return static_cast<int>(by_order_.size()) - 1; }

    // Makes sure all trees of order < `order` exist and the item list covers them.
    void prepare(int order) {
        while (built() < order - 1) {
            const int next = built() + 1;
            refresh_items(next);
            std::vector<ColoredTree> trees;
            enumerate(next, [&](const ColoredTree& t) { trees.push_back(t); });
            by_order_.push_back(std::move(trees));
        }
        refresh_items(order);
    }

    template <typename Visit>
    void enumerate(int order, Visit&& visit) {
        if (order == 1) {
            visit(by_order_[1].front());
            return;
        }
        ColoredTree scratch;
        scratch.num_colors = num_colors_;
        scratch.level_seq.assign(1, 1);
        scratch.color_seq.assign(1, 0);
        recurse(order - 1, items_.size(), scratch, visit);
    }

private:
    void refresh_items(int order) {
        if (items_order_ == order) return;
        items_.clear();
        for (int sz = 1; sz < order; ++sz)
            for (const auto& t : by_order_[static_cast<std::size_t>(sz)])
                for (int c = 0; c < num_colors_; ++c) items_.push_back({sz, &t, c});
        std::sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) {
            if (a.color != b.color) return a.color < b.color;
            return compare_trees(*a.tree, *b.tree) < 0;
        });
        fitting_.assign(static_cast<std::size_t>(std::max(order, 1)), {});
        for (std::size_t idx = 0; idx < items_.size(); ++idx)
            for (int r = items_[idx].size; r < order; ++r) fitting_[static_cast<std::size_t>(r)].push_back(idx);
        items_order_ = order;
    }

    // Appends children in non-increasing item order; `bound` is one past the
    // largest admissible item index. Iterating ascending at each position
    // yields trees in ascending canonical order.
    template <typename Visit>
    void recurse(int remaining, std::size_t bound, ColoredTree& scratch, Visit& visit) {
        if (remaining == 0) {
            visit(static_cast<const ColoredTree&>(scratch));
            return;
        }
        for (std::size_t idx : fitting_[static_cast<std::size_t>(remaining)]) {
            if (idx >= bound) break;
            const Item& item = items_[idx];
            const std::size_t mark = scratch.level_seq.size();
            const auto& sub = *item.tree;
            for (std::size_t k = 0; k < sub.order(); ++k) {
                scratch.level_seq.push_back(sub.level_seq[k] + 1);
                scratch.color_seq.push_back(k == 0 ? item.color : sub.color_seq[k]);
            }
            recurse(remaining - item.size, idx + 1, scratch, visit);
            scratch.level_seq.resize(mark);
            scratch.color_seq.resize(mark);
        }
    }

    int num_colors_;
    std::vector<std::vector<ColoredTree>> by_order_;
    std::vector<Item> items_;
    std::vector<std::vector<std::size_t>> fitting_; // fitting_[r]: sorted item indices with size <= r
    int items_order_ = 0;
};

void check_budget(int num_colors, int order, std::uint64_t max_trees) {
    const BigInt expected = count_ark_conditions(num_colors, order);
    if (expected > max_trees) {
        std::ostringstream msg;
        msg << "order " << order << " with " << num_colors << " colors has " << expected
            << " trees, above the cap of " << max_trees;
        throw BudgetExceeded(msg.str());
    }
}

} // namespace

ColoredTree single_node(int num_colors) {
    if (num_colors < 1) throw DomainError("number of colors must be >= 1");
    return ColoredTree{{1}, {0}, num_colors};
}

void validate(const ColoredTree& tree) {
    if (tree.num_colors < 1) throw ValidationError("num_colors must be >= 1");
    const auto& lv = tree.level_seq;
    if (lv.empty()) throw ValidationError("level sequence is empty");
    if (tree.color_seq.size() != lv.size())
        throw ValidationError("color sequence length " + std::to_string(tree.color_seq.size()) +
                              " differs from level sequence length " + std::to_string(lv.size()));
    if (lv[0] != 1) throw ValidationError("level sequence index 0 must be 1 (root), got " + std::to_string(lv[0]));
    if (tree.color_seq[0] != 0)
        throw ValidationError("color sequence index 0 (root) must be 0, got " + std::to_string(tree.color_seq[0]));
    for (std::size_t k = 1; k < lv.size(); ++k) {
        if (lv[k] < 2 || lv[k] > lv[k - 1] + 1)
            throw ValidationError("level sequence index " + std::to_string(k) + " has invalid level " +
                                  std::to_string(lv[k]));
        const int c = tree.color_seq[k];
        if (c < 0 || c >= tree.num_colors)
            throw ValidationError("color sequence index " + std::to_string(k) + " has color " + std::to_string(c) +
                                  " outside [0, " + std::to_string(tree.num_colors - 1) + "]");
    }
}

std::vector<int> parents(const ColoredTree& tree) {
    std::vector<int> par(tree.order(), -1);
    std::vector<int> last_at_level(tree.order() + 2, -1);
    for (std::size_t k = 0; k < tree.order(); ++k) {
        const int lvl = tree.level_seq[k];
        if (k > 0) par[k] = last_at_level[static_cast<std::size_t>(lvl - 1)];
        last_at_level[static_cast<std::size_t>(lvl)] = static_cast<int>(k);
    }
    return par;
}

std::vector<Branch> branches(const ColoredTree& tree) {
    std::vector<Branch> out;
    const std::size_t n = tree.order();
    std::size_t k = 1;
    while (k < n) {
        std::size_t end = k + 1;
        while (end < n && tree.level_seq[end] > 2) ++end;
        Branch br;
        br.color = tree.color_seq[k];
        br.subtree.num_colors = tree.num_colors;
        for (std::size_t j = k; j < end; ++j) {
            br.subtree.level_seq.push_back(tree.level_seq[j] - 1);
            br.subtree.color_seq.push_back(j == k ? 0 : tree.color_seq[j]);
        }
        out.push_back(std::move(br));
        k = end;
    }
    return out;
}

ColoredTree graft(const std::vector<Branch>& children, int num_colors) {
    ColoredTree t = single_node(num_colors);
    for (const auto& br : children) {
        for (std::size_t j = 0; j < br.subtree.order(); ++j) {
            t.level_seq.push_back(br.subtree.level_seq[j] + 1);
            t.color_seq.push_back(j == 0 ? br.color : br.subtree.color_seq[j]);
        }
    }
    return t;
}

std::strong_ordering compare_trees(const ColoredTree& lhs, const ColoredTree& rhs) {
    const std::size_t n = std::min(lhs.order(), rhs.order());
    for (std::size_t k = 0; k < n; ++k) {
        if (auto c = lhs.level_seq[k] <=> rhs.level_seq[k]; c != 0) return c;
        if (auto c = lhs.color_seq[k] <=> rhs.color_seq[k]; c != 0) return c;
    }
    return lhs.order() <=> rhs.order();
}

std::strong_ordering compare_branches(const Branch& lhs, const Branch& rhs) {
    if (auto c = lhs.color <=> rhs.color; c != 0) return c;
    return compare_trees(lhs.subtree, rhs.subtree);
}

ColoredTree canonicalize(const ColoredTree& tree) {
    validate(tree);
    auto kids = branches(tree);
    for (auto& br : kids) br.subtree = canonicalize(br.subtree);
    std::sort(kids.begin(), kids.end(), [](const Branch& a, const Branch& b) { return compare_branches(a, b) > 0; });
    return graft(kids, tree.num_colors);
}

bool is_canonical(const ColoredTree& tree) { return canonicalize(tree) == tree; }

std::vector<ColoredTree> generate_trees(int num_colors, int order, std::uint64_t max_trees) {
    std::vector<ColoredTree> out;
    for_each_tree(num_colors, order, [&](const ColoredTree& t) { out.push_back(t); }, max_trees);
    return out;
}

void for_each_tree(int num_colors, int order, const std::function<void(const ColoredTree&)>& visit,
                   std::uint64_t max_trees) {
    check_counts(num_colors, order);
    check_budget(num_colors, order, max_trees);
    Catalog catalog(num_colors);
    catalog.prepare(order);
    catalog.enumerate(order, visit);
}

std::uint64_t density(const ColoredTree& tree) {
    validate(tree);
    std::uint64_t g = 1;
    for (int sz : subtree_sizes(tree)) g *= static_cast<std::uint64_t>(sz);
    return g;
}

BigInt symmetry(const ColoredTree& tree) {
    const ColoredTree canon = canonicalize(tree);
    const auto kids = branches(canon);
    BigInt num = factorial(static_cast<int>(canon.order()) - 1);
    BigInt den = 1;
    std::size_t run = 0;
    for (std::size_t k = 0; k < kids.size(); ++k) {
        num *= symmetry(kids[k].subtree);
        den *= factorial(static_cast<int>(kids[k].subtree.order()));
        run = (k > 0 && kids[k] == kids[k - 1]) ? run + 1 : 1;
        den *= run; // accumulates mu! over each run of equal branches
    }
    return num / den;
}

BigInt automorphisms(const ColoredTree& tree) {
    const ColoredTree canon = canonicalize(tree);
    const auto kids = branches(canon);
    BigInt count = 1;
    std::size_t run = 0;
    for (std::size_t k = 0; k < kids.size(); ++k) {
        count *= automorphisms(kids[k].subtree);
        run = (k > 0 && kids[k] == kids[k - 1]) ? run + 1 : 1;
        count *= run;
    }
    return count;
}

bool is_color_branching(const ColoredTree& tree) {
    validate(tree);
    const auto par = parents(tree);
    std::vector<int> first_color(tree.order(), -1);
    for (std::size_t k = 1; k < tree.order(); ++k) {
        auto& fc = first_color[static_cast<std::size_t>(par[k])];
        if (fc < 0)
            fc = tree.color_seq[k];
        else if (fc != tree.color_seq[k])
            return true;
    }
    return false;
}

std::string_view ConditionClass::tag() const noexcept {
    switch (kind) {
    case ConditionKind::LinearCoupling: return "*";
    case ConditionKind::NonlinearCoupling: return "†";
    default: return "";
    }
}

std::string_view ConditionClass::name() const noexcept {
    switch (kind) {
    case ConditionKind::LinearCoupling: return "linear";
    case ConditionKind::NonlinearCoupling: return "nonlinear";
    default: return "underlying";
    }
}

ConditionClass classify(const ColoredTree& tree) {
    validate(tree);
    if (is_color_branching(tree)) return {ConditionKind::NonlinearCoupling, 0};
    int color = -1;
    for (std::size_t k = 1; k < tree.order(); ++k) {
        if (color < 0)
            color = tree.color_seq[k];
        else if (color != tree.color_seq[k])
            return {ConditionKind::LinearCoupling, 0};
    }
    return {ConditionKind::UnderlyingRK, std::max(color, 0)};
}

ConditionCount count_conditions(int num_colors, int order, std::uint64_t max_trees) {
    ConditionCount count;
    for_each_tree(
        num_colors, order,
        [&](const ColoredTree& t) {
            ++count.total;
            switch (classify(t).kind) {
            case ConditionKind::UnderlyingRK: ++count.underlying; break;
            case ConditionKind::LinearCoupling: ++count.linear; break;
            case ConditionKind::NonlinearCoupling: ++count.nonlinear; break;
            }
        },
        max_trees);
    count.coupling = count.linear + count.nonlinear;
    return count;
}

BigInt count_ark_conditions(int num_colors, int order) {
    check_counts(num_colors, order);
    // t(x) = x * prod_i (1 - x^i)^(-M t_i); Euler transform:
    // n t_{n+1} = sum_{k=1..n} c_k t_{n-k+1},  c_k = M * sum_{d | k} d t_d.
    std::vector<BigInt> t(static_cast<std::size_t>(order) + 1, 0);
    std::vector<BigInt> c(static_cast<std::size_t>(order) + 1, 0);
    t[1] = 1;
    for (int n = 1; n < order; ++n) {
        for (int d = 1; d <= n; ++d)
            if (n % d == 0) c[static_cast<std::size_t>(n)] += BigInt(num_colors) * d * t[static_cast<std::size_t>(d)];
        BigInt acc = 0;
        for (int k = 1; k <= n; ++k) acc += c[static_cast<std::size_t>(k)] * t[static_cast<std::size_t>(n - k + 1)];
        t[static_cast<std::size_t>(n) + 1] = acc / n;
    }
    return t[static_cast<std::size_t>(order)];
}

std::string to_compact(const ColoredTree& tree) {
    std::string out = "L:";
    for (std::size_t k = 0; k < tree.order(); ++k) out += (k ? "," : "") + std::to_string(tree.level_seq[k]);
    out += ";C:";
    for (std::size_t k = 0; k < tree.order(); ++k) out += (k ? "," : "") + std::to_string(tree.color_seq[k]);
    return out;
}

namespace {

std::vector<int> parse_int_list(std::string_view text, std::string_view what) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view tok = text.substr(pos, end - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        int v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size())
            throw ValidationError("cannot parse " + std::string(what) + " entry '" + std::string(tok) + "'");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

} // namespace

ColoredTree parse_compact(std::string_view text, int num_colors) {
    ColoredTree t;
    t.num_colors = num_colors;
    bool have_colors = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view part = text.substr(pos, end - pos);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        if (part.starts_with("L:")) {
            t.level_seq = parse_int_list(part.substr(2), "level");
        } else if (part.starts_with("C:")) {
            t.color_seq = parse_int_list(part.substr(2), "color");
            have_colors = true;
        } else if (!part.empty()) {
            throw ValidationError("unrecognized tree section '" + std::string(part) + "', expected L:... or C:...");
        }
        pos = end + 1;
    }
    if (!have_colors) t.color_seq.assign(t.level_seq.size(), 0);
    validate(t);
    return t;
}

} // namespace nprk

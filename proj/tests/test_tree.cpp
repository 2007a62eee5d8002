#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "nprk/errors.hpp"
#include "nprk/tree.hpp"
#include "oracles.hpp"

using namespace nprk;

namespace {

BigInt factorial(int n) {
    BigInt f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

} // namespace

TEST_CASE("single node") {
    const auto t = single_node(2);
    CHECK(t.order() == 1);
    CHECK(density(t) == 1);
    CHECK(symmetry(t) == 1);
    CHECK(classify(t).kind == ConditionKind::UnderlyingRK);
    CHECK(generate_trees(2, 1) == std::vector<ColoredTree>{t});
}

TEST_CASE("order 2 trees per color") {
    const auto trees = generate_trees(2, 2);
    REQUIRE(trees.size() == 2);
    CHECK(trees[0].color_seq == std::vector<int>{0, 0});
    CHECK(trees[1].color_seq == std::vector<int>{0, 1});
    for (const auto& t : trees) CHECK(density(t) == 2);
}

TEST_CASE("generation matches brute-force increasing labelings") {
    for (auto [M, n] : std::vector<std::pair<int, int>>{{1, 6}, {1, 7}, {2, 5}, {2, 6}, {3, 4}, {3, 5}, {4, 4}}) {
        CAPTURE(M);
        CAPTURE(n);
        const auto brute = oracle::increasing_labelings(M, n);
        const auto trees = generate_trees(M, n);
        REQUIRE(trees.size() == brute.size());
        std::set<std::string> seen;
        for (const auto& t : trees) {
            const auto key = oracle::ahu(t);
            CHECK(seen.insert(key).second);
            REQUIRE(brute.count(key) == 1);
            CHECK(symmetry(t) == brute.at(key));
            CHECK(is_canonical(t));
        }
    }
}

TEST_CASE("alpha sigma gamma = n!") {
    for (int M = 1; M <= 3; ++M)
        for (int n = 1; n <= 6; ++n)
            for (const auto& t : generate_trees(M, n)) CHECK(symmetry(t) * automorphisms(t) * density(t) == factorial(n));
}

TEST_CASE("sum of alpha counts all increasing labelings") {
    for (int M = 1; M <= 4; ++M)
        for (int n = 1; n <= 6; ++n) {
            BigInt sum = 0;
            for (const auto& t : generate_trees(M, n)) sum += symmetry(t);
            BigInt expected = factorial(n - 1);
            for (int k = 1; k < n; ++k) expected *= M;
            CHECK(sum == expected);
        }
}

TEST_CASE("generated lists are strictly ascending") {
    for (int M = 1; M <= 3; ++M)
        for (int n = 1; n <= 5; ++n) {
            const auto trees = generate_trees(M, n);
            for (std::size_t k = 1; k < trees.size(); ++k) CHECK(compare_trees(trees[k - 1], trees[k]) < 0);
        }
}

TEST_CASE("streaming and materialized generation agree") {
    std::vector<ColoredTree> streamed;
    for_each_tree(2, 6, [&](const ColoredTree& t) { streamed.push_back(t); });
    CHECK(streamed == generate_trees(2, 6));
}

TEST_CASE("canonicalize is invariant on sibling permutations") {
    std::mt19937_64 rng(7);
    for (const auto& t : generate_trees(2, 6)) {
        auto parts = branches(t);
        for (int rep = 0; rep < 3; ++rep) {
            std::shuffle(parts.begin(), parts.end(), rng);
            const auto shuffled = graft(parts, 2);
            CHECK(oracle::ahu(shuffled) == oracle::ahu(t));
            CHECK(canonicalize(shuffled) == t);
        }
    }
}

TEST_CASE("density examples") {
    CHECK(density(ColoredTree{{1, 2, 2, 2}, {0, 0, 1, 0}, 2}) == 4);
    CHECK(density(ColoredTree{{1, 2, 3, 4}, {0, 1, 0, 1}, 2}) == 24);
    CHECK(density(ColoredTree{{1, 2, 3, 2}, {0, 0, 0, 1}, 2}) == 8);
}

TEST_CASE("symmetry counts repeated branches") {
    const ColoredTree bushy{{1, 2, 2, 2}, {0, 0, 0, 0}, 1};
    CHECK(symmetry(bushy) == 1);
    CHECK(automorphisms(bushy) == 6);
    const ColoredTree mixed{{1, 2, 2, 2}, {0, 1, 0, 0}, 2};
    CHECK(symmetry(canonicalize(mixed)) == 3);
    CHECK(automorphisms(mixed) == 2);
}

TEST_CASE("classification") {
    CHECK(classify(ColoredTree{{1, 2, 3}, {0, 1, 1}, 2}) == ConditionClass{ConditionKind::UnderlyingRK, 1});
    CHECK(classify(ColoredTree{{1, 2, 3}, {0, 0, 1}, 2}).kind == ConditionKind::LinearCoupling);
    CHECK(classify(ColoredTree{{1, 2, 2}, {0, 0, 1}, 2}).kind == ConditionKind::NonlinearCoupling);
    CHECK(classify(ColoredTree{{1, 2, 2}, {0, 0, 1}, 2}).tag() == "†");
    CHECK(classify(ColoredTree{{1, 2, 3}, {0, 0, 1}, 2}).tag() == "*");
    CHECK(is_color_branching(ColoredTree{{1, 2, 3, 3}, {0, 0, 0, 1}, 2}));
    CHECK_FALSE(is_color_branching(ColoredTree{{1, 2, 3, 2}, {0, 1, 0, 1}, 2}));
}

TEST_CASE("census partitions every order") {
    for (int M = 1; M <= 3; ++M)
        for (int n = 1; n <= 6; ++n) {
            const auto c = count_conditions(M, n);
            CHECK(c.total == generate_trees(M, n).size());
            CHECK(c.underlying + c.linear + c.nonlinear == c.total);
            CHECK(c.coupling == c.linear + c.nonlinear);
            if (n >= 2) CHECK(c.underlying == static_cast<std::uint64_t>(M) * count_conditions(1, n).total);
        }
    // A single color has no coupling.
    CHECK(count_conditions(1, 7).coupling == 0);
}

TEST_CASE("generating function matches enumeration") {
    for (int M = 1; M <= 5; ++M)
        for (int n = 1; n <= (M <= 2 ? 8 : 5); ++n) CHECK(count_ark_conditions(M, n) == count_conditions(M, n).total);
    // Large orders stay exact.
    CHECK(count_ark_conditions(1, 20) == BigInt(12826228));
}

TEST_CASE("published counts through order 8") {
    // Coupling conditions are the total minus M copies of the single-color count.
    const std::vector<std::vector<std::uint64_t>> total{{1, 1, 2, 4, 9, 20, 48, 115},
                                                        {1, 2, 7, 26, 107, 458, 2058, 9498},
                                                        {1, 3, 15, 82, 495, 3144, 20875, 142773},
                                                        {1, 4, 26, 188, 1499, 12628, 111064, 1006840},
                                                        {1, 5, 40, 360, 3570, 37476, 410490, 4635330}};
    const std::vector<std::vector<std::uint64_t>> coupling{{0, 0, 0, 0, 0, 0, 0, 0},
                                                           {0, 0, 3, 18, 89, 418, 1962, 9268},
                                                           {0, 0, 9, 70, 468, 3084, 20731, 142428},
                                                           {0, 0, 18, 172, 1463, 12548, 110872, 1006380},
                                                           {0, 0, 30, 340, 3525, 37376, 410250, 4634755}};
    for (int M = 1; M <= 5; ++M)
        for (int n = 1; n <= 8; ++n) {
            const auto all = count_ark_conditions(M, n);
            CHECK(all == BigInt(total[M - 1][n - 1]));
            const BigInt coupled = n == 1 ? BigInt(0) : all - M * count_ark_conditions(1, n);
            CHECK(coupled == BigInt(coupling[M - 1][n - 1]));
        }
}

TEST_CASE("budget cap") {
    CHECK_THROWS_AS(generate_trees(3, 7, 100), BudgetExceeded);
    CHECK_THROWS_AS(count_conditions(5, 8, 1000), BudgetExceeded);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(generate_trees(0, 3), DomainError);
    CHECK_THROWS_AS(generate_trees(2, 0), DomainError);
}

TEST_CASE("validation names the offending index") {
    try {
        validate(ColoredTree{{1, 3}, {0, 0}, 1});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("index 1") != std::string::npos);
    }
    CHECK_THROWS_AS(validate(ColoredTree{{1, 2}, {0, 2}, 2}), ValidationError);
    CHECK_THROWS_AS(validate(ColoredTree{{2}, {0}, 1}), ValidationError);
    CHECK_THROWS_AS(validate(ColoredTree{{1, 2}, {0}, 1}), ValidationError);
}

TEST_CASE("compact form round trip") {
    for (const auto& t : generate_trees(3, 4)) CHECK(parse_compact(to_compact(t), 3) == t);
    CHECK(to_compact(ColoredTree{{1, 2, 2}, {0, 1, 0}, 2}) == "L:1,2,2;C:0,1,0");
    CHECK(parse_compact("L:1,2,3", 1) == ColoredTree{{1, 2, 3}, {0, 0, 0}, 1});
    CHECK_THROWS_AS(parse_compact("L:1,x", 1), ValidationError);
}

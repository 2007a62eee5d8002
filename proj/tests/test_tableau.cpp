#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nprk/errors.hpp"
#include "nprk/json_io.hpp"
#include "nprk/tableau.hpp"
#include "oracles.hpp"

using namespace nprk;

namespace {

double max_diff(const std::vector<double>& x, const std::vector<double>& y) {
    REQUIRE(x.size() == y.size());
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) d = std::max(d, std::abs(x[k] - y[k]));
    return d;
}

ArkPair lobatto() { return std::get<ArkPair>(builtin("lobatto3A3B")); }

// Random pair sharing c, with unit weight sums.
ArkPair random_pair(std::mt19937_64& rng, int s) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    auto make = [&](const std::vector<double>& c) {
        std::vector<double> a(static_cast<std::size_t>(s * s)), b(static_cast<std::size_t>(s));
        for (auto& v : a) v = dist(rng);
        // Fix the last column so rows sum to c.
        for (int i = 0; i < s; ++i) {
            double row = 0.0;
            for (int j = 0; j + 1 < s; ++j) row += a[static_cast<std::size_t>(i * s + j)];
            a[static_cast<std::size_t>(i * s + s - 1)] = c[static_cast<std::size_t>(i)] - row;
        }
        double sum = 0.0;
        for (int j = 0; j + 1 < s; ++j) sum += (b[static_cast<std::size_t>(j)] = dist(rng));
        b[static_cast<std::size_t>(s - 1)] = 1.0 - sum;
        return RkTableau{s, a, b, c};
    };
    std::vector<double> c(static_cast<std::size_t>(s));
    for (auto& v : c) v = dist(rng);
    return make_ark_pair(make(c), make(c));
}

} // namespace

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(NprkTableau(2, 3, std::vector<double>(26), std::vector<double>(9)), ValidationError);
    CHECK_THROWS_AS(NprkTableau(2, 3, std::vector<double>(27), std::vector<double>(8)), ValidationError);
    CHECK_THROWS_AS(NprkTableau(0, 3, {}, {}), ValidationError);
    CHECK_NOTHROW(NprkTableau(3, 2, std::vector<double>(16), std::vector<double>(8)));
}

TEST_CASE("multi-index layout") {
    const NprkTableau t(3, 2, std::vector<double>(16), std::vector<double>(8));
    const std::vector<int> idx{1, 0, 1};
    const auto flat = t.flat(idx);
    CHECK(flat == 5);
    for (int r = 0; r < 3; ++r) CHECK(t.component(flat, r) == idx[static_cast<std::size_t>(r)]);
}

TEST_CASE("method 1 reduces to Lobatto IIIA and IIIB") {
    const auto pair = lobatto();
    for (const auto* name : {"method1", "method2"}) {
        const auto t = builtin_tableau(name);
        const auto r1 = underlying_rk(t, 1);
        const auto r2 = underlying_rk(t, 2);
        CHECK(max_diff(r1.a, pair.first.a) <= 1e-15);
        CHECK(max_diff(r2.a, pair.second.a) <= 1e-15);
        CHECK(max_diff(r1.b, pair.first.b) <= 1e-15);
        CHECK(max_diff(r2.b, pair.second.b) <= 1e-15);
        CHECK(max_diff(r1.c, std::vector<double>{0.0, 0.5, 1.0}) <= 1e-15);
    }
}

TEST_CASE("lift formulas") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int s = 2 + trial % 3;
        const auto pair = random_pair(rng, s);
        const auto dense = ark_to_nprk(pair, BMode::Dense);
        const double inv = 1.0 / s;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                const std::vector<int> jk{j, 0};
                for (int k = 0; k < s; ++k) {
                    const std::vector<int> idx{j, k};
                    const double expected = pair.first.A(i, j) * inv + pair.second.A(i, k) * inv -
                                            pair.c()[static_cast<std::size_t>(i)] * inv * inv;
                    CHECK(dense.a_at(i, dense.flat(idx)) == doctest::Approx(expected).epsilon(1e-14));
                }
                const std::vector<int> ij{i, j};
                CHECK(dense.b_at(dense.flat(ij)) ==
                      doctest::Approx(pair.first.b[static_cast<std::size_t>(i)] * inv +
                                      pair.second.b[static_cast<std::size_t>(j)] * inv - inv * inv)
                          .epsilon(1e-14));
            }
        // Any lift reduces back to the pair.
        const auto back = underlying_ark(dense);
        CHECK(max_diff(back.first.a, pair.first.a) <= 1e-13);
        CHECK(max_diff(back.second.a, pair.second.a) <= 1e-13);
        CHECK(max_diff(back.first.b, pair.first.b) <= 1e-13);
        CHECK(max_diff(back.second.b, pair.second.b) <= 1e-13);
    }
}

TEST_CASE("diagonal lift needs equal weights") {
    std::mt19937_64 rng(3);
    const auto pair = random_pair(rng, 3);
    CHECK_THROWS_AS(ark_to_nprk(pair, BMode::Diagonal), ValidationError);
    const auto t = ark_to_nprk(lobatto(), BMode::Diagonal);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const std::vector<int> ij{i, j};
            CHECK(t.b_at(t.flat(ij)) == (i == j ? lobatto().first.b[static_cast<std::size_t>(i)] : 0.0));
        }
}

TEST_CASE("mismatched abscissae are rejected") {
    auto pair = lobatto();
    RkTableau shifted = pair.second;
    shifted.a[3] += 0.1;
    shifted.c[1] += 0.1;
    CHECK_THROWS_AS(make_ark_pair(pair.first, shifted), ValidationError);
}

TEST_CASE("validate") {
    const auto m1 = builtin_tableau("method1");
    const auto rep = validate(m1);
    CHECK(rep.ok());
    CHECK(rep.b_sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(max_diff(rep.c, {0.0, 0.5, 1.0}) <= 1e-15);

    auto a = m1.a();
    a[9 + 4] += 1e-3;
    const NprkTableau perturbed(2, 3, a, m1.b(), m1.declared_c());
    const auto bad = validate(perturbed);
    CHECK_FALSE(bad.abscissae_consistent);
    CHECK(bad.max_abscissa_deviation == doctest::Approx(1e-3).epsilon(1e-6));

    a[0] = std::numeric_limits<double>::quiet_NaN();
    const auto nan = validate(NprkTableau(2, 3, a, m1.b()));
    CHECK_FALSE(nan.finite);
    CHECK(nan.nonfinite_index == 0);
    CHECK(nan.nonfinite_location == "a[0,0,0]");
}

TEST_CASE("implicit-explicit Euler reduces to implicit and explicit Euler") {
    const auto t = builtin_tableau("nprk_euler_implicit_explicit");
    const auto imp = underlying_rk(t, 1);
    const auto exp = underlying_rk(t, 2);
    CHECK(imp.a == std::vector<double>{0, 0, 0, 1});
    CHECK(imp.b == std::vector<double>{0, 1});
    CHECK(exp.a == std::vector<double>{0, 0, 1, 0});
    CHECK(exp.b == std::vector<double>{1, 0});
    CHECK(validate(t).ok());
}

TEST_CASE("builtin names") {
    for (const auto& name : builtin_names()) CHECK_NOTHROW(builtin(name));
    CHECK_THROWS_AS(builtin("nope"), ValidationError);
    CHECK_THROWS_AS(builtin_tableau("lobatto3A3B"), ValidationError);
}

TEST_CASE("tableau JSON is bit exact") {
    std::mt19937_64 rng(5);
    for (int M = 1; M <= 3; ++M) {
        const auto t = oracle::random_tableau(rng, M, 3);
        const auto text = to_json(t).dump();
        const auto back = tableau_from_json(Json::parse(text));
        CHECK(back.a() == t.a());
        CHECK(back.b() == t.b());
        CHECK(to_json(back).dump() == text);
    }
    const auto j = to_json(builtin_tableau("method1"));
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"M", "s", "a", "b"});
}

TEST_CASE("ARK pair JSON") {
    const auto pair = lobatto();
    const auto j = to_json(pair);
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"s", "a1", "b1", "a2", "b2", "c"});
    const auto back = ark_pair_from_json(j);
    CHECK(back.first.a == pair.first.a);
    CHECK(back.second.b == pair.second.b);
    CHECK(std::holds_alternative<ArkPair>(method_from_json(j)));
    CHECK_THROWS_AS(tableau_from_json(Json{{"M", 2}, {"s", 3}}), ValidationError);
}

#pragma once

// Reference implementations that share no code paths with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nprk/tableau.hpp"
#include "nprk/tree.hpp"

namespace oracle {

// Unordered canonical string of a rooted tree given by parent links and edge colors.
inline std::string ahu(const std::vector<int>& parent, const std::vector<int>& color, int node = 0) {
    std::vector<std::string> parts;
    for (std::size_t k = 1; k < parent.size(); ++k)
        if (parent[k] == node) parts.push_back(std::to_string(color[k]) + ahu(parent, color, static_cast<int>(k)));
    std::sort(parts.begin(), parts.end());
    std::string out = "(";
    for (const auto& p : parts) out += p;
    return out + ")";
}

inline std::string ahu(const nprk::ColoredTree& t) {
    std::vector<int> parent(t.order(), -1);
    std::vector<int> stack;
    for (std::size_t k = 0; k < t.order(); ++k) {
        stack.resize(static_cast<std::size_t>(t.level_seq[k] - 1));
        parent[k] = stack.empty() ? -1 : stack.back();
        stack.push_back(static_cast<int>(k));
    }
    return ahu(parent, t.color_seq);
}

// Every heap-ordered (increasing) labeled M-colored tree on n nodes, grouped by shape.
// The multiplicity of a shape is its number of increasing labelings.
inline std::map<std::string, long long> increasing_labelings(int M, int n) {
    std::map<std::string, long long> classes;
    std::vector<int> parent(static_cast<std::size_t>(n), -1), color(static_cast<std::size_t>(n), 0);
    std::function<void(int)> rec = [&](int k) {
        if (k == n) {
            ++classes[ahu(parent, color)];
            return;
        }
        for (int p = 0; p < k; ++p)
            for (int c = 0; c < M; ++c) {
                parent[static_cast<std::size_t>(k)] = p;
                color[static_cast<std::size_t>(k)] = c;
                rec(k + 1);
            }
    };
    rec(1);
    return classes;
}

struct Factor {
    char name; // 'a' or 'b'
    std::string letters;
};

// "b_{ij} a_{ikl} a_{kuv}" -> factors. Tags, Σ and the right-hand side are ignored.
inline std::vector<Factor> parse_sum(const std::string& text) {
    std::vector<Factor> out;
    for (std::size_t p = 0; (p = text.find("_{", p)) != std::string::npos; p += 2) {
        const auto close = text.find('}', p);
        std::string letters;
        for (char ch : text.substr(p + 2, close - p - 2))
            if (ch != ' ') letters.push_back(ch);
        out.push_back({text[p - 1], letters});
    }
    return out;
}

// Literal summation of a transcribed condition over all its index letters.
inline double eval_sum(const nprk::NprkTableau& t, const std::string& text) {
    const auto factors = parse_sum(text);
    std::string letters;
    for (const auto& f : factors)
        for (char ch : f.letters)
            if (letters.find(ch) == std::string::npos) letters.push_back(ch);
    const int s = t.s();
    std::vector<int> value(256, 0);
    std::vector<int> idx(letters.size(), 0);
    const auto tensor = [&](const Factor& f) {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < f.letters.size(); ++k) flat = flat * static_cast<std::size_t>(s) + static_cast<std::size_t>(value[static_cast<unsigned char>(f.letters[k])]);
        return f.name == 'b' ? t.b()[flat] : t.a()[flat];
    };
    double sum = 0.0;
    while (true) {
        for (std::size_t k = 0; k < letters.size(); ++k) value[static_cast<unsigned char>(letters[k])] = idx[k];
        double prod = 1.0;
        for (const auto& f : factors) prod *= tensor(f);
        sum += prod;
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == s) idx[d++] = 0;
        if (d == idx.size()) break;
    }
    return sum;
}

inline nprk::NprkTableau random_tableau(std::mt19937_64& rng, int M, int s, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::size_t nb = 1;
    for (int k = 0; k < M; ++k) nb *= static_cast<std::size_t>(s);
    std::vector<double> a(nb * static_cast<std::size_t>(s)), b(nb);
    for (auto& v : a) v = dist(rng);
    for (auto& v : b) v = dist(rng);
    return nprk::NprkTableau(M, s, std::move(a), std::move(b));
}

using Vec = std::vector<double>;
using Rhs = std::function<Vec(const Vec&)>;

// Additive RK step y + h sum_j b1_j f1(Y_j) + b2_j f2(Y_j) with stages by plain fixed-point iteration.
inline Vec ark_step(const nprk::RkTableau& m1, const nprk::RkTableau& m2, const Rhs& f1, const Rhs& f2, const Vec& y,
                    double h) {
    const int s = m1.s;
    std::vector<Vec> Y(static_cast<std::size_t>(s), y);
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<Vec> F1, F2;
        for (const auto& st : Y) {
            F1.push_back(f1(st));
            F2.push_back(f2(st));
        }
        double change = 0.0;
        for (int i = 0; i < s; ++i) {
            Vec next = y;
            for (int j = 0; j < s; ++j)
                for (std::size_t d = 0; d < y.size(); ++d)
                    next[d] += h * (m1.A(i, j) * F1[static_cast<std::size_t>(j)][d] + m2.A(i, j) * F2[static_cast<std::size_t>(j)][d]);
            for (std::size_t d = 0; d < y.size(); ++d) change = std::max(change, std::abs(next[d] - Y[static_cast<std::size_t>(i)][d]));
            Y[static_cast<std::size_t>(i)] = next;
        }
        if (change < 1e-16) break;
    }
    Vec out = y;
    for (int j = 0; j < s; ++j) {
        const auto g1 = f1(Y[static_cast<std::size_t>(j)]);
        const auto g2 = f2(Y[static_cast<std::size_t>(j)]);
        for (std::size_t d = 0; d < y.size(); ++d)
            out[d] += h * (m1.b[static_cast<std::size_t>(j)] * g1[d] + m2.b[static_cast<std::size_t>(j)] * g2[d]);
    }
    return out;
}

inline Vec rk_step(const nprk::RkTableau& m, const Rhs& f, const Vec& y, double h) {
    const Rhs zero = [](const Vec& v) { return Vec(v.size(), 0.0); };
    return ark_step(m, m, f, zero, y, h);
}

} // namespace oracle

#include "nprk/tableau.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nprk/errors.hpp"

namespace nprk {

namespace {

std::size_t ipow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int k = 0; k < exp; ++k) r *= base;
    return r;
}

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
    return m;
}

std::vector<double> row_sums(int s, const std::vector<double>& a) {
    std::vector<double> c(static_cast<std::size_t>(s), 0.0);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) c[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i * s + j)];
    return c;
}

double sum(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc;
}

std::string multi_index_text(const NprkTableau& t, std::size_t multi) {
    std::string out;
    for (int r = 0; r < t.M(); ++r) out += (r ? "," : "") + std::to_string(t.component(multi, r));
    return out;
}

} // namespace

RkTableau RkTableau::from_rows(int s, std::vector<double> a, std::vector<double> b) {
    RkTableau rk{s, std::move(a), std::move(b), {}};
    if (rk.a.size() != static_cast<std::size_t>(s * s)) throw ValidationError("RK matrix must have s*s entries");
    rk.c = row_sums(s, rk.a);
    return rk;
}

void validate(const RkTableau& rk, double tol) {
    if (rk.s < 1) throw ValidationError("RK tableau needs at least one stage");
    const auto s = static_cast<std::size_t>(rk.s);
    if (rk.a.size() != s * s || rk.b.size() != s || rk.c.size() != s)
        throw ValidationError("RK tableau shapes do not match s = " + std::to_string(rk.s));
    const auto rs = row_sums(rk.s, rk.a);
    for (std::size_t i = 0; i < s; ++i)
        if (std::abs(rs[i] - rk.c[i]) > tol)
            throw ValidationError("RK tableau violates c_i = sum_j a_ij at row " + std::to_string(i));
}

ArkPair make_ark_pair(RkTableau first, RkTableau second) {
    validate(first);
    validate(second);
    if (first.s != second.s)
        throw ValidationError("ARK pair needs equal stage counts, got " + std::to_string(first.s) + " and " +
                              std::to_string(second.s));
    if (const double d = max_abs_diff(first.c, second.c); d > kTableauTol) {
        std::ostringstream msg;
        msg << "ARK pair abscissae differ (max deviation " << d << ")";
        throw ValidationError(msg.str());
    }
    return ArkPair{std::move(first), std::move(second)};
}

NprkTableau::NprkTableau(int partitions, int stages, std::vector<double> a, std::vector<double> b,
                         std::optional<std::vector<double>> declared_c)
    : partitions_(partitions), stages_(stages), a_(std::move(a)), b_(std::move(b)), declared_c_(std::move(declared_c)) {
    if (partitions_ < 1) throw ValidationError("NPRK tableau needs M >= 1");
    if (stages_ < 1) throw ValidationError("NPRK tableau needs s >= 1");
    const std::size_t nb = ipow(static_cast<std::size_t>(stages_), partitions_);
    if (b_.size() != nb)
        throw ValidationError("b must have s^M = " + std::to_string(nb) + " entries, got " + std::to_string(b_.size()));
    if (a_.size() != nb * static_cast<std::size_t>(stages_))
        throw ValidationError("a must have s^(M+1) = " + std::to_string(nb * static_cast<std::size_t>(stages_)) +
                              " entries, got " + std::to_string(a_.size()));
    if (declared_c_ && declared_c_->size() != static_cast<std::size_t>(stages_))
        throw ValidationError("declared abscissae must have s entries");
    stride_.resize(static_cast<std::size_t>(partitions_));
    for (int r = 0; r < partitions_; ++r) stride_[static_cast<std::size_t>(r)] = ipow(static_cast<std::size_t>(stages_), partitions_ - 1 - r);
}

std::size_t NprkTableau::flat(std::span<const int> multi) const {
    if (multi.size() != static_cast<std::size_t>(partitions_)) throw DomainError("multi-index has wrong rank");
    std::size_t f = 0;
    for (int r = 0; r < partitions_; ++r) f += static_cast<std::size_t>(multi[static_cast<std::size_t>(r)]) * stride_[static_cast<std::size_t>(r)];
    return f;
}

std::vector<double> NprkTableau::abscissae() const {
    std::vector<double> c(static_cast<std::size_t>(stages_), 0.0);
    for (int i = 0; i < stages_; ++i)
        for (std::size_t K = 0; K < b_.size(); ++K) c[static_cast<std::size_t>(i)] += a_at(i, K);
    return c;
}

bool NprkTableau::same_a(const NprkTableau& other, double tol) const {
    if (partitions_ != other.partitions_ || stages_ != other.stages_) return false;
    return max_abs_diff(a_, other.a_) <= tol;
}

RkTableau underlying_rk(const NprkTableau& t, int r) {
    if (r < 1 || r > t.M())
        throw DomainError("argument index r must be in [1, " + std::to_string(t.M()) + "], got " + std::to_string(r));
    const int s = t.s();
    RkTableau rk;
    rk.s = s;
    rk.a.assign(static_cast<std::size_t>(s * s), 0.0);
    rk.b.assign(static_cast<std::size_t>(s), 0.0);
    for (std::size_t K = 0; K < t.multi_count(); ++K) {
        const int j = t.component(K, r - 1);
        for (int i = 0; i < s; ++i) rk.a[static_cast<std::size_t>(i * s + j)] += t.a_at(i, K);
        rk.b[static_cast<std::size_t>(j)] += t.b_at(K);
    }
    rk.c = row_sums(s, rk.a);
    return rk;
}

ArkPair underlying_ark(const NprkTableau& t) {
    if (t.M() != 2) throw DomainError("underlying ARK pair requires M = 2, got M = " + std::to_string(t.M()));
    return ArkPair{underlying_rk(t, 1), underlying_rk(t, 2)};
}

NprkTableau ark_to_nprk(const ArkPair& pair, BMode mode) {
    const auto& p1 = pair.first;
    const auto& p2 = pair.second;
    if (p1.s != p2.s) throw ValidationError("ARK pair stage counts differ");
    if (const double d = max_abs_diff(p1.c, p2.c); d > kTableauTol) {
        std::ostringstream msg;
        msg << "ARK pair abscissae differ (max deviation " << d << ")";
        throw ValidationError(msg.str());
    }
    const double sum1 = sum(p1.b), sum2 = sum(p2.b);
    if (std::abs(sum1 - 1.0) > 1e-12 || std::abs(sum2 - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "conversion requires first-order tableaux: sum b1 = " << sum1 << ", sum b2 = " << sum2;
        throw ValidationError(msg.str());
    }
    if (mode == BMode::Diagonal && max_abs_diff(p1.b, p2.b) > kTableauTol)
        throw ValidationError("diagonal b requires b1 == b2");

    const int s = p1.s;
    const double sd = s;
    const auto& c = p1.c;
    std::vector<double> a(static_cast<std::size_t>(s * s * s));
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
            for (int k = 0; k < s; ++k)
                a[static_cast<std::size_t>((i * s + j) * s + k)] =
                    p1.A(i, j) / sd + p2.A(i, k) / sd - c[static_cast<std::size_t>(i)] / (sd * sd);

    std::vector<double> b(static_cast<std::size_t>(s * s), 0.0);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            double& bij = b[static_cast<std::size_t>(i * s + j)];
            if (mode == BMode::Dense)
                bij = p1.b[static_cast<std::size_t>(i)] / sd + p2.b[static_cast<std::size_t>(j)] / sd - 1.0 / (sd * sd);
            else
                bij = (i == j) ? p1.b[static_cast<std::size_t>(i)] : 0.0;
        }
    return NprkTableau(2, s, std::move(a), std::move(b), c);
}

namespace {

ArkPair lobatto_3a3b() {
    // Lobatto IIIA (first) and IIIB (second), three stages.
    RkTableau iiia{3,
                   {0.0, 0.0, 0.0, 5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                   {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                   {0.0, 0.5, 1.0}};
    RkTableau iiib{3,
                   {1.0 / 6.0, -1.0 / 6.0, 0.0, 1.0 / 6.0, 1.0 / 3.0, 0.0, 1.0 / 6.0, 5.0 / 6.0, 0.0},
                   {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
                   {0.0, 0.5, 1.0}};
    return make_ark_pair(std::move(iiia), std::move(iiib));
}

NprkTableau euler_implicit_explicit() {
    // Y1 = y_n;  Y2 = y_n + h F(Y2, Y1);  y_{n+1} = Y2.
    std::vector<double> a(8, 0.0);
    a[(1 * 2 + 1) * 2 + 0] = 1.0;
    std::vector<double> b(4, 0.0);
    b[1 * 2 + 0] = 1.0;
    return NprkTableau(2, 2, std::move(a), std::move(b), std::vector<double>{0.0, 1.0});
}

} // namespace

std::vector<std::string> builtin_names() {
    return {"lobatto3A3B", "method1", "method2", "nprk_euler_implicit_explicit"};
}

BuiltinMethod builtin(std::string_view name) {
    if (name == "lobatto3A3B") return lobatto_3a3b();
    if (name == "method1") return ark_to_nprk(lobatto_3a3b(), BMode::Diagonal);
    if (name == "method2") return ark_to_nprk(lobatto_3a3b(), BMode::Dense);
    if (name == "nprk_euler_implicit_explicit") return euler_implicit_explicit();
    std::string msg = "unknown built-in method '" + std::string(name) + "'; available:";
    for (const auto& n : builtin_names()) msg += " " + n;
    throw ValidationError(msg);
}

NprkTableau builtin_tableau(std::string_view name) {
    auto m = builtin(name);
    if (auto* t = std::get_if<NprkTableau>(&m)) return std::move(*t);
    throw ValidationError("built-in '" + std::string(name) + "' is an ARK pair, not an NPRK tableau");
}

TableauReport validate(const NprkTableau& t, double tol) {
    TableauReport rep;
    for (std::size_t k = 0; k < t.a().size() && rep.finite; ++k)
        if (!std::isfinite(t.a()[k])) {
            rep.finite = false;
            rep.nonfinite_index = k;
            const std::size_t nb = t.multi_count();
            rep.nonfinite_location = "a[" + std::to_string(k / nb) + "," + multi_index_text(t, k % nb) + "]";
        }
    for (std::size_t k = 0; k < t.b().size() && rep.finite; ++k)
        if (!std::isfinite(t.b()[k])) {
            rep.finite = false;
            rep.nonfinite_index = t.a().size() + k;
            rep.nonfinite_location = "b[" + multi_index_text(t, k) + "]";
        }
    if (!rep.finite) rep.findings.push_back("non-finite entry at " + rep.nonfinite_location);

    rep.b_sum = sum(t.b());
    if (!rep.finite) return rep;

    // Every underlying method must see the same abscissae, and those must match any declared c.
    rep.c = underlying_rk(t, 1).c;
    for (int r = 2; r <= t.M(); ++r)
        rep.max_abscissa_deviation = std::max(rep.max_abscissa_deviation, max_abs_diff(rep.c, underlying_rk(t, r).c));
    if (t.declared_c())
        rep.max_abscissa_deviation = std::max(rep.max_abscissa_deviation, max_abs_diff(rep.c, *t.declared_c()));
    if (rep.max_abscissa_deviation > tol) {
        rep.abscissae_consistent = false;
        std::ostringstream msg;
        msg << "shared abscissae violated: max deviation " << rep.max_abscissa_deviation;
        rep.findings.push_back(msg.str());
    }
    return rep;
}

} // namespace nprk

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nprk {

/// Tolerance defining tableau-level equality.
inline constexpr double kTableauTol = 1e-14;

/// Classical Butcher tableau; `a` is s*s row-major.
struct RkTableau {
    int s = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;

    double A(int i, int j) const { return a[static_cast<std::size_t>(i * s + j)]; }

    /// Builds a tableau with c taken as the row sums of a.
    static RkTableau from_rows(int s, std::vector<double> a, std::vector<double> b);
};

/// Throws ValidationError if shapes are wrong or c is not the row sum of a (within tol).
void validate(const RkTableau& rk, double tol = 1e-12);

/// Two tableaux with equal stage count and shared abscissae.
struct ArkPair {
    RkTableau first;
    RkTableau second;

    int s() const { return first.s; }
    const std::vector<double>& c() const { return first.c; }
};

/// Checks the pairing invariants (equal s, c1 == c2 within kTableauTol) and returns the pair.
ArkPair make_ark_pair(RkTableau first, RkTableau second);

/**
 * Coefficients of an s-stage method for y' = F(y,...,y) with M arguments.
 *
 * `a` has shape s^(M+1), row-major with the stage index i0 slowest;
 * `b` has shape s^M. A tableau may carry declared abscissae (e.g. those of the
 * ARK pair it was lifted from); validate() checks them against the tensor.
 */
class NprkTableau {
public:
    NprkTableau(int partitions, int stages, std::vector<double> a, std::vector<double> b,
                std::optional<std::vector<double>> declared_c = std::nullopt);

    int M() const noexcept { return partitions_; }
    int s() const noexcept { return stages_; }
    const std::vector<double>& a() const noexcept { return a_; }
    const std::vector<double>& b() const noexcept { return b_; }
    const std::optional<std::vector<double>>& declared_c() const noexcept { return declared_c_; }

    /// Number of M-multi-indices, s^M.
    std::size_t multi_count() const noexcept { return b_.size(); }

    /// a[i0, K] where K is the flat index of an M-multi-index.
    double a_at(int i0, std::size_t multi) const { return a_[static_cast<std::size_t>(i0) * b_.size() + multi]; }
    double b_at(std::size_t multi) const { return b_[multi]; }

    /// Component r (0-based) of the multi-index with flat index `multi`.
    int component(std::size_t multi, int r) const noexcept { return static_cast<int>(multi / stride_[static_cast<std::size_t>(r)]) % stages_; }

    std::size_t flat(std::span<const int> multi) const;

    /// Row sums of the full tensor: c_i = sum over all child indices of a[i, ...].
    std::vector<double> abscissae() const;

    /// Element-wise equality of the a tensors within tol.
    bool same_a(const NprkTableau& other, double tol = kTableauTol) const;

private:
    int partitions_;
    int stages_;
    std::vector<double> a_;
    std::vector<double> b_;
    std::optional<std::vector<double>> declared_c_;
    std::vector<std::size_t> stride_;
};

/// Underlying RK method seen by argument r (1-based): sum out all child indices except the r-th.
RkTableau underlying_rk(const NprkTableau& t, int r);

/// The pair (underlying_rk(t,1), underlying_rk(t,2)) of a two-partition tableau.
ArkPair underlying_ark(const NprkTableau& t);

enum class BMode { Dense, Diagonal };

/**
 * Lifts an ARK pair to a two-partition tableau:
 *   a_ijk = a1_ij/s + a2_ik/s - c_i/s^2,
 *   b_ij  = b1_i/s + b2_j/s - 1/s^2     (Dense)
 *   b_ij  = b1_i delta_ij               (Diagonal, requires b1 == b2)
 */
NprkTableau ark_to_nprk(const ArkPair& pair, BMode mode);

using BuiltinMethod = std::variant<NprkTableau, ArkPair>;

/// lobatto3A3B, method1, method2, nprk_euler_implicit_explicit
BuiltinMethod builtin(std::string_view name);
std::vector<std::string> builtin_names();

/// builtin() restricted to tableaux; throws ValidationError for pairs.
NprkTableau builtin_tableau(std::string_view name);

struct TableauReport {
    bool finite = true;
    std::optional<std::size_t> nonfinite_index; ///< flat index into a (or s^(M+1) + index into b)
    std::string nonfinite_location;
    bool abscissae_consistent = true;
    double max_abscissa_deviation = 0.0;
    std::vector<double> c;
    double b_sum = 0.0;
    std::vector<std::string> findings;

    bool ok() const noexcept { return finite && abscissae_consistent; }
};

TableauReport validate(const NprkTableau& t, double tol = kTableauTol);

} // namespace nprk

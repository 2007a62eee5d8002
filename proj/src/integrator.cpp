#include "nprk/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "nprk/errors.hpp"

namespace nprk {

State PartitionedOde::operator()(std::span<const State> args) const {
    std::vector<std::span<const double>> views(args.begin(), args.end());
    State out(static_cast<std::size_t>(dim), 0.0);
    eval(views, out);
    return out;
}

State PartitionedOde::diagonal(std::span<const double> y) const {
    std::vector<std::span<const double>> views(static_cast<std::size_t>(partitions), y);
    State out(static_cast<std::size_t>(dim), 0.0);
    eval(views, out);
    return out;
}

StageStructure analyze_stages(const NprkTableau& t) {
    StageStructure st;
    st.explicit_stage.assign(static_cast<std::size_t>(t.s()), true);
    for (int i = 0; i < t.s(); ++i)
        for (std::size_t K = 0; K < t.multi_count(); ++K) {
            if (t.a_at(i, K) == 0.0) continue;
            for (int r = 0; r < t.M(); ++r) {
                const int j = t.component(K, r);
                if (j >= i) st.explicit_stage[static_cast<std::size_t>(i)] = false;
                if (j > i) st.sequential = false;
            }
        }
    return st;
}

namespace {

constexpr double kRoundoffFactor = 64.0 * std::numeric_limits<double>::epsilon();

double max_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Stage equations Y_i = y + h sum_K a[i,K] F(Y_K1, ..., Y_KM) for a subset of stages.
class StageSystem {
public:
    StageSystem(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h)
        : t_(t), ode_(ode), h_(h), dim_(ode.dim), y_(Eigen::Map<const Eigen::VectorXd>(y.data(), ode.dim)),
          stages_(ode.dim, t.s()), views_(static_cast<std::size_t>(t.M())), f_(ode.dim) {
        for (int i = 0; i < t.s(); ++i) stages_.col(i) = y_;
    }

    Eigen::MatrixXd& stages() { return stages_; }

    // F at multi-index K using the current stages.
    const Eigen::VectorXd& eval(std::size_t K) {
        for (int r = 0; r < t_.M(); ++r)
            views_[static_cast<std::size_t>(r)] = std::span<const double>(stages_.col(t_.component(K, r)).data(), static_cast<std::size_t>(dim_));
        ode_.eval(views_, std::span<double>(f_.data(), static_cast<std::size_t>(dim_)));
        return f_;
    }

    // Right-hand side y + h sum_K a[i,K] F(Y_K) for each stage in `rows`, stacked; `mag`
    // receives a componentwise magnitude scale for roundoff-level convergence tests.
    Eigen::VectorXd update(const std::vector<int>& rows, Eigen::VectorXd* mag = nullptr) {
        const auto nrows = static_cast<Eigen::Index>(rows.size());
        Eigen::VectorXd out(nrows * dim_);
        if (mag) mag->resize(nrows * dim_);
        for (Eigen::Index q = 0; q < nrows; ++q) {
            out.segment(q * dim_, dim_) = y_;
            if (mag) mag->segment(q * dim_, dim_) = y_.cwiseAbs();
        }
        for (std::size_t K = 0; K < t_.multi_count(); ++K) {
            bool needed = false;
            for (int i : rows) needed = needed || t_.a_at(i, K) != 0.0;
            if (!needed) continue;
            const auto& f = eval(K);
            for (Eigen::Index q = 0; q < nrows; ++q) {
                const double coeff = t_.a_at(rows[static_cast<std::size_t>(q)], K);
                if (coeff == 0.0) continue;
                out.segment(q * dim_, dim_) += (h_ * coeff) * f;
                if (mag) mag->segment(q * dim_, dim_) += std::abs(h_ * coeff) * f.cwiseAbs();
            }
        }
        return out;
    }

    Eigen::VectorXd gather(const std::vector<int>& rows) const {
        Eigen::VectorXd z(static_cast<Eigen::Index>(rows.size()) * dim_);
        for (std::size_t q = 0; q < rows.size(); ++q) z.segment(static_cast<Eigen::Index>(q) * dim_, dim_) = stages_.col(rows[q]);
        return z;
    }

    void scatter(const std::vector<int>& rows, const Eigen::VectorXd& z) {
        for (std::size_t q = 0; q < rows.size(); ++q) stages_.col(rows[q]) = z.segment(static_cast<Eigen::Index>(q) * dim_, dim_);
    }

    // Residual Z - update(Z) for the unknown stages in `rows`.
    Eigen::VectorXd residual(const std::vector<int>& rows, const Eigen::VectorXd& z, Eigen::VectorXd* mag = nullptr) {
        scatter(rows, z);
        Eigen::VectorXd r = z - update(rows, mag);
        if (mag) *mag += z.cwiseAbs();
        return r;
    }

    int dim() const { return dim_; }
    double h() const { return h_; }
    const Eigen::VectorXd& y() const { return y_; }

private:
    const NprkTableau& t_;
    const PartitionedOde& ode_;
    double h_;
    int dim_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd stages_;
    std::vector<std::span<const double>> views_;
    Eigen::VectorXd f_;
};

bool converged(const Eigen::VectorXd& r, const Eigen::VectorXd& mag, double tol) {
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        const double rk = std::abs(r[k]);
        if (!(rk <= tol || rk <= kRoundoffFactor * mag[k])) return false;
    }
    return true;
}

std::string stage_list(const std::vector<int>& rows) {
    std::string out;
    for (std::size_t k = 0; k < rows.size(); ++k) out += (k ? "," : "") + std::to_string(rows[k] + 1);
    return out;
}

State to_state(const Eigen::VectorXd& v) { return State(v.data(), v.data() + v.size()); }

// Solves the stage equations of `rows` in place, Newton first, then fixed point.
void solve_stages(StageSystem& sys, const std::vector<int>& rows, const StageSolverConfig& cfg, StepStats& stats) {
    Eigen::VectorXd z = sys.gather(rows);
    Eigen::VectorXd mag;
    Eigen::VectorXd r = sys.residual(rows, z, &mag);
    if (!r.allFinite())
        throw SolverError("non-finite right-hand side at the initial guess of stage(s) " + stage_list(rows), max_norm(r),
                          to_state(z));
    double rnorm = max_norm(r);
    const auto n = z.size();

    bool done = converged(r, mag, cfg.newton_tol);
    for (int iter = 0; !done && iter < cfg.max_newton_iters; ++iter) {
        ++stats.newton_iterations;
        Eigen::MatrixXd jac(n, n);
        const double eps = cfg.fd_epsilon * (1.0 + max_norm(z));
        for (Eigen::Index col = 0; col < n; ++col) {
            Eigen::VectorXd zp = z;
            zp[col] += eps;
            jac.col(col) = (sys.residual(rows, zp) - r) / eps;
        }
        const Eigen::VectorXd delta = jac.partialPivLu().solve(-r);
        if (!delta.allFinite()) break;

        double lambda = 1.0;
        bool accepted = false;
        Eigen::VectorXd z_trial, r_trial, mag_trial;
        for (int halving = 0; halving <= 8; ++halving, lambda *= 0.5) {
            z_trial = z + lambda * delta;
            r_trial = sys.residual(rows, z_trial, &mag_trial);
            if (!r_trial.allFinite()) continue;
            if (max_norm(r_trial) < rnorm || converged(r_trial, mag_trial, cfg.newton_tol)) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        z = std::move(z_trial);
        r = std::move(r_trial);
        mag = std::move(mag_trial);
        rnorm = max_norm(r);
        done = converged(r, mag, cfg.newton_tol);
    }

    if (!done && cfg.fallback_fixed_point) {
        stats.used_fixed_point = true;
        // Restart from the best Newton iterate.
        for (int iter = 0; !done && iter < cfg.fixed_point_max_iters; ++iter) {
            ++stats.fixed_point_iterations;
            sys.scatter(rows, z);
            z = sys.update(rows);
            if (!z.allFinite())
                throw SolverError("non-finite value in fixed-point iteration of stage(s) " + stage_list(rows), rnorm,
                                  to_state(z));
            r = sys.residual(rows, z, &mag);
            rnorm = max_norm(r);
            done = r.allFinite() && converged(r, mag, cfg.newton_tol);
        }
    }
    sys.scatter(rows, z);
    stats.residual_norm = std::max(stats.residual_norm, rnorm);
    if (!done) {
        std::ostringstream msg;
        msg << "stage solve for stage(s) " << stage_list(rows) << " did not converge (residual " << rnorm << ")";
        throw SolverError(msg.str(), rnorm, to_state(z));
    }
}

void check_step_inputs(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h) {
    if (ode.partitions != t.M())
        throw DomainError("ODE has " + std::to_string(ode.partitions) + " partitions but the tableau has M = " +
                          std::to_string(t.M()));
    if (y.size() != static_cast<std::size_t>(ode.dim))
        throw DomainError("state has length " + std::to_string(y.size()) + ", expected " + std::to_string(ode.dim));
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("step size must be positive and finite");
    for (double v : y)
        if (!std::isfinite(v)) throw DomainError("state contains non-finite values");
}

StepStats solve_all_stages(const NprkTableau& t, StageSystem& sys, const StageSolverConfig& cfg) {
    StepStats stats;
    const auto structure = analyze_stages(t);
    if (!structure.sequential) {
        stats.coupled = true;
        std::vector<int> all(static_cast<std::size_t>(t.s()));
        for (int i = 0; i < t.s(); ++i) all[static_cast<std::size_t>(i)] = i;
        solve_stages(sys, all, cfg, stats);
        return stats;
    }
    for (int i = 0; i < t.s(); ++i) {
        const std::vector<int> row{i};
        if (i > 0) sys.stages().col(i) = sys.stages().col(i - 1);
        if (structure.explicit_stage[static_cast<std::size_t>(i)]) {
            const Eigen::VectorXd value = sys.update(row);
            if (!value.allFinite())
                throw SolverError("non-finite value in explicit stage " + std::to_string(i + 1),
                                  std::numeric_limits<double>::infinity(), to_state(value));
            sys.stages().col(i) = value;
        } else {
            solve_stages(sys, row, cfg, stats);
        }
    }
    return stats;
}

} // namespace

StepResult step_detail(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h,
                       const StageSolverConfig& cfg) {
    check_step_inputs(t, ode, y, h);
    StageSystem sys(t, ode, y, h);
    StepResult res;
    res.stats = solve_all_stages(t, sys, cfg);

    Eigen::VectorXd inc = Eigen::VectorXd::Zero(ode.dim);
    for (std::size_t K = 0; K < t.multi_count(); ++K)
        if (t.b_at(K) != 0.0) inc += (h * t.b_at(K)) * sys.eval(K);
    if (!inc.allFinite()) throw SolverError("non-finite update", std::numeric_limits<double>::infinity(), to_state(inc));
    res.y = to_state(sys.y() + inc);
    res.increment = to_state(inc);
    for (int i = 0; i < t.s(); ++i) res.stages.push_back(to_state(sys.stages().col(i)));
    return res;
}

State step(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h,
           const StageSolverConfig& cfg) {
    return step_detail(t, ode, y, h, cfg).y;
}

double stage_residual(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y, double h,
                      const std::vector<State>& stages) {
    check_step_inputs(t, ode, y, h);
    StageSystem sys(t, ode, y, h);
    std::vector<int> all(static_cast<std::size_t>(t.s()));
    Eigen::VectorXd z(static_cast<Eigen::Index>(t.s()) * ode.dim);
    for (int i = 0; i < t.s(); ++i) {
        all[static_cast<std::size_t>(i)] = i;
        z.segment(static_cast<Eigen::Index>(i) * ode.dim, ode.dim) =
            Eigen::Map<const Eigen::VectorXd>(stages[static_cast<std::size_t>(i)].data(), ode.dim);
    }
    return max_norm(sys.residual(all, z));
}

Trajectory integrate(const NprkTableau& t, const PartitionedOde& ode, std::span<const double> y0, double t0,
                     double t_end, double h, const StageSolverConfig& cfg) {
    if (!(t_end > t0)) throw DomainError("t_end must exceed t0");
    if (!(h > 0.0)) throw DomainError("step size must be positive");
    // Number of steps, tolerant to h dividing the interval up to rounding.
    const double ratio = (t_end - t0) / h;
    const auto steps = static_cast<long long>(std::max(1.0, std::ceil(ratio * (1.0 - 1e-12))));

    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.emplace_back(y0.begin(), y0.end());
    State y(y0.begin(), y0.end());
    State carry(y.size(), 0.0); // Kahan compensation
    for (long long k = 1; k <= steps; ++k) {
        const double t_next = (k == steps) ? t_end : t0 + static_cast<double>(k) * h;
        const double hk = t_next - traj.times.back();
        auto res = step_detail(t, ode, y, hk, cfg);
        for (std::size_t d = 0; d < y.size(); ++d) {
            const double inc = res.increment[d] - carry[d];
            const double sum = y[d] + inc;
            carry[d] = (sum - y[d]) - inc;
            y[d] = sum;
        }
        traj.times.push_back(t_next);
        traj.states.push_back(y);
        traj.stats.push_back(res.stats);
    }
    return traj;
}

double embedded_diff(const NprkTableau& primary, const NprkTableau& embedded, const PartitionedOde& ode,
                     std::span<const double> y, double h, const StageSolverConfig& cfg) {
    if (!primary.same_a(embedded)) throw ValidationError("embedded pair must share the a tensor (within 1e-14)");
    check_step_inputs(primary, ode, y, h);
    StageSystem sys(primary, ode, y, h);
    solve_all_stages(primary, sys, cfg);
    Eigen::VectorXd diff = Eigen::VectorXd::Zero(ode.dim);
    for (std::size_t K = 0; K < primary.multi_count(); ++K) {
        const double db = primary.b_at(K) - embedded.b_at(K);
        if (db != 0.0) diff += db * sys.eval(K);
    }
    return h * diff.cwiseAbs().sum();
}

void write_csv(const Trajectory& traj, std::ostream& os) {
    const std::size_t dim = traj.states.empty() ? 0 : traj.states.front().size();
    os << "t";
    for (std::size_t d = 0; d < dim; ++d) os << ",y" << d;
    os << "\n" << std::setprecision(17);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << traj.times[k];
        for (double v : traj.states[k]) os << "," << v;
        os << "\n";
    }
}

} // namespace nprk

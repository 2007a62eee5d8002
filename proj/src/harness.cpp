#include "nprk/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "nprk/errors.hpp"
#include "nprk/parallel.hpp"

namespace nprk {

PartitionedOde lotka_volterra(double alpha) {
    PartitionedOde ode;
    ode.dim = 2;
    ode.partitions = 2;
    ode.eval = [alpha](ArgList args, std::span<double> out) {
        const double u1 = args[0][0], v1 = args[0][1];
        const double u2 = args[1][0], v2 = args[1][1];
        out[0] = u2 - alpha * u1 * v2;
        out[1] = v1 + alpha * u2 * v1;
    };
    ode.unpartitioned = [alpha](std::span<const double> y, std::span<double> out) {
        out[0] = y[0] - alpha * y[0] * y[1];
        out[1] = y[1] + alpha * y[0] * y[1];
    };
    std::ostringstream d;
    d << "lotka_volterra(alpha=" << alpha << ")";
    ode.description = d.str();
    return ode;
}

PartitionedOde burgers(double epsilon, int n_cells) {
    if (n_cells < 8) throw DomainError("burgers needs at least 8 cells");
    if (!(epsilon >= 0.0)) throw DomainError("burgers viscosity must be non-negative");
    const double dx = 1.0 / n_cells;
    const auto apply = [epsilon, n_cells, dx](std::span<const double> u, std::span<const double> v, std::span<double> out) {
        for (int k = 0; k < n_cells; ++k) {
            const double left = u[static_cast<std::size_t>((k + n_cells - 1) % n_cells)];
            const double right = u[static_cast<std::size_t>((k + 1) % n_cells)];
            const double mid = u[static_cast<std::size_t>(k)];
            const double lap = (left - 2.0 * mid + right) / (dx * dx);
            const double grad = (right - left) / (2.0 * dx);
            out[static_cast<std::size_t>(k)] = epsilon * lap + v[static_cast<std::size_t>(k)] * grad;
        }
    };
    PartitionedOde ode;
    ode.dim = n_cells;
    ode.partitions = 2;
    ode.eval = [apply](ArgList args, std::span<double> out) { apply(args[0], args[1], out); };
    ode.unpartitioned = [apply](std::span<const double> y, std::span<double> out) { apply(y, y, out); };
    std::ostringstream d;
    d << "burgers(epsilon=" << epsilon << ", cells=" << n_cells << ")";
    ode.description = d.str();
    return ode;
}

namespace {

struct WitnessNode {
    std::vector<std::pair<int, int>> children; // (component, color)
    double scale = 1.0;                        // 1 / prod mu!
};

std::vector<WitnessNode> witness_nodes(const ColoredTree& tree) {
    const std::size_t n = tree.order();
    const auto par = parents(tree);
    std::vector<std::vector<std::size_t>> kids(n);
    for (std::size_t k = 1; k < n; ++k) kids[static_cast<std::size_t>(par[k])].push_back(k);

    const auto subtree = [&](std::size_t k) {
        ColoredTree sub;
        sub.num_colors = tree.num_colors;
        for (std::size_t j = k; j < n && (j == k || tree.level_seq[j] > tree.level_seq[k]); ++j) {
            sub.level_seq.push_back(tree.level_seq[j] - tree.level_seq[k] + 1);
            sub.color_seq.push_back(j == k ? 0 : tree.color_seq[j]);
        }
        return sub;
    };

    std::vector<WitnessNode> nodes(n);
    for (std::size_t k = 0; k < n; ++k) {
        double fact = 1.0;
        int run = 0;
        for (std::size_t c = 0; c < kids[k].size(); ++c) {
            const std::size_t child = kids[k][c];
            nodes[k].children.emplace_back(static_cast<int>(n - 1 - child), tree.color_seq[child]);
            const bool same = c > 0 && tree.color_seq[child] == tree.color_seq[kids[k][c - 1]] &&
                              subtree(child) == subtree(kids[k][c - 1]);
            run = same ? run + 1 : 1;
            fact *= run;
        }
        nodes[k].scale = 1.0 / fact;
    }
    return nodes;
}

} // namespace

PartitionedOde witness_ode(const ColoredTree& input) {
    validate(input);
    const ColoredTree tree = canonicalize(input);
    const auto nodes = witness_nodes(tree);
    const int n = static_cast<int>(tree.order());

    PartitionedOde ode;
    ode.dim = n;
    ode.partitions = tree.num_colors;
    ode.eval = [nodes, n](ArgList args, std::span<double> out) {
        for (int k = 0; k < n; ++k) {
            const auto& node = nodes[static_cast<std::size_t>(k)];
            double v = node.scale;
            for (const auto& [component, color] : node.children)
                v *= args[static_cast<std::size_t>(color)][static_cast<std::size_t>(component)];
            out[static_cast<std::size_t>(n - 1 - k)] = v;
        }
    };
    ode.unpartitioned = [nodes, n](std::span<const double> y, std::span<double> out) {
        for (int k = 0; k < n; ++k) {
            const auto& node = nodes[static_cast<std::size_t>(k)];
            double v = node.scale;
            for (const auto& child : node.children) v *= y[static_cast<std::size_t>(child.first)];
            out[static_cast<std::size_t>(n - 1 - k)] = v;
        }
    };
    ode.description = "witness(" + to_compact(tree) + ")";
    return ode;
}

State witness_exact(const ColoredTree& input, double t) {
    const ColoredTree tree = canonicalize(input);
    const std::size_t n = tree.order();
    State y(n);
    for (std::size_t k = 0; k < n; ++k) {
        ColoredTree sub;
        sub.num_colors = tree.num_colors;
        for (std::size_t j = k; j < n && (j == k || tree.level_seq[j] > tree.level_seq[k]); ++j) {
            sub.level_seq.push_back(tree.level_seq[j] - tree.level_seq[k] + 1);
            sub.color_seq.push_back(j == k ? 0 : tree.color_seq[j]);
        }
        double v = symmetry(sub).convert_to<double>();
        for (std::size_t m = 1; m <= sub.order(); ++m) v *= t / static_cast<double>(m);
        y[n - 1 - k] = v;
    }
    return y;
}

double taylor_coefficient(const std::vector<double>& h, const std::vector<double>& y, int n, int degree) {
    if (h.size() != y.size() || h.size() < static_cast<std::size_t>(degree + 1))
        throw ValidationError("taylor_coefficient needs at least degree + 1 samples");
    const auto m = static_cast<Eigen::Index>(h.size());
    Eigen::MatrixXd V(m, degree + 1);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double hk = h[static_cast<std::size_t>(k)];
        rhs[k] = y[static_cast<std::size_t>(k)] / std::pow(hk, n);
        double p = 1.0;
        for (int d = 0; d <= degree; ++d, p *= hk) V(k, d) = p;
    }
    return V.colPivHouseholderQr().solve(rhs)[0];
}

double witness_coefficient(const NprkTableau& t, const ColoredTree& tree) {
    const auto ode = witness_ode(tree);
    const State y0(static_cast<std::size_t>(ode.dim), 0.0);
    // Values scale like h^n, so only the relative convergence test is meaningful.
    StageSolverConfig cfg;
    cfg.newton_tol = 0.0;
    std::vector<double> hs, ys;
    for (int k = 2; k <= 6; ++k) {
        const double h = std::ldexp(1.0, -k);
        hs.push_back(h);
        ys.push_back(step(t, ode, y0, h, cfg).back());
    }
    return taylor_coefficient(hs, ys, ode.dim);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3) throw ValidationError("line fit needs at least 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) throw ValidationError("line fit needs distinct abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (fit.intercept + fit.slope * x[k]);
        ssr += r * r;
    }
    fit.residual_stderr = std::sqrt(ssr / (n - 2.0));
    fit.slope_stderr = fit.residual_stderr / std::sqrt(sxx);
    return fit;
}

LinearFit fit_loglog(const std::vector<double>& h, const std::vector<double>& value) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < h.size(); ++k) {
        lx.push_back(std::log10(h[k]));
        ly.push_back(std::log10(value[k]));
    }
    return fit_line(lx, ly);
}

namespace {

double l1_distance(const State& a, const State& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
    return d;
}

void check_h_grid(const std::vector<double>& h) {
    if (h.size() < 4) throw ValidationError("convergence study needs at least 4 step sizes");
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (!(h[k] > 0.0)) throw ValidationError("step sizes must be positive");
        if (k > 0 && !(h[k] < h[k - 1])) throw ValidationError("step sizes must be strictly decreasing");
    }
    if (std::log10(h.front() / h.back()) < kMinDecades - 1e-12)
        throw ValidationError("step sizes must span at least one decade");
}

} // namespace

ConvergenceResult convergence_study(const NprkTableau& t, const PartitionedOde& ode, const State& y0, double t_end,
                                    const std::vector<double>& h_values, const State& reference,
                                    const StageSolverConfig& cfg, unsigned threads) {
    check_h_grid(h_values);
    if (reference.size() != y0.size()) throw ValidationError("reference has the wrong dimension");
    ConvergenceResult res;
    res.h_values = h_values;
    res.errors.assign(h_values.size(), 0.0);
    parallel_for(h_values.size(), threads, [&](std::size_t k) {
        try {
            const auto traj = integrate(t, ode, y0, 0.0, t_end, h_values[k], cfg);
            res.errors[k] = l1_distance(traj.states.back(), reference);
        } catch (const SolverError& e) {
            std::ostringstream msg;
            msg << "integration with h = " << h_values[k] << " failed: " << e.what();
            throw SolverError(msg.str(), e.residual_norm(), e.iterate());
        }
    });
    for (double e : res.errors)
        if (!(e > 0.0) || !std::isfinite(e)) return res;
    const auto fit = fit_loglog(h_values, res.errors);
    res.slope = fit.slope;
    res.slope_stderr = fit.slope_stderr;
    res.residual_stderr = fit.residual_stderr;
    res.fitted = std::isfinite(fit.slope);
    return res;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    return hash;
}

State lotka_volterra_reference(double alpha, const State& y0, double t_end,
                               const std::optional<std::filesystem::path>& cache_dir) {
    std::ostringstream key;
    key << std::hexfloat << "lotka_volterra|alpha=" << alpha << "|t_end=" << t_end << "|method1|h=" << kReferenceStep
        << "|y0=";
    for (double v : y0) key << v << ",";
    char name[32];
    std::snprintf(name, sizeof name, "ref-%016llx.txt", static_cast<unsigned long long>(fnv1a(key.str())));

    std::optional<std::filesystem::path> file;
    if (cache_dir) {
        file = *cache_dir / name;
        std::ifstream in(*file);
        std::string stored_key;
        if (in && std::getline(in, stored_key) && stored_key == key.str()) {
            State y;
            std::string token;
            while (in >> token) y.push_back(std::strtod(token.c_str(), nullptr));
            if (y.size() == y0.size()) return y;
        }
    }

    const auto traj = integrate(builtin_tableau("method1"), lotka_volterra(alpha), y0, 0.0, t_end, kReferenceStep);
    State y = traj.states.back();
    if (file) {
        std::filesystem::create_directories(*cache_dir);
        std::ofstream out(*file);
        out << key.str() << "\n" << std::hexfloat;
        for (double v : y) out << v << "\n";
    }
    return y;
}

std::vector<ScanPoint> coupling_scan(const std::vector<double>& alpha_grid, const std::vector<double>& h_values,
                                     const State& y0, const StageSolverConfig& cfg, unsigned threads) {
    if (alpha_grid.empty() || h_values.empty()) throw ValidationError("coupling scan needs a non-empty grid");
    const auto m1 = builtin_tableau("method1");
    const auto m2 = builtin_tableau("method2");
    std::vector<ScanPoint> rows(alpha_grid.size() * h_values.size());
    parallel_for(rows.size(), threads, [&](std::size_t k) {
        auto& row = rows[k];
        row.alpha = alpha_grid[k / h_values.size()];
        row.h = h_values[k % h_values.size()];
        row.estimate = embedded_diff(m1, m2, lotka_volterra(row.alpha), y0, row.h, cfg);
    });
    return rows;
}

std::vector<double> default_alpha_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 60; ++k) grid.push_back(0.05 * k);
    return grid;
}

} // namespace nprk

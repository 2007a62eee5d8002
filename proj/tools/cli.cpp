#include "nprk/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "nprk/conditions.hpp"
#include "nprk/errors.hpp"
#include "nprk/harness.hpp"
#include "nprk/integrator.hpp"
#include "nprk/json_io.hpp"
#include "nprk/tableau.hpp"
#include "nprk/tree.hpp"

namespace nprk::cli {

namespace {

constexpr const char* kVersion = "nprk 1.0.0";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct Options {
    int partitions = 2;
    int order = 0;
    int max_order = 0;
    int stages = 3;
    std::string tableau;
    double tol = kDefaultOrderTol;
    std::vector<double> alpha;
    std::vector<double> h;
    double t_end = 1.0;
    std::string format = "text";
    std::string out_path;
    unsigned threads = 1;
    std::uint64_t seed = 1;
    std::uint64_t max_trees = kDefaultTreeCap;
    std::string b_mode = "diagonal";
    std::string problem = "lv";
    int cells = 64;
    double epsilon = 0.01;
    std::string cache_dir;
    std::string tree;
    std::vector<double> y0;
};

void require_format(const std::string& format, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed)
        if (format == a) return;
    std::string msg = "format '" + format + "' is not supported here; use one of:";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ValidationError(msg);
}

// Orders requested through --order N (single) or --max-order N (1..N).
std::pair<int, int> order_range(const Options& o, int default_max) {
    if (o.order > 0) return {o.order, o.order};
    return {1, o.max_order > 0 ? o.max_order : default_max};
}

void cmd_enumerate(const Options& o, std::ostream& out) {
    require_format(o.format, {"text", "csv", "json"});
    const auto [lo, hi] = order_range(o, 8);
    if (o.format == "csv") out << "M,order,total,coupling,underlying,linear,nonlinear,generating_function\n";
    if (o.format == "text")
        out << "M = " << o.partitions << "\n"
            << "order        total     coupling   underlying       linear    nonlinear\n";
    for (int q = lo; q <= hi; ++q) {
        const auto c = count_conditions(o.partitions, q, o.max_trees);
        const auto g = count_ark_conditions(o.partitions, q);
        if (o.format == "csv")
            out << o.partitions << "," << q << "," << c.total << "," << c.coupling << "," << c.underlying << ","
                << c.linear << "," << c.nonlinear << "," << g << "\n";
        else if (o.format == "json")
            out << Json{{"M", o.partitions},         {"order", q},           {"total", c.total},
                        {"coupling", c.coupling},    {"underlying", c.underlying}, {"linear", c.linear},
                        {"nonlinear", c.nonlinear},  {"generating_function", g.str()}}
                       .dump()
                << "\n";
        else {
            char line[128];
            std::snprintf(line, sizeof line, "%5d %12llu %12llu %12llu %12llu %12llu\n", q,
                          static_cast<unsigned long long>(c.total), static_cast<unsigned long long>(c.coupling),
                          static_cast<unsigned long long>(c.underlying), static_cast<unsigned long long>(c.linear),
                          static_cast<unsigned long long>(c.nonlinear));
            out << line;
        }
    }
}

void cmd_conditions(const Options& o, std::ostream& out) {
    require_format(o.format, {"text", "latex", "json", "csv"});
    std::optional<NprkTableau> t;
    if (!o.tableau.empty()) t = load_tableau(o.tableau);
    const int M = t ? t->M() : o.partitions;
    const auto [lo, hi] = order_range(o, 3);
    if (o.format == "csv") out << "order,tree,gamma,alpha,class" << (t ? ",weight,target,residual" : "") << "\n";
    for (int q = lo; q <= hi; ++q) {
        const auto trees = generate_trees(M, q, o.max_trees);
        std::vector<ConditionReport> reports(trees.size());
        for (std::size_t k = 0; k < trees.size(); ++k) {
            if (t) {
                reports[k] = evaluate_condition(*t, trees[k]);
            } else {
                reports[k].tree = trees[k];
                reports[k].order = q;
                reports[k].target = 1.0 / static_cast<double>(density(trees[k]));
                reports[k].cls = classify(trees[k]);
            }
        }
        for (const auto& rep : reports) {
            if (o.format == "text" || o.format == "latex") {
                out << render_condition(rep.tree, o.format == "latex" ? RenderStyle::Latex : RenderStyle::Text);
                if (t) out << "    [residual " << sci(rep.residual) << "]";
                out << "\n";
            } else if (o.format == "csv") {
                out << q << "," << to_compact(rep.tree) << "," << density(rep.tree) << "," << symmetry(rep.tree) << ","
                    << rep.cls.name();
                if (t) out << "," << num(rep.weight) << "," << num(rep.target) << "," << num(rep.residual);
                out << "\n";
            } else {
                Json j = t ? to_json(rep)
                           : Json{{"order", rep.order}, {"tree", to_json(rep.tree)}, {"target", rep.target},
                                  {"class", rep.cls.name()}};
                out << j.dump() << "\n";
            }
        }
    }
}

void cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
    require_format(o.format, {"text", "json"});
    const auto t = load_tableau(o.tableau);
    const auto report = validate(t);
    if (!report.finite) throw ValidationError("tableau has a non-finite entry at " + report.nonfinite_location);
    for (const auto& f : report.findings) err << "warning: " << f << "\n";
    const int p = o.max_order > 0 ? o.max_order : 4;
    const auto verdict = verify_order(t, p, o.tol, o.max_trees);
    if (o.format == "json") {
        Json failing = Json::array();
        for (const auto& rep : verdict.failing) {
            auto j = to_json(rep);
            j["rendered"] = render_condition(rep.tree);
            failing.push_back(j);
        }
        out << Json{{"detected_order", verdict.detected_order},
                    {"examined_order", verdict.examined_order},
                    {"tol", verdict.tol},
                    {"abscissae_consistent", report.abscissae_consistent},
                    {"failing", failing}}
                   .dump(2)
            << "\n";
        return;
    }
    out << "detected order: " << verdict.detected_order << "\n";
    if (verdict.failing.empty()) {
        out << "all conditions through order " << verdict.examined_order << " hold (tol " << sci(o.tol) << ")\n";
        return;
    }
    out << "failing order-" << verdict.detected_order + 1 << " conditions:\n";
    for (const auto& rep : verdict.failing)
        out << "  " << render_condition(rep.tree) << "    residual " << sci(rep.residual) << "\n";
}

void write_method(const BuiltinMethod& m, std::ostream& out) {
    std::visit([&](const auto& v) { out << to_json(v).dump() << "\n"; }, m);
}

void cmd_convert(const Options& o, std::ostream& out) {
    require_format(o.format, {"text", "json"});
    auto m = load_method(o.tableau.empty() ? "builtin:lobatto3A3B" : o.tableau);
    if (const auto* pair = std::get_if<ArkPair>(&m)) {
        if (o.b_mode != "dense" && o.b_mode != "diagonal") throw ValidationError("--b-mode must be dense or diagonal");
        write_method(ark_to_nprk(*pair, o.b_mode == "dense" ? BMode::Dense : BMode::Diagonal), out);
    } else {
        write_method(underlying_ark(std::get<NprkTableau>(m)), out);
    }
}

struct Problem {
    PartitionedOde ode;
    State y0;
};

Problem make_problem(const Options& o) {
    Problem p;
    const double alpha = o.alpha.empty() ? 0.0 : o.alpha.front();
    if (o.problem == "lv") {
        p.ode = lotka_volterra(alpha);
        p.y0 = {1.0, 1.0};
    } else if (o.problem == "burgers") {
        p.ode = burgers(o.epsilon, o.cells);
        const double pi = std::acos(-1.0);
        for (int k = 0; k < o.cells; ++k) p.y0.push_back(1.0 + 0.5 * std::sin(2.0 * pi * k / o.cells));
    } else if (o.problem == "witness") {
        if (o.tree.empty()) throw ValidationError("--problem witness needs --tree");
        p.ode = witness_ode(parse_compact(o.tree, o.partitions));
        p.y0.assign(static_cast<std::size_t>(p.ode.dim), 0.0);
    } else {
        throw ValidationError("unknown problem '" + o.problem + "'; use lv, burgers or witness");
    }
    if (!o.y0.empty()) {
        if (o.y0.size() != p.y0.size())
            throw ValidationError("--y0 needs " + std::to_string(p.y0.size()) + " values for this problem");
        p.y0 = o.y0;
    }
    return p;
}

void cmd_integrate(const Options& o, std::ostream& out) {
    require_format(o.format, {"csv", "json", "text"});
    const auto t = load_tableau(o.tableau.empty() ? "builtin:method1" : o.tableau);
    const auto p = make_problem(o);
    if (o.h.size() != 1) throw ValidationError("integrate needs exactly one --h");
    const auto traj = integrate(t, p.ode, p.y0, 0.0, o.t_end, o.h.front());
    if (o.format == "json") {
        Json stats = Json::array();
        for (const auto& s : traj.stats) stats.push_back(to_json(s));
        out << Json{{"problem", p.ode.description}, {"t_end", o.t_end}, {"h", o.h.front()},
                    {"final_state", traj.states.back()}, {"stats", stats}}
                   .dump()
            << "\n";
        return;
    }
    write_csv(traj, out);
}

std::vector<double> default_convergence_grid() { return {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320, 1.0 / 640}; }

void cmd_converge(const Options& o, std::ostream& out) {
    require_format(o.format, {"csv", "json", "text"});
    const std::string spec = o.tableau.empty() ? "builtin:method1" : o.tableau;
    const auto t = load_tableau(spec);
    const auto hs = o.h.empty() ? default_convergence_grid() : o.h;
    const auto alphas = o.alpha.empty() ? std::vector<double>{0.0, 0.01, 2.0} : o.alpha;
    std::optional<std::filesystem::path> cache;
    if (!o.cache_dir.empty()) cache = o.cache_dir;
    const State y0 = o.y0.empty() ? State{1.0, 1.0} : o.y0;

    if (o.format == "csv") out << "alpha,h,error\n";
    Json summary = Json::array();
    for (double alpha : alphas) {
        const auto ref = lotka_volterra_reference(alpha, y0, o.t_end, cache);
        const auto res = convergence_study(t, lotka_volterra(alpha), y0, o.t_end, hs, ref, {}, o.threads);
        if (o.format == "csv") {
            for (std::size_t k = 0; k < hs.size(); ++k) out << num(alpha) << "," << num(hs[k]) << "," << num(res.errors[k]) << "\n";
        } else if (o.format == "json") {
            auto j = to_json(res);
            summary.push_back(Json{{"tableau", spec}, {"alpha", alpha}, {"study", j}});
        } else {
            out << "alpha = " << alpha << "\n";
            for (std::size_t k = 0; k < hs.size(); ++k) out << "  h = " << sci(hs[k]) << "  error = " << sci(res.errors[k]) << "\n";
            if (res.fitted)
                out << "  slope = " << res.slope << " (stderr " << sci(res.slope_stderr) << ", residual stderr "
                    << sci(res.residual_stderr) << ")\n";
            else
                out << "  slope: not a fit (zero error)\n";
        }
    }
    if (o.format == "json") out << summary.dump(2) << "\n";
}

void cmd_coupling_scan(const Options& o, std::ostream& out) {
    require_format(o.format, {"csv", "json", "text"});
    const auto alphas = o.alpha.empty() ? default_alpha_grid() : o.alpha;
    const auto hs = o.h.empty() ? std::vector<double>{1e-2, 1e-3, 1e-4} : o.h;
    const State y0 = o.y0.empty() ? State{1.0, 1.0} : o.y0;
    const auto rows = coupling_scan(alphas, hs, y0, {}, o.threads);
    if (o.format == "json") {
        Json j = Json::array();
        for (std::size_t a = 0; a < alphas.size(); ++a) {
            std::vector<double> est;
            for (std::size_t k = 0; k < hs.size(); ++k) est.push_back(rows[a * hs.size() + k].estimate);
            Json entry{{"alpha", alphas[a]}, {"h", hs}, {"estimate", est}};
            bool positive = hs.size() >= 3;
            for (double e : est) positive = positive && e > 0.0;
            if (positive) {
                const auto fit = fit_loglog(hs, est);
                entry["slope"] = fit.slope;
                entry["residual_stderr"] = fit.residual_stderr;
            }
            j.push_back(entry);
        }
        out << j.dump(2) << "\n";
        return;
    }
    out << "alpha,h,estimate\n";
    for (const auto& r : rows) out << num(r.alpha) << "," << num(r.h) << "," << num(r.estimate) << "\n";
}

std::string witness_equation(const ColoredTree& tree, int component) {
    // Each right-hand side is a scaled monomial; probe it by doubling one argument entry at a time.
    const auto ode = witness_ode(tree);
    const int n = ode.dim;
    std::ostringstream eq;
    eq << "y" << component + 1 << "' = ";
    std::vector<State> args(static_cast<std::size_t>(ode.partitions), State(static_cast<std::size_t>(n), 1.0));
    const double coeff = ode(args)[static_cast<std::size_t>(component)];
    std::vector<std::string> factors;
    for (int r = 0; r < ode.partitions; ++r)
        for (int q = 0; q < n; ++q) {
            args[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)] = 2.0;
            const double v = ode(args)[static_cast<std::size_t>(component)];
            args[static_cast<std::size_t>(r)][static_cast<std::size_t>(q)] = 1.0;
            const auto power = static_cast<int>(std::lround(std::log2(v / coeff)));
            for (int e = 0; e < power; ++e) factors.push_back("arg" + std::to_string(r + 1) + "[" + std::to_string(q + 1) + "]");
        }
    if (factors.empty() || coeff != 1.0) eq << num(coeff);
    for (std::size_t k = 0; k < factors.size(); ++k) eq << ((k || coeff != 1.0) ? " * " : "") << factors[k];
    return eq.str();
}

void cmd_witness(const Options& o, std::ostream& out) {
    require_format(o.format, {"text", "json"});
    if (o.tree.empty()) throw ValidationError("witness needs --tree, e.g. --tree 'L:1,2,2;C:0,0,1'");
    std::optional<NprkTableau> t;
    if (!o.tableau.empty()) t = load_tableau(o.tableau);
    const int M = t ? t->M() : o.partitions;
    const ColoredTree tree = canonicalize(parse_compact(o.tree, M));
    const auto n = static_cast<int>(tree.order());
    std::vector<std::string> eqs;
    for (int q = 0; q < n; ++q) eqs.push_back(witness_equation(tree, q));

    double factorial = 1.0;
    for (int k = 2; k <= n; ++k) factorial *= k;
    Json j{{"tree", to_json(tree)},
           {"compact", to_compact(tree)},
           {"gamma", density(tree)},
           {"alpha", symmetry(tree).str()},
           {"automorphisms", automorphisms(tree).str()},
           {"equations", eqs}};
    if (t) {
        const double expected = symmetry(tree).convert_to<double>() * static_cast<double>(density(tree)) *
                                elementary_weight(*t, tree) / factorial;
        j["coefficient"] = witness_coefficient(*t, tree);
        j["expected"] = expected;
    }
    if (o.format == "json") {
        out << j.dump(2) << "\n";
        return;
    }
    out << "tree " << to_compact(tree) << "  gamma = " << density(tree) << "  alpha = " << symmetry(tree) << "\n";
    for (const auto& e : eqs) out << "  " << e << "\n";
    out << "  exact root component: " << symmetry(tree) << " t^" << n << "/" << n << "!\n";
    if (t)
        out << "  h^" << n << " coefficient: " << num(j["coefficient"].get<double>())
            << "  (alpha*gamma*Phi/n! = " << num(j["expected"].get<double>()) << ")\n";
}

// Randomized cross-checks between independent code paths.
int cmd_selftest(const Options& o, std::ostream& out) {
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    int failures = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int M = 1 + static_cast<int>(rng() % 3);
        const int s = std::max(1, std::min(o.stages, 3));
        const int q = 1 + static_cast<int>(rng() % 4);
        std::size_t na = 1;
        for (int k = 0; k <= M; ++k) na *= static_cast<std::size_t>(s);
        std::vector<double> a(na), b(na / static_cast<std::size_t>(s));
        for (auto& v : a) v = dist(rng);
        for (auto& v : b) v = dist(rng);
        const NprkTableau t(M, s, a, b);
        const auto trees = generate_trees(M, q);
        const auto& tree = trees[rng() % trees.size()];
        const double fast = elementary_weight(t, tree);
        const double slow = elementary_weight_naive(t, tree);
        const double rel = std::abs(fast - slow) / std::max(1.0, std::abs(slow));
        if (rel > 1e-12) {
            ++failures;
            out << "weight mismatch M=" << M << " tree " << to_compact(tree) << ": " << num(fast) << " vs " << num(slow) << "\n";
        }
    }
    for (int trial = 0; trial < 20; ++trial) {
        const auto ode = lotka_volterra(3.0 * (dist(rng) + 1.0));
        const State y{dist(rng), dist(rng)};
        State f(2);
        ode.unpartitioned(y, f);
        const auto g = ode.diagonal(y);
        if (std::abs(f[0] - g[0]) + std::abs(f[1] - g[1]) > 1e-14) ++failures;
    }
    out << "selftest seed " << o.seed << ": " << (failures ? "FAIL" : "ok") << " (" << failures << " failures)\n";
    return failures ? Invalid : Success;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Order conditions, tableau tools and integrator for nonlinearly partitioned Runge-Kutta methods.", "nprk"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    Options o;

    const auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", o.out_path, "Write data to PATH instead of standard output");
    };

    auto* enumerate = app.add_subcommand(
        "enumerate",
        "Count edge-colored rooted trees per order, split into underlying, linear (*) and nonlinear (†) coupling\n"
        "conditions, with the generating-function count alongside.");
    enumerate->add_option("--partitions", o.partitions, "Number of partitions M")->check(CLI::Range(1, 64));
    enumerate->add_option("--order", o.order, "Single order N")->check(CLI::PositiveNumber);
    enumerate->add_option("--max-order", o.max_order, "Orders 1..N (default 8)")->check(CLI::PositiveNumber);
    enumerate->add_option("--max-trees", o.max_trees, "Cap on trees enumerated per order");
    enumerate->add_option("--format", o.format, "text, csv or json");
    add_out(enumerate);

    auto* conditions = app.add_subcommand(
        "conditions",
        "List the order conditions of one order as rendered sums (text or latex) or JSON lines. With --tableau,\n"
        "each condition is evaluated.");
    conditions->add_option("--partitions", o.partitions, "Number of partitions M")->check(CLI::Range(1, 64));
    conditions->add_option("--order", o.order, "Single order N")->check(CLI::PositiveNumber);
    conditions->add_option("--max-order", o.max_order, "Orders 1..N (default 3)")->check(CLI::PositiveNumber);
    conditions->add_option("--tableau", o.tableau, "PATH or builtin:NAME to evaluate");
    conditions->add_option("--max-trees", o.max_trees, "Cap on trees enumerated per order");
    conditions->add_option("--threads", o.threads, "Worker threads");
    conditions->add_option("--format", o.format, "text, latex, csv or json");
    add_out(conditions);

    auto* check = app.add_subcommand(
        "check", "Determine the order of an NPRK tableau and list the first failing conditions.");
    check->add_option("--tableau", o.tableau, "PATH or builtin:NAME")->required();
    check->add_option("--max-order", o.max_order, "Highest order examined (default 4)")->check(CLI::PositiveNumber);
    check->add_option("--tol", o.tol, "Absolute residual tolerance")->capture_default_str();
    check->add_option("--max-trees", o.max_trees, "Cap on trees enumerated per order");
    check->add_option("--format", o.format, "text or json");
    add_out(check);

    auto* convert = app.add_subcommand(
        "convert", "Lift an ARK pair to a two-partition NPRK tableau (dense or diagonal weights), or reduce a\n"
                   "two-partition tableau to its underlying ARK pair. Output is JSON.");
    convert->add_option("--tableau", o.tableau, "PATH or builtin:NAME (default builtin:lobatto3A3B)");
    convert->add_option("--b-mode", o.b_mode, "dense or diagonal")->capture_default_str();
    convert->add_option("--format", o.format, "json");
    add_out(convert);

    auto* integ = app.add_subcommand(
        "integrate", "Integrate a built-in problem with fixed steps and write the trajectory as CSV, or a JSON summary\n"
                     "with per-step solver statistics.");
    integ->add_option("--tableau", o.tableau, "PATH or builtin:NAME (default builtin:method1)");
    integ->add_option("--problem", o.problem, "lv, burgers or witness")->capture_default_str();
    integ->add_option("--alpha", o.alpha, "Lotka-Volterra coupling parameter");
    integ->add_option("--epsilon", o.epsilon, "Burgers viscosity")->capture_default_str();
    integ->add_option("--cells", o.cells, "Burgers grid size")->capture_default_str();
    integ->add_option("--tree", o.tree, "Tree for the witness problem, e.g. L:1,2,2;C:0,0,1");
    integ->add_option("--partitions", o.partitions, "Colors of --tree");
    integ->add_option("--y0", o.y0, "Initial state (default depends on the problem)");
    integ->add_option("--h", o.h, "Step size")->required();
    integ->add_option("--t-end", o.t_end, "Final time")->capture_default_str();
    integ->add_option("--format", o.format, "csv or json");
    add_out(integ);

    auto* converge = app.add_subcommand(
        "converge", "Convergence study on Lotka-Volterra from u(0) = v(0) = 1 to T against a Method 1 reference at\n"
                    "h = 1e-4, with least-squares slopes.");
    converge->add_option("--tableau", o.tableau, "PATH or builtin:NAME (default builtin:method1)");
    converge->add_option("--alpha", o.alpha, "Coupling parameter (repeatable; default 0, 0.01, 2)");
    converge->add_option("--h", o.h, "Step size (repeatable; default 1/40 ... 1/640)");
    converge->add_option("--t-end", o.t_end, "Final time")->capture_default_str();
    converge->add_option("--y0", o.y0, "Initial state");
    converge->add_option("--cache-dir", o.cache_dir, "Directory for cached reference solutions");
    converge->add_option("--threads", o.threads, "Worker threads");
    converge->add_option("--format", o.format, "text, csv or json");
    add_out(converge);

    auto* scan = app.add_subcommand(
        "coupling-scan",
        "One step of Methods 1 and 2 from u = v = 1 for each (alpha, h); prints the l1 difference of the two\n"
        "updates, an embedded estimate of the nonlinear coupling.");
    scan->add_option("--alpha", o.alpha, "Coupling parameter (repeatable; default 0:0.05:3)");
    scan->add_option("--h", o.h, "Step size (repeatable; default 1e-2, 1e-3, 1e-4)");
    scan->add_option("--y0", o.y0, "Initial state");
    scan->add_option("--threads", o.threads, "Worker threads");
    scan->add_option("--format", o.format, "csv or json");
    add_out(scan);

    auto* witness = app.add_subcommand(
        "witness", "Build the triangular polynomial ODE whose only nonvanishing elementary differential at 0 belongs\n"
                   "to --tree. With --tableau, extract the leading Taylor coefficient of one step and compare it to\n"
                   "alpha*gamma*Phi/n!.");
    witness->add_option("--tree", o.tree, "Compact tree, e.g. L:1,2,2;C:0,0,1")->required();
    witness->add_option("--partitions", o.partitions, "Number of colors")->capture_default_str();
    witness->add_option("--tableau", o.tableau, "PATH or builtin:NAME");
    witness->add_option("--format", o.format, "text or json");
    add_out(witness);

    auto* selftest = app.add_subcommand("selftest", "Randomized cross-checks");
    selftest->group("");
    selftest->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    selftest->add_option("--stages", o.stages, "Stages of the random tableaux")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Success : Invalid;
    }

    // The default format differs per subcommand.
    const auto* format_opt = app.get_subcommands().front()->get_option_no_throw("--format");
    const bool format_given = format_opt && format_opt->count() > 0;
    if (!format_given) {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "integrate" || name == "coupling-scan") o.format = "csv";
        if (name == "convert") o.format = "json";
    }

    std::ofstream file;
    if (!o.out_path.empty()) {
        file.open(o.out_path);
        if (!file) {
            err << "error: cannot write " << o.out_path << "\n";
            return Invalid;
        }
    }
    std::ostream& data = o.out_path.empty() ? out : file;

    try {
        if (enumerate->parsed()) cmd_enumerate(o, data);
        else if (conditions->parsed()) cmd_conditions(o, data);
        else if (check->parsed()) cmd_check(o, data, err);
        else if (convert->parsed()) cmd_convert(o, data);
        else if (integ->parsed()) cmd_integrate(o, data);
        else if (converge->parsed()) cmd_converge(o, data);
        else if (scan->parsed()) cmd_coupling_scan(o, data);
        else if (witness->parsed()) cmd_witness(o, data);
        else if (selftest->parsed()) return cmd_selftest(o, data);
    } catch (const BudgetExceeded& e) {
        err << "error: " << e.what() << "\n";
        return OverBudget;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << " (residual " << sci(e.residual_norm()) << ")\n";
        return SolverFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return Invalid;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return Invalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return Invalid;
    }
    return Success;
}

} // namespace nprk::cli

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nprk/conditions.hpp"
#include "nprk/errors.hpp"
#include "nprk/harness.hpp"
#include "nprk/json_io.hpp"

namespace py = pybind11;
using namespace nprk;

namespace {

py::int_ to_py(const BigInt& v) { return py::int_(py::str(v.str())); }

py::dict to_dict(const ConditionReport& rep) {
    py::dict d;
    d["order"] = rep.order;
    d["tree"] = to_compact(rep.tree);
    d["weight"] = rep.weight;
    d["target"] = rep.target;
    d["residual"] = rep.residual;
    d["class"] = std::string(rep.cls.name());
    return d;
}

BMode parse_mode(const std::string& mode) {
    if (mode == "dense") return BMode::Dense;
    if (mode == "diagonal") return BMode::Diagonal;
    throw ValidationError("b mode must be 'dense' or 'diagonal', got '" + mode + "'");
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Order conditions and integrators for nonlinearly partitioned Runge-Kutta methods";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<ColoredTree>(m, "Tree")
        .def(py::init([](std::vector<int> levels, std::vector<int> colors, int num_colors) {
                 ColoredTree t{std::move(levels), std::move(colors), num_colors};
                 validate(t);
                 return t;
             }),
             py::arg("level_seq"), py::arg("color_seq"), py::arg("num_colors"))
        .def_readonly("level_seq", &ColoredTree::level_seq)
        .def_readonly("color_seq", &ColoredTree::color_seq)
        .def_readonly("num_colors", &ColoredTree::num_colors)
        .def_property_readonly("order", &ColoredTree::order)
        .def("__eq__", [](const ColoredTree& a, const ColoredTree& b) { return a == b; })
        .def("__hash__", [](const ColoredTree& t) { return py::hash(py::str(to_compact(t) + "/" + std::to_string(t.num_colors))); })
        .def("__str__", &to_compact)
        .def("__repr__", [](const ColoredTree& t) { return "Tree('" + to_compact(t) + "')"; });

    m.def("parse_tree", [](std::string_view text, int M) { return parse_compact(text, M); }, py::arg("text"), py::arg("num_colors"));
    m.def("canonicalize", [](const ColoredTree& t) { return canonicalize(t); });
    m.def("generate_trees", [](int M, int order) { return generate_trees(M, order); }, py::arg("num_colors"), py::arg("order"));
    m.def("density", &density);
    m.def("symmetry", [](const ColoredTree& t) { return to_py(symmetry(t)); });
    m.def("classify", [](const ColoredTree& t) { return std::string(classify(t).name()); });
    m.def("tag", [](const ColoredTree& t) { return std::string(classify(t).tag()); });
    m.def("count_ark_conditions", [](int M, int order) { return to_py(count_ark_conditions(M, order)); });
    m.def(
        "count_conditions",
        [](int M, int order, std::uint64_t max_trees) {
            const auto c = count_conditions(M, order, max_trees);
            py::dict d;
            d["total"] = c.total;
            d["coupling"] = c.coupling;
            d["underlying"] = c.underlying;
            d["linear"] = c.linear;
            d["nonlinear"] = c.nonlinear;
            return d;
        },
        py::arg("num_colors"), py::arg("order"), py::arg("max_trees") = kDefaultTreeCap);
    m.def(
        "render_condition",
        [](const ColoredTree& t, bool latex) { return render_condition(t, latex ? RenderStyle::Latex : RenderStyle::Text); },
        py::arg("tree"), py::arg("latex") = false);

    py::class_<NprkTableau>(m, "Tableau")
        .def(py::init<int, int, std::vector<double>, std::vector<double>>(), py::arg("partitions"), py::arg("stages"),
             py::arg("a"), py::arg("b"))
        .def_property_readonly("M", &NprkTableau::M)
        .def_property_readonly("s", &NprkTableau::s)
        .def_property_readonly("a", &NprkTableau::a)
        .def_property_readonly("b", &NprkTableau::b)
        .def("abscissae", &NprkTableau::abscissae)
        .def("to_json", [](const NprkTableau& t) { return to_json(t).dump(); })
        .def("__repr__", [](const NprkTableau& t) {
            return "Tableau(M=" + std::to_string(t.M()) + ", s=" + std::to_string(t.s()) + ")";
        });

    m.def("builtin_names", &builtin_names);
    m.def("load_tableau", &load_tableau, py::arg("spec"), "A builtin:NAME reference or a JSON file path.");
    m.def(
        "lift",
        [](const std::string& spec, const std::string& mode) {
            const auto method = load_method(spec);
            if (const auto* pair = std::get_if<ArkPair>(&method)) return ark_to_nprk(*pair, parse_mode(mode));
            throw ValidationError("'" + spec + "' is not an additive pair");
        },
        py::arg("spec"), py::arg("mode") = "dense");

    m.def("elementary_weight", &elementary_weight, py::arg("tableau"), py::arg("tree"));
    m.def("elementary_weight_naive",
          [](const NprkTableau& t, const ColoredTree& tree) { return elementary_weight_naive(t, tree); });
    m.def(
        "verify_order",
        [](const NprkTableau& t, int p_max, double tol) {
            const auto v = verify_order(t, p_max, tol);
            py::list failing;
            for (const auto& rep : v.failing) failing.append(to_dict(rep));
            py::dict d;
            d["detected_order"] = v.detected_order;
            d["examined_order"] = v.examined_order;
            d["failing"] = failing;
            return d;
        },
        py::arg("tableau"), py::arg("max_order") = 4, py::arg("tol") = kDefaultOrderTol);

    py::class_<PartitionedOde>(m, "Problem")
        .def_readonly("dim", &PartitionedOde::dim)
        .def_readonly("description", &PartitionedOde::description)
        .def("__call__", [](const PartitionedOde& ode, std::vector<State> args) { return ode(args); })
        .def("diagonal", [](const PartitionedOde& ode, const State& y) { return ode.diagonal(y); });
    m.def("lotka_volterra", &lotka_volterra, py::arg("alpha"));
    m.def("burgers", &burgers, py::arg("epsilon"), py::arg("n_cells"));
    m.def("witness_ode", &witness_ode, py::arg("tree"));

    m.def(
        "step", [](const NprkTableau& t, const PartitionedOde& ode, const State& y, double h) { return step(t, ode, y, h); },
        py::arg("tableau"), py::arg("problem"), py::arg("y"), py::arg("h"));
    m.def(
        "integrate",
        [](const NprkTableau& t, const PartitionedOde& ode, const State& y0, double t_end, double h, double t0) {
            py::gil_scoped_release release;
            auto traj = integrate(t, ode, y0, t0, t_end, h);
            return std::make_pair(std::move(traj.times), std::move(traj.states));
        },
        py::arg("tableau"), py::arg("problem"), py::arg("y0"), py::arg("t_end"), py::arg("h"), py::arg("t0") = 0.0);
    m.def("embedded_diff",
          [](const NprkTableau& p, const NprkTableau& e, const PartitionedOde& ode, const State& y, double h) {
              return embedded_diff(p, e, ode, y, h);
          });

    m.def(
        "lotka_volterra_reference",
        [](double alpha, const State& y0, double t_end) { return lotka_volterra_reference(alpha, y0, t_end); },
        py::arg("alpha"), py::arg("y0"), py::arg("t_end"));
    m.def(
        "convergence_study",
        [](const NprkTableau& t, const PartitionedOde& ode, const State& y0, double t_end, const std::vector<double>& hs,
           const State& reference) {
            ConvergenceResult r;
            {
                py::gil_scoped_release release;
                r = convergence_study(t, ode, y0, t_end, hs, reference);
            }
            py::dict d;
            d["h"] = r.h_values;
            d["errors"] = r.errors;
            d["slope"] = r.slope;
            d["slope_stderr"] = r.slope_stderr;
            d["residual_stderr"] = r.residual_stderr;
            d["fitted"] = r.fitted;
            return d;
        },
        py::arg("tableau"), py::arg("problem"), py::arg("y0"), py::arg("t_end"), py::arg("h_values"), py::arg("reference"));
    m.def(
        "coupling_scan",
        [](const std::vector<double>& alphas, const std::vector<double>& hs, const State& y0) {
            std::vector<std::tuple<double, double, double>> rows;
            for (const auto& p : coupling_scan(alphas, hs, y0)) rows.emplace_back(p.alpha, p.h, p.estimate);
            return rows;
        },
        py::arg("alphas"), py::arg("h_values"), py::arg("y0") = State{1.0, 1.0});
    m.def("default_alpha_grid", &default_alpha_grid);
    m.def("witness_coefficient", &witness_coefficient, py::arg("tableau"), py::arg("tree"));
    m.def("fit_loglog", [](const std::vector<double>& h, const std::vector<double>& v) {
        const auto f = fit_loglog(h, v);
        return py::make_tuple(f.slope, f.residual_stderr);
    });

}

#include "nprk/json_io.hpp"

#include <fstream>

#include "nprk/errors.hpp"

namespace nprk {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing JSON field \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("JSON field \"") + key + "\" has the wrong type");
    }
}

RkTableau rk_from(int s, std::vector<double> a, std::vector<double> b, const std::vector<double>& c) {
    RkTableau rk;
    rk.s = s;
    rk.a = std::move(a);
    rk.b = std::move(b);
    rk.c = c;
    validate(rk);
    return rk;
}

} // namespace

Json to_json(const ColoredTree& tree) {
    return Json{{"level_seq", tree.level_seq}, {"color_seq", tree.color_seq}, {"num_colors", tree.num_colors}};
}

ColoredTree tree_from_json(const Json& j) {
    ColoredTree t{field<std::vector<int>>(j, "level_seq"), field<std::vector<int>>(j, "color_seq"),
                  field<int>(j, "num_colors")};
    validate(t);
    return t;
}

Json to_json(const NprkTableau& t) { return Json{{"M", t.M()}, {"s", t.s()}, {"a", t.a()}, {"b", t.b()}}; }

NprkTableau tableau_from_json(const Json& j) {
    std::optional<std::vector<double>> c;
    if (j.contains("c")) c = field<std::vector<double>>(j, "c");
    return NprkTableau(field<int>(j, "M"), field<int>(j, "s"), field<std::vector<double>>(j, "a"),
                       field<std::vector<double>>(j, "b"), std::move(c));
}

Json to_json(const ArkPair& pair) {
    return Json{{"s", pair.s()},           {"a1", pair.first.a},  {"b1", pair.first.b},
                {"a2", pair.second.a},     {"b2", pair.second.b}, {"c", pair.c()}};
}

ArkPair ark_pair_from_json(const Json& j) {
    const int s = field<int>(j, "s");
    const auto c = field<std::vector<double>>(j, "c");
    return make_ark_pair(rk_from(s, field<std::vector<double>>(j, "a1"), field<std::vector<double>>(j, "b1"), c),
                         rk_from(s, field<std::vector<double>>(j, "a2"), field<std::vector<double>>(j, "b2"), c));
}

BuiltinMethod method_from_json(const Json& j) {
    if (j.is_object() && j.contains("a1")) return ark_pair_from_json(j);
    return tableau_from_json(j);
}

BuiltinMethod load_method(const std::string& spec) {
    constexpr std::string_view prefix = "builtin:";
    if (spec.rfind(prefix, 0) == 0) return builtin(std::string_view(spec).substr(prefix.size()));
    std::ifstream in{std::filesystem::path(spec)};
    if (!in) throw ValidationError("cannot read tableau file " + spec);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("invalid JSON in " + spec + ": " + e.what());
    }
    return method_from_json(j);
}

NprkTableau load_tableau(const std::string& spec) {
    auto m = load_method(spec);
    if (auto* t = std::get_if<NprkTableau>(&m)) return std::move(*t);
    throw ValidationError(spec + " is an ARK pair; convert it first");
}

Json to_json(const ConditionReport& rep) {
    return Json{{"order", rep.order},       {"tree", to_json(rep.tree)},     {"weight", rep.weight},
                {"target", rep.target},     {"residual", rep.residual},      {"class", rep.cls.name()}};
}

Json to_json(const StepStats& stats) {
    return Json{{"newton_iterations", stats.newton_iterations},
                {"fixed_point_iterations", stats.fixed_point_iterations},
                {"used_fixed_point", stats.used_fixed_point},
                {"coupled", stats.coupled},
                {"residual_norm", stats.residual_norm}};
}

Json to_json(const ConvergenceResult& res) {
    Json j{{"h_values", res.h_values}, {"errors", res.errors}, {"fitted", res.fitted}};
    if (res.fitted) {
        j["slope"] = res.slope;
        j["slope_stderr"] = res.slope_stderr;
        j["residual_stderr"] = res.residual_stderr;
    }
    return j;
}

} // namespace nprk

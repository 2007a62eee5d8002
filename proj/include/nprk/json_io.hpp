#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "nprk/conditions.hpp"
#include "nprk/harness.hpp"
#include "nprk/integrator.hpp"
#include "nprk/tableau.hpp"
#include "nprk/tree.hpp"

namespace nprk {

using Json = nlohmann::ordered_json;

Json to_json(const ColoredTree& tree);
ColoredTree tree_from_json(const Json& j);

/// {"M","s","a","b"}; declared abscissae are not written.
Json to_json(const NprkTableau& t);
/// Accepts an optional "c" array as declared abscissae.
NprkTableau tableau_from_json(const Json& j);

/// {"s","a1","b1","a2","b2","c"}
Json to_json(const ArkPair& pair);
ArkPair ark_pair_from_json(const Json& j);

/// Either schema, told apart by the presence of "a1".
BuiltinMethod method_from_json(const Json& j);

/// "builtin:NAME" or a path to a JSON file.
BuiltinMethod load_method(const std::string& spec);

/// load_method() for specs that must name a tableau (an ARK pair is rejected).
NprkTableau load_tableau(const std::string& spec);

Json to_json(const ConditionReport& rep);
Json to_json(const StepStats& stats);
Json to_json(const ConvergenceResult& res);

} // namespace nprk

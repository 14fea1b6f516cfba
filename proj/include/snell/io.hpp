#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "snell/scenario.hpp"
#include "snell/snell.hpp"
#include "snell/stopping.hpp"

namespace snell {

// Tree serialization: {"times": [...], "nodes": [{"id", "parent", "p",
// "obs": {name: value}}]}. The driver outcome travels under the reserved
// observable name "driver".
nlohmann::json space_to_json(const CoupledSpace& space);
CoupledSpace space_from_json(const nlohmann::json& j);
CoupledSpace load_space(const std::string& path);
void save_space(const CoupledSpace& space, const std::string& path);

// Rule serialization: {"observable", "L", "decisions": [{"k", "atom",
// "action"}]} for pure rules, {"k", "atom", "p"} entries for randomized ones.
nlohmann::json rule_to_json(const StoppingRule& rule);
StoppingRule rule_from_json(const nlohmann::json& j);
nlohmann::json rule_to_json(const RandomizedStoppingRule& rule);
RandomizedStoppingRule randomized_rule_from_json(const nlohmann::json& j);
bool is_randomized_rule_json(const nlohmann::json& j);

// Path files: CSV with header `t,value`, one row per jump, first row t=0.
// The horizon is not part of the format; pass it explicitly (0 = use the
// last jump time).
StepPath path_from_csv(std::istream& in, double horizon);
StepPath load_path(const std::string& path, double horizon);
void path_to_csv(const StepPath& path, std::ostream& out);

nlohmann::json report_to_json(const ValueReport& report);

}  // namespace snell

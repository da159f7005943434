#pragma once

#include <string>

#include "phmbd/scenario.hpp"

namespace phmbd::testing {

inline ScenarioConfig builtin_config(const std::string& name) {
  return parse_scenario(*builtin_scenario_text(name));
}

inline BuiltSystem builtin_system(const std::string& name) { return build_system(builtin_config(name)); }

}  // namespace phmbd::testing

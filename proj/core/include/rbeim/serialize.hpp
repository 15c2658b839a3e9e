#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rbeim/eim.hpp"
#include "rbeim/rb.hpp"

namespace rbeim {

// Versioned JSON bundles; loaders reject unknown format or version.
nlohmann::json rb_state_to_json(const ReducedBasisState& state);
ReducedBasisState rb_state_from_json(const nlohmann::json& j);

nlohmann::json eim_state_to_json(const EimState& state);
EimState eim_state_from_json(const nlohmann::json& j);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

} // namespace rbeim

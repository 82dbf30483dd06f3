#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace rocq::server {

// Checks `value` against the subset of JSON Schema used by the tool input
// schemas: type, properties, required, additionalProperties (boolean), enum,
// items, minItems, minLength, minimum, allOf, anyOf. Returns the first problem.
std::optional<std::string> validate(const nlohmann::json& value, const nlohmann::json& schema,
                                    const std::string& where = "arguments");

}  // namespace rocq::server

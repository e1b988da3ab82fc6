#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace dreval {

using json = nlohmann::json;

/// Validates `value` against a JSON-Schema subset: type (object, array,
/// string, integer, number, boolean, null), properties, required,
/// additionalProperties=false, enum, items, minItems, maxItems, minimum,
/// maximum, minLength. Returns the first violation as "<pointer>: <reason>".
std::optional<std::string> validate_schema(const json& value, const json& schema);

/// Pulls the JSON object out of a model reply: tolerates surrounding prose
/// and ``` fences. Returns nullopt when no object parses.
std::optional<json> extract_json_object(std::string_view raw);

}  // namespace dreval

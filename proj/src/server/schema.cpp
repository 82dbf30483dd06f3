#include "rocq/server/schema.hpp"

namespace rocq::server {

namespace {

bool has_type(const nlohmann::json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

}  // namespace

std::optional<std::string> validate(const nlohmann::json& value, const nlohmann::json& schema, const std::string& where) {
  if (schema.contains("type") && !has_type(value, schema["type"].get<std::string>())) {
    return where + " must be of type " + schema["type"].get<std::string>();
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == value;
    if (!found) return where + " must be one of " + schema["enum"].dump();
  }
  if (value.is_string() && schema.contains("minLength") &&
      value.get<std::string>().size() < schema["minLength"].get<std::size_t>()) {
    return where + " is too short";
  }
  if (value.is_number() && schema.contains("minimum") && value.get<double>() < schema["minimum"].get<double>()) {
    return where + " must be at least " + schema["minimum"].dump();
  }
  if (value.is_array()) {
    if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>()) {
      return where + " needs at least " + schema["minItems"].dump() + " items";
    }
    if (schema.contains("items")) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (auto err = validate(value[i], schema["items"], where + "[" + std::to_string(i) + "]")) return err;
      }
    }
  }
  if (value.is_object()) {
    const auto props = schema.value("properties", nlohmann::json::object());
    for (const auto& req : schema.value("required", nlohmann::json::array())) {
      if (!value.contains(req.get<std::string>())) return where + "." + req.get<std::string>() + " is required";
    }
    for (const auto& [key, v] : value.items()) {
      if (props.contains(key)) {
        if (auto err = validate(v, props[key], where + "." + key)) return err;
      } else if (schema.contains("additionalProperties") && schema["additionalProperties"] == false) {
        return where + "." + key + " is not a known parameter";
      }
    }
  }
  for (const auto& part : schema.value("allOf", nlohmann::json::array())) {
    if (auto err = validate(value, part, where)) return err;
  }
  if (schema.contains("anyOf")) {
    std::string first;
    for (const auto& alt : schema["anyOf"]) {
      auto err = validate(value, alt, where);
      if (!err) return std::nullopt;
      if (first.empty()) first = *err;
    }
    return first;
  }
  return std::nullopt;
}

}  // namespace rocq::server

#include "dreval/schema.hpp"

#include <cmath>

namespace dreval {
namespace {

bool type_matches(const json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && std::floor(d) == d;
    }
    return false;
  }
  return false;
}

std::optional<std::string> validate_at(const json& v, const json& schema, const std::string& ptr) {
  const std::string where = ptr.empty() ? "/" : ptr;
  if (auto t = schema.find("type"); t != schema.end()) {
    bool ok = false;
    if (t->is_array()) {
      for (const auto& alt : *t) ok = ok || type_matches(v, alt.get<std::string>());
    } else {
      ok = type_matches(v, t->get<std::string>());
    }
    if (!ok) return where + ": expected type " + t->dump() + ", got " + v.type_name();
  }
  if (auto e = schema.find("enum"); e != schema.end()) {
    bool found = false;
    for (const auto& option : *e) found = found || option == v;
    if (!found) return where + ": value " + v.dump() + " not in " + e->dump();
  }
  if (v.is_number()) {
    const double d = v.get<double>();
    if (auto m = schema.find("minimum"); m != schema.end() && d < m->get<double>()) {
      return where + ": " + v.dump() + " below minimum " + m->dump();
    }
    if (auto m = schema.find("maximum"); m != schema.end() && d > m->get<double>()) {
      return where + ": " + v.dump() + " above maximum " + m->dump();
    }
  }
  if (v.is_string()) {
    if (auto m = schema.find("minLength"); m != schema.end() && v.get_ref<const std::string&>().size() < m->get<std::size_t>()) {
      return where + ": string shorter than " + m->dump();
    }
  }
  if (v.is_array()) {
    if (auto m = schema.find("minItems"); m != schema.end() && v.size() < m->get<std::size_t>()) {
      return where + ": expected at least " + m->dump() + " items, got " + std::to_string(v.size());
    }
    if (auto m = schema.find("maxItems"); m != schema.end() && v.size() > m->get<std::size_t>()) {
      return where + ": expected at most " + m->dump() + " items, got " + std::to_string(v.size());
    }
    if (auto items = schema.find("items"); items != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (auto err = validate_at(v[i], *items, ptr + "/" + std::to_string(i))) return err;
      }
    }
  }
  if (v.is_object()) {
    if (auto req = schema.find("required"); req != schema.end()) {
      for (const auto& name : *req) {
        if (!v.contains(name.get<std::string>())) return where + ": missing required field \"" + name.get<std::string>() + "\"";
      }
    }
    const auto props = schema.find("properties");
    if (props != schema.end()) {
      for (auto it = props->begin(); it != props->end(); ++it) {
        if (auto field = v.find(it.key()); field != v.end()) {
          if (auto err = validate_at(*field, it.value(), ptr + "/" + it.key())) return err;
        }
      }
    }
    if (auto extra = schema.find("additionalProperties"); extra != schema.end() && extra->is_boolean() && !extra->get<bool>()) {
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (props == schema.end() || !props->contains(it.key())) return where + ": unexpected field \"" + it.key() + "\"";
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_schema(const json& value, const json& schema) {
  return validate_at(value, schema, "");
}

std::optional<json> extract_json_object(std::string_view raw) {
  const auto first = raw.find('{');
  const auto last = raw.rfind('}');
  if (first == std::string_view::npos || last == std::string_view::npos || last < first) return std::nullopt;
  auto parsed = json::parse(raw.substr(first, last - first + 1), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  return parsed;
}

}  // namespace dreval

#pragma once

#include "morph/core.hpp"

#include <json.hpp>

#include <string>

namespace morph {

using Json = nlohmann::json;

/// Parses JSON text; syntax errors become ParseError with line and column.
Json parse_json_text(const std::string& text, const std::string& source);
Json load_json_file(const std::string& path);

/// Typed field access with a path-qualified error message.
template <typename T>
T require_field(const Json& obj, const std::string& key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError(context + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(context + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace morph

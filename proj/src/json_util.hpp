#pragma once

// Internal helpers for reading JSON documents with path-qualified errors.

#include <fmt/format.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "wfchain/error.hpp"
#include "wfchain/types.hpp"

namespace wfchain::detail {

using nlohmann::json;

inline std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}
inline std::string child(const std::string& path, std::size_t index) {
  return fmt::format("{}[{}]", path, index);
}

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(fmt::format("{}: expected an object", path.empty() ? "<root>" : path));
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ParseError(fmt::format("{}: missing required field", child(path, key)));
  return *it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: expected a number", path));
  return v.get<double>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(fmt::format("{}: expected a string", path));
  return v.get<std::string>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(fmt::format("{}: expected an array", path));
  return v;
}

inline double number_field(const json& obj, std::string_view key, const std::string& path) {
  return as_number(require(obj, key, path), child(path, key));
}

inline double number_field_or(const json& obj, std::string_view key, double fallback, const std::string& path) {
  auto it = obj.find(std::string(key));
  return it == obj.end() ? fallback : as_number(*it, child(path, key));
}

inline std::string string_field(const json& obj, std::string_view key, const std::string& path) {
  return as_string(require(obj, key, path), child(path, key));
}

inline Cia as_cia(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ParseError(fmt::format("{}: expected a [c, i, a] triple", path));
  return {as_number(v[0], child(path, 0)), as_number(v[1], child(path, 1)), as_number(v[2], child(path, 2))};
}

inline json cia_json(const Cia& v) { return json::array({v.c, v.i, v.a}); }

inline json parse_text(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: invalid JSON ({})", what, e.what()));
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path));
  out << text;
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

}  // namespace wfchain::detail

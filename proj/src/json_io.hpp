#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "knet/error.hpp"

namespace knet::detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* field, const std::string& where) {
  if (!j.is_object() || !j.contains(field)) throw SchemaError(where + field, "missing");
  return j.at(field);
}

inline std::string require_string(const nlohmann::json& j, const char* field, const std::string& where) {
  const auto& v = require(j, field, where);
  if (!v.is_string()) throw SchemaError(where + field, "expected a string");
  return v.get<std::string>();
}

inline std::int64_t require_int(const nlohmann::json& j, const char* field, const std::string& where) {
  const auto& v = require(j, field, where);
  if (!v.is_number_integer()) throw SchemaError(where + field, "expected an integer");
  return v.get<std::int64_t>();
}

inline double require_number(const nlohmann::json& j, const char* field, const std::string& where) {
  const auto& v = require(j, field, where);
  if (!v.is_number()) throw SchemaError(where + field, "expected a number");
  return v.get<double>();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("<root>", std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
}

inline void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace knet::detail

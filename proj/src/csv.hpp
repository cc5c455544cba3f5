#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/error.hpp"

namespace knet::detail {

// Shortest round-trip text for a double; integers print without a point.
inline std::string num(double x) { return nlohmann::json(x).dump(); }
inline std::string num(long long x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(long x) { return std::to_string(x); }
inline std::string num(std::size_t x) { return std::to_string(x); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : width_(header.size()) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, std::ios::binary);
    if (!out_) throw Error("cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw Error("csv row width mismatch");
    for (std::size_t k = 0; k < fields.size(); ++k) out_ << (k ? "," : "") << csv_field(fields[k]);
    out_ << '\n';
  }

 private:
  std::size_t width_;
  std::ofstream out_;
};

struct CsvTable {
  std::filesystem::path path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (header[k] == name) return k;
    }
    throw SchemaError(name, "column missing from " + path.string());
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        fields.back() += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

inline CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& required = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable t;
  t.path = path;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("<header>", "empty csv " + path.string());
  t.header = split_csv_line(line);
  for (const auto& name : required) t.column(name);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size()) {
      throw SchemaError("<row>", path.string() + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

inline double parse_number(const std::string& s, const std::string& field) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    throw SchemaError(field, "expected a number, got '" + s + "'");
  }
}

}  // namespace knet::detail

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/corpus.hpp"

namespace knet {

struct RunConfig {
  std::optional<std::filesystem::path> corpus;  // mini-corpus JSON
  std::optional<std::filesystem::path> dump;
  std::optional<std::filesystem::path> index;
  std::vector<std::string> subjects;     // empty: every subject in the corpus
  std::vector<std::string> nobel_pages;  // empty: the default laureate lists
  std::filesystem::path output_dir = "knet_out";

  std::uint64_t seed = 0;
  int jobs = 1;

  int max_dim = 2;
  bool include_h0 = true;
  double omega = 0.01;
  double gamma = 1.0;
  int q = 3;
  int horizon = 5;
  int restarts = 20;
  int n_epochs = 10;
  std::optional<Year> sim_start_year;
  Year sim_max_year = 2200;

  bool operator==(const RunConfig&) const = default;
};

/// Missing keys take their defaults; unknown keys are a SchemaError.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);

/// Throws RangeError naming the violated bound, or Error for a missing path.
void validate_config(const RunConfig& config);

/// Reads, fills defaults and validates.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace knet

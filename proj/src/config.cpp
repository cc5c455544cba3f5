#include "knet/config.hpp"

#include <set>

#include "json_io.hpp"
#include "knet/error.hpp"

namespace knet {

namespace {

const std::set<std::string> kKeys = {"corpus", "dump",    "index",          "subjects",     "nobel_pages",
                                     "output_dir", "seed", "jobs",          "max_dim",      "include_h0",
                                     "omega",  "gamma",   "q",              "horizon",      "restarts",
                                     "n_epochs", "sim_start_year", "sim_max_year"};

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(key, e.what());
  }
}

void read_path(const nlohmann::json& j, const char* key, std::optional<std::filesystem::path>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  if (!j.at(key).is_string()) throw SchemaError(key, "expected a path string");
  out = j.at(key).get<std::string>();
}

void check(bool ok, const std::string& what) {
  if (!ok) throw RangeError(what);
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("<root>", "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw SchemaError(key, "unknown config key");
  }
  RunConfig c;
  read_path(j, "corpus", c.corpus);
  read_path(j, "dump", c.dump);
  read_path(j, "index", c.index);
  read(j, "subjects", c.subjects);
  read(j, "nobel_pages", c.nobel_pages);
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw SchemaError("output_dir", "expected a path string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("seed") && !j.at("seed").is_number_unsigned()) {
    throw SchemaError("seed", "expected a non-negative integer");
  }
  read(j, "seed", c.seed);
  read(j, "jobs", c.jobs);
  read(j, "max_dim", c.max_dim);
  read(j, "include_h0", c.include_h0);
  read(j, "omega", c.omega);
  read(j, "gamma", c.gamma);
  read(j, "q", c.q);
  read(j, "horizon", c.horizon);
  read(j, "restarts", c.restarts);
  read(j, "n_epochs", c.n_epochs);
  if (j.contains("sim_start_year") && !j.at("sim_start_year").is_null()) {
    Year y = 0;
    read(j, "sim_start_year", y);
    c.sim_start_year = y;
  }
  read(j, "sim_max_year", c.sim_max_year);
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  auto path = [](const std::optional<std::filesystem::path>& p) {
    return p ? nlohmann::json(p->generic_string()) : nlohmann::json(nullptr);
  };
  return {{"corpus", path(c.corpus)},
          {"dump", path(c.dump)},
          {"index", path(c.index)},
          {"subjects", c.subjects},
          {"nobel_pages", c.nobel_pages},
          {"output_dir", c.output_dir.generic_string()},
          {"seed", c.seed},
          {"jobs", c.jobs},
          {"max_dim", c.max_dim},
          {"include_h0", c.include_h0},
          {"omega", c.omega},
          {"gamma", c.gamma},
          {"q", c.q},
          {"horizon", c.horizon},
          {"restarts", c.restarts},
          {"n_epochs", c.n_epochs},
          {"sim_start_year", c.sim_start_year ? nlohmann::json(*c.sim_start_year) : nlohmann::json(nullptr)},
          {"sim_max_year", c.sim_max_year}};
}

void validate_config(const RunConfig& c) {
  check(c.omega > 0.0, "omega must be > 0");
  check(c.gamma > 0.0, "gamma must be > 0");
  check(c.q >= 1, "q must be >= 1");
  check(c.horizon >= 0, "horizon must be >= 0");
  check(c.restarts >= 1, "restarts must be >= 1");
  check(c.n_epochs >= 1, "n_epochs must be >= 1");
  check(c.max_dim >= 0 && c.max_dim <= 5, "max_dim must be in [0, 5]");
  check(c.jobs >= 1, "jobs must be >= 1");
  if (c.sim_start_year) check(*c.sim_start_year < c.sim_max_year, "sim_start_year must be < sim_max_year");
  check(c.dump.has_value() == c.index.has_value(), "dump and index must be given together");
  for (const auto* p : {&c.corpus, &c.dump, &c.index}) {
    if (*p && !std::filesystem::exists(**p)) throw Error("path does not exist: " + (*p)->string());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  auto c = config_from_json(detail::read_json_file(path));
  validate_config(c);
  return c;
}

}  // namespace knet

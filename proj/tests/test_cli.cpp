#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

#include "doctest.h"
#include "knet/config.hpp"
#include "knet/error.hpp"
#include "knet/network.hpp"
#include "knet/rng.hpp"
#include "pipeline.hpp"

using namespace knet;
using namespace knet::testing;
using nlohmann::json;

namespace {

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') {
        quoted = !quoted;
      } else if (c == ',' && !quoted) {
        row.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string hex(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex << x;
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"build", "--no-such-flag"}).code == 2);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"--help"}).code == 0);
  TempDir dir("usage");
  CHECK(run_cli({"simulate", "--out", dir.path().string()}).code == 2);  // needs --start-year
}

TEST_CASE("config defaults, ranges and echo") {
  const RunConfig empty = config_from_json(json::object());
  CHECK(empty == RunConfig{});
  CHECK(empty.omega == 0.01);
  CHECK(empty.q == 3);
  CHECK(empty.horizon == 5);
  CHECK(empty.restarts == 20);
  CHECK(empty.max_dim == 2);

  RunConfig bad;
  bad.omega = -1;
  try {
    validate_config(bad);
    FAIL("expected a range error");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("> 0") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json(json{{"omgea", 0.1}}), SchemaError);

  RunConfig c;
  c.omega = 0.02;
  c.subjects = {"biophysics"};
  c.sim_start_year = 1700;
  c.seed = 99;
  c.corpus = "x/y.json";
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json(json::parse(config_to_json(c).dump())) == c);

  TempDir dir("config");
  write_text(dir / "neg.json", R"({"omega": -1})");
  const auto r = run_cli({"build", "--config", (dir / "neg.json").string(), "--out", dir.path().string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("omega must be > 0") != std::string::npos);

  write_text(dir / "typo.json", R"({"omgea": 0.1})");
  const auto s = run_cli({"build", "--config", (dir / "typo.json").string(), "--out", dir.path().string()});
  CHECK(s.code == 1);
  CHECK(s.err.find("omgea") != std::string::npos);
}

TEST_CASE("config echo is written and re-readable") {
  TempDir dir("echo");
  REQUIRE(run_cli({"ingest", "--corpus", mini_corpus_path().string(), "--out", dir.path().string(), "--seed", "7"})
              .code == 0);
  const auto echoed = load_config(dir / "config/ingest.json");
  CHECK(echoed.seed == 7);
  CHECK(echoed.corpus.has_value());
  CHECK(config_to_json(echoed) == json::parse(slurp(dir / "config/ingest.json")));
}

TEST_CASE("schema mismatch names the field") {
  TempDir dir("schema");
  write_text(dir / "c.json", R"({"articles": [{"lead": "x", "links": []}], "subjects": {}, "nobel": []})");
  const auto r = run_cli({"ingest", "--corpus", (dir / "c.json").string(), "--out", dir.path().string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("title") != std::string::npos);
}

TEST_CASE("homology on a 4-cycle writes one H1 row") {
  ConceptNetwork net;
  net.subject = "square";
  for (int k = 0; k < 4; ++k) net.nodes.push_back({k, "n" + std::to_string(k), 1901 + k, Provenance::parsed, {}});
  net.edges = {{0, 1, 0.5}, {0, 3, 0.5}, {1, 2, 0.5}, {2, 3, 0.5}};
  TempDir dir("square");
  write_network(net, dir / "square.json");
  const auto r = run_cli({"homology", "--network", (dir / "square.json").string(), "--max-dim", "2", "--out",
                          dir.path().string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto rows = read_rows(dir / "barcodes.csv");
  REQUIRE(!rows.empty());
  CHECK(rows[0] == std::vector<std::string>{"subject", "dim", "birth_year", "death_year", "birth_simplex",
                                            "death_simplex"});
  int h1 = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k][1] != "1") continue;
    ++h1;
    CHECK(rows[k][2] == "1904");
    CHECK(rows[k][3] == "inf");
  }
  CHECK(h1 == 1);
}

TEST_CASE("report refuses to run without upstream artifacts") {
  TempDir dir("report");
  const auto r = run_cli({"report", "--out", dir.path().string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("knet ") != std::string::npos);
  CHECK(!std::filesystem::exists(dir / "report.json"));
}

TEST_CASE("build restricted to one subject") {
  TempDir dir("one");
  const auto r = run_cli({"build", "--corpus", mini_corpus_path().string(), "--subject", "biophysics", "--out",
                          dir.path().string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::set<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir / "networks")) files.insert(e.path().filename());
  CHECK(files == std::set<std::string>{"biophysics.json"});
  const auto net = read_network(dir / "networks/biophysics.json");
  CHECK(net.size() == 21);
  net.validate();
}

TEST_CASE("mini-corpus pipeline outputs") {
  TempDir dir("pipeline");
  const auto failed = run_pipeline(dir.path());
  REQUIRE_MESSAGE(failed.empty(), failed);

  const json corpus = json::parse(slurp(mini_corpus_path()));
  std::set<std::string> titles;
  for (const auto& [name, members] : corpus["subjects"].items()) {
    for (const auto& t : members) titles.insert(t.get<std::string>());
  }
  const json influence = json::parse(slurp(dir / "influence.json"));
  CHECK(influence["nodes"].get<std::size_t>() == titles.size());
  CHECK(influence["lambda_max"].get<double>() > 0.0);

  const json temporal = json::parse(slurp(dir / "temporal.json"));
  for (const auto& [name, members] : corpus["subjects"].items()) {
    const auto net = read_network(dir / ("networks/" + subject_slug(name) + ".json"));
    std::set<Year> years;
    for (const auto& n : net.nodes) years.insert(n.year);
    CHECK(temporal["subjects"][name]["layers"].get<std::size_t>() == years.size());
  }

  std::map<std::string, int> epochs;
  const auto sig = read_rows(dir / "signature.csv");
  CHECK(sig[0] == std::vector<std::string>{"epoch", "mean_change", "duration", "subject"});
  for (std::size_t k = 1; k < sig.size(); ++k) ++epochs[sig[k][3]];
  CHECK(epochs.size() == 4);
  for (const auto& [subject, count] : epochs) CHECK_MESSAGE(count == 4, subject);

  for (const auto& e : std::filesystem::directory_iterator(dir / "figures")) {
    if (e.path().filename().string().rfind("barcode_", 0) != 0) continue;
    CHECK(read_rows(e.path())[0] == std::vector<std::string>{"dim", "birth", "death"});
  }

  // Golden digests; regenerate with KNET_UPDATE_GOLDEN=1.
  const std::vector<std::string> tracked = {
      "corpus.json",    "networks/biophysics.json", "networks/boolean_algebra.json",
      "networks/evolutionary_biology.json",         "metrics.csv",
      "barcodes.csv",   "membership.csv",           "signature.csv",
      "influence.csv",  "report.json"};
  json digests = json::object();
  for (const auto& rel : tracked) digests[rel] = hex(fnv1a(slurp(dir / rel)));
  const auto golden = std::filesystem::path(KNET_SOURCE_DIR) / "tests/golden/mini_corpus_digests.json";
  if (std::getenv("KNET_UPDATE_GOLDEN")) std::ofstream(golden) << digests.dump(2) << '\n';
  REQUIRE(std::filesystem::exists(golden));
  const json expected = json::parse(slurp(golden));
  for (const auto& rel : tracked) CHECK_MESSAGE(digests[rel] == expected[rel], rel);
}

#include "knet/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "json_io.hpp"
#include "knet/config.hpp"
#include "knet/corpus.hpp"
#include "knet/dump.hpp"
#include "knet/error.hpp"
#include "knet/genetic.hpp"
#include "knet/homology.hpp"
#include "knet/influence.hpp"
#include "knet/network.hpp"
#include "knet/null_models.hpp"
#include "knet/rng.hpp"
#include "knet/stats.hpp"
#include "knet/structure.hpp"
#include "knet/temporal.hpp"

namespace knet::cli {

namespace fs = std::filesystem;
using detail::CsvWriter;
using detail::num;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::mutex log_mutex;

void log(const std::string& msg) {
  std::lock_guard lock(log_mutex);
  std::cerr << "knet: " << msg << '\n';
}

// Runs fn(0..n-1) on up to `jobs` threads; results keep index order.
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < n;) {
      try {
        slots[k] = fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? sep : "") + parts[k];
  return out;
}

json test_json(const std::optional<stats::TestResult>& t) {
  if (!t) return nullptr;
  return {{"statistic", t->statistic}, {"p", t->p}, {"n_x", t->n_x}, {"n_y", t->n_y}, {"method", t->method}};
}

// Options shared by every subcommand, applied over the config file.
struct Overrides {
  std::string config_file;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::vector<std::string> subjects;
  std::vector<std::string> networks;
  std::optional<std::string> corpus;
  std::optional<std::string> dump;
  std::optional<std::string> index;
  std::vector<std::string> nobel_pages;
  std::optional<int> max_dim;
  bool no_h0 = false;
  std::optional<double> omega;
  std::optional<double> gamma;
  std::optional<int> q;
  std::optional<int> horizon;
  std::optional<int> restarts;
  std::optional<int> n_epochs;
  std::optional<Year> start_year;
  std::optional<Year> max_year;
};

struct Context {
  std::string command;
  RunConfig config;
  std::vector<fs::path> network_files;  // explicit --network inputs

  fs::path out(const fs::path& rel) const { return config.output_dir / rel; }
  std::uint64_t seed(const std::string& stream) const { return derive_seed(config.seed, stream); }
};

Context make_context(const std::string& command, const Overrides& o) {
  Context ctx;
  ctx.command = command;
  if (!o.config_file.empty()) ctx.config = config_from_json(detail::read_json_file(o.config_file));
  auto& c = ctx.config;
  if (o.out) c.output_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  if (!o.subjects.empty()) c.subjects = o.subjects;
  if (o.corpus) c.corpus = *o.corpus;
  if (o.dump) c.dump = *o.dump;
  if (o.index) c.index = *o.index;
  if (!o.nobel_pages.empty()) c.nobel_pages = o.nobel_pages;
  if (o.max_dim) c.max_dim = *o.max_dim;
  if (o.no_h0) c.include_h0 = false;
  if (o.omega) c.omega = *o.omega;
  if (o.gamma) c.gamma = *o.gamma;
  if (o.q) c.q = *o.q;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.restarts) c.restarts = *o.restarts;
  if (o.n_epochs) c.n_epochs = *o.n_epochs;
  if (o.start_year) c.sim_start_year = *o.start_year;
  if (o.max_year) c.sim_max_year = *o.max_year;
  validate_config(c);
  for (const auto& n : o.networks) {
    if (!fs::exists(n)) throw Error("network file does not exist: " + n);
    ctx.network_files.emplace_back(n);
  }
  detail::write_json_file(config_to_json(c), ctx.out(fs::path("config") / (command + ".json")));
  return ctx;
}

fs::path require_artifact(const Context& ctx, const fs::path& rel, const std::string& producer) {
  const auto p = ctx.out(rel);
  if (!fs::exists(p)) {
    throw Error("missing artifact " + p.generic_string() + "; run `knet " + producer + "` first");
  }
  return p;
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() == ".json" && p.stem().extension().empty()) files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool wanted(const Context& ctx, const std::string& subject) {
  const auto& s = ctx.config.subjects;
  return s.empty() || std::find(s.begin(), s.end(), subject) != s.end();
}

std::vector<ConceptNetwork> load_networks(const Context& ctx, const std::vector<fs::path>& files) {
  std::vector<ConceptNetwork> nets;
  for (const auto& f : files) {
    auto net = read_network(f);
    if (wanted(ctx, net.subject)) nets.push_back(std::move(net));
  }
  return nets;
}

// Real subject networks: explicit --network files, else the build output.
std::vector<ConceptNetwork> real_networks(const Context& ctx) {
  std::vector<fs::path> files = ctx.network_files;
  if (files.empty()) {
    files = json_files(require_artifact(ctx, "networks", "build"));
    if (files.empty()) throw Error("no networks under " + ctx.out("networks").generic_string() + "; run `knet build` first");
  }
  auto nets = load_networks(ctx, files);
  if (nets.empty()) throw Error("no network matches the requested subjects");
  return nets;
}

// Optional comparator networks (null models, simulations) in a sub-directory.
std::vector<ConceptNetwork> optional_networks(const Context& ctx, const fs::path& rel) {
  if (!ctx.network_files.empty()) return {};
  return load_networks(ctx, json_files(ctx.out(rel)));
}

Corpus load_corpus(const Context& ctx) {
  if (ctx.config.corpus) return read_corpus(*ctx.config.corpus);
  return read_corpus(require_artifact(ctx, "corpus.json", "ingest"));
}

// ---- subcommands -----------------------------------------------------------

void cmd_ingest(const Context& ctx) {
  const auto& c = ctx.config;
  Corpus corpus;
  if (c.corpus) {
    corpus = read_corpus(*c.corpus);
  } else if (c.dump) {
    if (c.subjects.empty()) throw UsageError("ingest from a dump needs at least one --subject");
    DumpIngestRequest request{*c.dump, *c.index, c.subjects,
                              c.nobel_pages.empty() ? default_nobel_pages() : c.nobel_pages};
    corpus = ingest_dump(request);
  } else {
    throw UsageError("ingest needs --corpus or --dump with --index");
  }
  write_corpus(corpus, ctx.out("corpus.json"));
  log("ingested " + std::to_string(corpus.articles.size()) + " articles, " + std::to_string(corpus.subjects.size()) +
      " subjects, " + std::to_string(corpus.nobel.prize_titles.size()) + " prize titles");
}

void cmd_build(const Context& ctx) {
  const auto corpus = load_corpus(ctx);
  std::vector<const SubjectIndex*> subjects;
  for (const auto& name : ctx.config.subjects) {
    const auto it = corpus.subjects.find(name);
    if (it == corpus.subjects.end()) throw Error("subject '" + name + "' is not in the corpus");
  }
  for (const auto& [name, index] : corpus.subjects) {
    if (wanted(ctx, name)) subjects.push_back(&index);
  }
  const auto model = corpus_tfidf(corpus);
  const auto nets = parallel_map<ConceptNetwork>(subjects.size(), ctx.config.jobs,
                                                 [&](std::size_t k) { return build_network(*subjects[k], corpus, model); });
  for (const auto& net : nets) {
    write_network(net, ctx.out(fs::path("networks") / (subject_slug(net.subject) + ".json")));
    log("built '" + net.subject + "': " + std::to_string(net.nodes.size()) + " nodes, " +
        std::to_string(net.edges.size()) + " edges");
  }
}

struct MetricsResult {
  SubjectMetrics metrics;
  LeadLagReport all;
  LeadLagReport modules;
  std::vector<EpochLeadLag> epochs;
};

void write_test_row(CsvWriter& w, const std::string& subject, const std::string& scope, const std::string& cut,
                    const LeadLagReport& r) {
  const auto& s = r.summary;
  w.row({subject, scope, cut, num(r.edges.size()), s ? num(s->mean) : "", s ? num(s->sd) : "",
         r.test ? num(r.test->statistic) : "", r.test ? num(r.test->p) : ""});
}

void cmd_metrics(const Context& ctx) {
  const auto nets = real_networks(ctx);
  const auto& c = ctx.config;
  const auto results = parallel_map<MetricsResult>(nets.size(), c.jobs, [&](std::size_t k) {
    const auto& net = nets[k];
    const auto seed = ctx.seed("metrics/" + net.subject);
    MetricsResult r;
    r.metrics = subject_metrics(net, seed, c.restarts);
    r.all = lead_lag(net, core_periphery(net, seed, c.restarts));
    r.modules = lead_lag_per_module(net, ctx.seed("modules/" + net.subject), c.restarts);
    r.epochs = epoch_lead_lag(net, c.n_epochs, ctx.seed("epochs/" + net.subject), c.restarts);
    return r;
  });

  CsvWriter metrics(ctx.out("metrics.csv"), {"subject", "N", "edges", "clustering_mean", "clustering_sd", "modularity",
                                             "modules", "rho", "rho_norm", "core_size"});
  CsvWriter edges(ctx.out("lead_lag.csv"), {"subject", "core_title", "periph_title", "delta"});
  CsvWriter module_edges(ctx.out("lead_lag_modules.csv"), {"subject", "module", "core_title", "periph_title", "delta"});
  CsvWriter tests(ctx.out("lead_lag_tests.csv"), {"subject", "scope", "cut_year", "n", "mean", "sd", "t", "p"});
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto& net = nets[k];
    const auto& r = results[k];
    const auto& m = r.metrics;
    metrics.row({net.subject, num(m.nodes), num(m.edges), num(m.clustering_mean), num(m.clustering_sd),
                 num(m.modularity), num(m.modules), num(m.rho), num(m.rho_norm), num(m.core_size)});
    for (const auto& e : r.all.edges) {
      edges.row({net.subject, net.nodes[e.core].title, net.nodes[e.periphery].title, num(e.delta)});
    }
    for (const auto& e : r.modules.edges) {
      module_edges.row(
          {net.subject, num(e.module), net.nodes[e.core].title, net.nodes[e.periphery].title, num(e.delta)});
    }
    write_test_row(tests, net.subject, "all", "", r.all);
    write_test_row(tests, net.subject, "modules", "", r.modules);
    for (const auto& e : r.epochs) write_test_row(tests, net.subject, "epoch", num(e.cut), e.report);
    log("metrics for '" + net.subject + "': Q " + num(m.modularity) + ", rho_norm " + num(m.rho_norm));
  }
}

void write_null(const Context& ctx, const std::string& kind,
                const std::function<ConceptNetwork(const ConceptNetwork&, std::uint64_t)>& make) {
  const auto nets = real_networks(ctx);
  const auto nulls = parallel_map<ConceptNetwork>(nets.size(), ctx.config.jobs, [&](std::size_t k) {
    return make(nets[k], ctx.seed(kind + "/" + nets[k].subject));
  });
  for (const auto& net : nulls) {
    write_network(net, ctx.out(fs::path("null") / kind / (subject_slug(net.subject) + ".json")));
  }
  log("wrote " + std::to_string(nulls.size()) + " " + kind + " networks");
}

void cmd_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  if (!c.sim_start_year) throw UsageError("simulate needs --start-year (no default start year is assumed)");
  const auto nets = real_networks(ctx);
  struct Run {
    MutationParams params;
    SimTrace trace;
  };
  const auto runs = parallel_map<Run>(nets.size(), c.jobs, [&](std::size_t k) {
    Run r;
    r.params = estimate_params(nets[k], ctx.seed("calibrate/" + nets[k].subject));
    SimulationOptions options;
    options.start_year = *c.sim_start_year;
    options.max_year = c.sim_max_year;
    r.trace = run_simulation(nets[k], r.params, ctx.seed("simulate/" + nets[k].subject), options);
    return r;
  });
  json summary = json::object();
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto& net = nets[k];
    const auto& [params, trace] = runs[k];
    const auto slug = subject_slug(net.subject);
    detail::write_json_file(trace_to_json(trace), ctx.out(fs::path("simulated") / (slug + ".json")));
    detail::write_json_file(params_to_json(params), ctx.out(fs::path("simulated") / (slug + ".params.json")));

    auto in_degrees = [](const ConceptNetwork& n) {
      std::vector<double> d(n.nodes.size(), 0.0);
      for (const auto& e : n.edges) d[e.target] += 1.0;
      return d;
    };
    json entry = {{"real_nodes", net.nodes.size()},
                  {"simulated_nodes", trace.network.nodes.size()},
                  {"births", trace.birth_similarity.size()},
                  {"unconnected_births", trace.unconnected_births},
                  {"start_year", trace.start_year},
                  {"end_year", trace.end_year},
                  {"sim_mean", params.sim_mean},
                  {"birth_similarity_mean",
                   trace.birth_similarity.empty() ? json(nullptr) : json(stats::mean(trace.birth_similarity))},
                  {"in_degree_ks", test_json(stats::ks_two_sample(in_degrees(net), in_degrees(trace.network)))}};
    summary[net.subject] = entry;
    log("simulated '" + net.subject + "': " + std::to_string(trace.network.nodes.size()) + " nodes by year " +
        std::to_string(trace.end_year) + ", " + std::to_string(trace.unconnected_births) + " unconnected births");
  }
  detail::write_json_file(summary, ctx.out("simulate.json"));
}

std::string simplex_titles(const ConceptNetwork& net, const std::vector<int>& vertices) {
  std::vector<std::string> titles;
  for (int v : vertices) titles.push_back(net.nodes[v].title);
  return join(titles, ";");
}

GapSample barcode_sample(const Context& ctx, const std::string& name, const std::vector<ConceptNetwork>& nets,
                         const fs::path& csv, std::vector<std::vector<PersistencePair>>* keep = nullptr) {
  HomologyOptions options;
  options.max_dim = ctx.config.max_dim;
  options.include_h0 = ctx.config.include_h0;
  const auto all = parallel_map<std::vector<PersistencePair>>(
      nets.size(), ctx.config.jobs, [&](std::size_t k) { return persistent_homology(nets[k], options); });
  CsvWriter w(csv, {"subject", "dim", "birth_year", "death_year", "birth_simplex", "death_simplex"});
  GapSample sample;
  sample.name = name;
  for (std::size_t k = 0; k < nets.size(); ++k) {
    for (const auto& p : all[k]) {
      w.row({nets[k].subject, num(p.dim), num(p.birth), p.death ? num(*p.death) : "inf",
             simplex_titles(nets[k], p.birth_simplex), p.alive() ? "" : simplex_titles(nets[k], p.death_simplex)});
    }
    const auto life = lifetime_distributions(all[k]);
    sample.dead_lifetimes.insert(sample.dead_lifetimes.end(), life.dead_lifetimes.begin(), life.dead_lifetimes.end());
    sample.alive_counts.push_back(life.alive);
  }
  if (keep) *keep = all;
  return sample;
}

void cmd_homology(const Context& ctx) {
  const auto nets = real_networks(ctx);
  std::vector<std::vector<PersistencePair>> pairs;
  const auto real = barcode_sample(ctx, "real", nets, ctx.out("barcodes.csv"), &pairs);

  CsvWriter part(ctx.out("participation.csv"), {"subject", "title", "birth_count", "death_count"});
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const auto counts = participation(pairs[k], static_cast<int>(nets[k].nodes.size()));
    for (const auto& n : nets[k].nodes) {
      part.row({nets[k].subject, n.title, num(counts.birth[n.id]), num(counts.death[n.id])});
    }
  }

  std::vector<GapSample> others;
  json missing = json::array();
  for (const auto& [name, rel] : std::vector<std::pair<std::string, fs::path>>{
           {"simulated", "simulated"}, {"rewired", fs::path("null") / "rewired"}}) {
    const auto comparators = optional_networks(ctx, rel);
    if (comparators.empty()) {
      missing.push_back(name);
      log("no " + name + " networks found; skipping that comparison");
      continue;
    }
    others.push_back(barcode_sample(ctx, name, comparators, ctx.out("barcodes_" + name + ".csv")));
  }
  const auto comparisons = compare_gap_statistics(real, others);

  json samples = json::object();
  auto describe = [](const GapSample& s) {
    long alive = 0;
    for (double a : s.alive_counts) alive += std::lround(a);
    return json{{"dead", s.dead_lifetimes.size()},
                {"alive_total", alive},
                {"mean_lifetime", s.dead_lifetimes.empty() ? json(nullptr) : json(stats::mean(s.dead_lifetimes))}};
  };
  samples["real"] = describe(real);
  for (const auto& s : others) samples[s.name] = describe(s);
  json cmp = json::array();
  for (const auto& g : comparisons) {
    cmp.push_back({{"name", g.name}, {"lifetimes", test_json(g.lifetimes)}, {"alive", test_json(g.alive)}});
  }
  detail::write_json_file({{"max_dim", ctx.config.max_dim},
                           {"include_h0", ctx.config.include_h0},
                           {"samples", samples},
                           {"comparisons", cmp},
                           {"missing", missing}},
                          ctx.out("gaps.json"));
  log("homology: " + std::to_string(real.dead_lifetimes.size()) + " dead and " +
      std::to_string(samples["real"]["alive_total"].get<long>()) + " alive cavities in " +
      std::to_string(nets.size()) + " subjects");
}

void write_signature(const fs::path& path, const Signature& sig) {
  CsvWriter w(path, {"epoch", "mean_change", "duration", "subject"});
  for (std::size_t s = 0; s < sig.subjects.size(); ++s) {
    for (std::size_t k = 0; k < sig.per_subject[s].size(); ++k) {
      const auto& e = sig.per_subject[s][k];
      w.row({num(k + 1), num(e.mean_change), num(e.duration), sig.subjects[s]});
    }
  }
  for (std::size_t k = 0; k < sig.average.size(); ++k) {
    w.row({num(k + 1), num(sig.average[k].mean_change), num(sig.average[k].duration), "AVERAGE"});
  }
}

std::vector<MembershipTrace> traces_for(const Context& ctx, const std::vector<ConceptNetwork>& nets,
                                        const std::string& stream) {
  TemporalOptions options{ctx.config.omega, ctx.config.gamma, ctx.config.q, ctx.config.restarts};
  return parallel_map<MembershipTrace>(nets.size(), ctx.config.jobs, [&](std::size_t k) {
    return temporal_trace(nets[k], options, ctx.seed(stream + "/" + nets[k].subject));
  });
}

std::size_t epoch_of(const MembershipTrace& t, std::size_t layer) {
  const auto& cps = t.changepoints.indices;
  return static_cast<std::size_t>(std::upper_bound(cps.begin(), cps.end(), layer) - cps.begin()) + 1;
}

void cmd_temporal(const Context& ctx) {
  const auto nets = real_networks(ctx);
  const auto traces = traces_for(ctx, nets, "temporal");

  CsvWriter members(ctx.out("membership.csv"), {"subject", "title", "year", "module"});
  CsvWriter changes(ctx.out("changes.csv"), {"subject", "year", "count", "epoch"});
  json detail_json = json::object();
  for (const auto& t : traces) {
    for (std::size_t s = 0; s < t.labels.size(); ++s) {
      for (std::size_t i = 0; i < t.titles.size(); ++i) {
        if (t.labels[s][i] >= 0) members.row({t.subject, t.titles[i], num(t.years[s]), num(t.labels[s][i])});
      }
      changes.row({t.subject, num(t.years[s]), num(t.changes[s]), num(epoch_of(t, s))});
    }
    json cps = json::array();
    for (std::size_t c : t.changepoints.indices) cps.push_back(t.years[c]);
    detail_json[t.subject] = {{"layers", t.years.size()},
                              {"quality", t.quality},
                              {"changepoint_years", cps},
                              {"log_likelihood", t.changepoints.log_likelihood}};
  }
  write_signature(ctx.out("signature.csv"), epoch_signature(traces));

  for (const auto& kind : {"rewired", "jittered"}) {
    const auto nulls = optional_networks(ctx, fs::path("null") / kind);
    if (nulls.empty()) continue;
    const auto null_traces = traces_for(ctx, nulls, std::string("temporal/") + kind);
    write_signature(ctx.out(std::string("signature_") + kind + ".csv"), epoch_signature(null_traces));
  }
  detail::write_json_file({{"omega", ctx.config.omega}, {"gamma", ctx.config.gamma}, {"q", ctx.config.q},
                           {"subjects", detail_json}},
                          ctx.out("temporal.json"));
  log("temporal: " + std::to_string(traces.size()) + " subjects");
}

json cdf_json(const stats::CdfDifference& d) {
  json points = json::array();
  for (std::size_t k = 0; k < d.support.size(); ++k) points.push_back({d.support[k], d.difference[k]});
  return points;
}

void cmd_influence(const Context& ctx) {
  const auto nets = real_networks(ctx);
  const auto corpus = load_corpus(ctx);
  const auto u = build_union(nets);
  for (const auto& w : u.warnings) log("union: " + w);

  const auto table = detail::read_csv(require_artifact(ctx, "participation.csv", "homology"),
                                      {"subject", "title", "birth_count", "death_count"});
  ParticipationCounts counts;
  counts.birth.assign(u.network.nodes.size(), 0);
  counts.death.assign(u.network.nodes.size(), 0);
  std::set<std::string> subjects;
  for (const auto& n : nets) subjects.insert(n.subject);
  const auto cs = table.column("subject"), ct = table.column("title");
  const auto cb = table.column("birth_count"), cd = table.column("death_count");
  for (const auto& row : table.rows) {
    if (!subjects.count(row[cs])) continue;
    const int v = u.network.find(row[ct]);
    if (v < 0) throw SchemaError("title", "participation row '" + row[ct] + "' is not a node of the union network");
    counts.birth[v] += static_cast<int>(detail::parse_number(row[cb], "birth_count"));
    counts.death[v] += static_cast<int>(detail::parse_number(row[cd], "death_count"));
  }

  const auto scores = influence_scores(u.network, ctx.config.horizon);
  const auto correlations = correlate_participation(scores, counts);
  const auto nobel = nobel_comparison(u.network, counts, corpus.nobel);
  for (const auto& t : nobel.unmatched) log("prize title '" + t + "' is not a node of the union network");

  CsvWriter w(ctx.out("influence.csv"), {"title", "score", "birth_count", "death_count", "is_nobel"});
  for (const auto& n : u.network.nodes) {
    w.row({n.title, num(scores.score()(n.id)), num(counts.birth[n.id]), num(counts.death[n.id]),
           corpus.nobel.prize_titles.count(n.title) ? "1" : "0"});
  }
  json corr = json::array();
  for (const auto& c : correlations) {
    corr.push_back({{"horizon", c.horizon}, {"birth", test_json(c.birth)}, {"death", test_json(c.death)}});
  }
  detail::write_json_file({{"nodes", u.network.nodes.size()},
                           {"edges", u.network.edges.size()},
                           {"lambda_max", scores.lambda_max},
                           {"horizon", scores.horizon()},
                           {"correlations", corr},
                           {"nobel",
                            {{"nobel_nodes", nobel.nobel_nodes},
                             {"other_nodes", nobel.other_nodes},
                             {"unmatched", nobel.unmatched},
                             {"birth", test_json(nobel.birth)},
                             {"death", test_json(nobel.death)},
                             {"birth_delta_cf", cdf_json(nobel.birth_cdf)},
                             {"death_delta_cf", cdf_json(nobel.death_cdf)}}}},
                          ctx.out("influence.json"));
  log("influence: " + std::to_string(u.network.nodes.size()) + " union nodes, lambda_max " + num(scores.lambda_max));
}

// ---- report ------------------------------------------------------------------

std::string hex_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a(ss.str());
  return out.str();
}

void cmd_report(const Context& ctx) {
  const std::vector<std::pair<std::string, std::string>> required = {
      {"metrics.csv", "metrics"},       {"lead_lag.csv", "metrics"},   {"lead_lag_tests.csv", "metrics"},
      {"barcodes.csv", "homology"},     {"gaps.json", "homology"},     {"participation.csv", "homology"},
      {"changes.csv", "temporal"},      {"signature.csv", "temporal"}, {"influence.csv", "influence"},
      {"influence.json", "influence"}};
  for (const auto& [file, producer] : required) require_artifact(ctx, file, producer);
  const fs::path fig = ctx.out("figures");
  json report = json::object();

  // Structural metrics per subject.
  const auto metrics = detail::read_csv(ctx.out("metrics.csv"),
                                        {"subject", "N", "clustering_mean", "clustering_sd", "modularity", "rho_norm"});
  {
    CsvWriter w(fig / "structure.csv", {"subject", "N", "clustering_mean", "clustering_sd", "modularity", "rho_norm"});
    json rows = json::array();
    for (const auto& r : metrics.rows) {
      std::vector<std::string> f;
      json entry;
      for (const auto* name : {"subject", "N", "clustering_mean", "clustering_sd", "modularity", "rho_norm"}) {
        f.push_back(r[metrics.column(name)]);
        entry[name] = std::string(name) == "subject" ? json(f.back()) : json(detail::parse_number(f.back(), name));
      }
      w.row(f);
      rows.push_back(entry);
    }
    report["structure"] = rows;
  }

  // Lead-lag deltas and the per-subject t-tests.
  {
    const auto ll = detail::read_csv(ctx.out("lead_lag.csv"), {"subject", "delta"});
    CsvWriter w(fig / "lead_lag_deltas.csv", {"subject", "delta"});
    for (const auto& r : ll.rows) w.row({r[ll.column("subject")], r[ll.column("delta")]});
    const auto tests = detail::read_csv(ctx.out("lead_lag_tests.csv"), {"subject", "scope", "n", "mean", "t", "p"});
    json rows = json::array();
    for (const auto& r : tests.rows) {
      if (r[tests.column("scope")] != "all") continue;
      auto value = [&](const char* name) {
        const auto& s = r[tests.column(name)];
        return s.empty() ? json(nullptr) : json(detail::parse_number(s, name));
      };
      rows.push_back({{"subject", r[tests.column("subject")]},
                      {"n", value("n")},
                      {"mean_delta", value("mean")},
                      {"t", value("t")},
                      {"p", value("p")}});
    }
    report["lead_lag"] = rows;
  }

  // Barcodes, lifetime and alive-count comparisons.
  {
    const auto bars = detail::read_csv(ctx.out("barcodes.csv"), {"subject", "dim", "birth_year", "death_year"});
    std::map<std::string, std::vector<const std::vector<std::string>*>> by_subject;
    for (const auto& r : bars.rows) by_subject[r[bars.column("subject")]].push_back(&r);
    for (const auto& [subject, rows] : by_subject) {
      CsvWriter w(fig / ("barcode_" + subject_slug(subject) + ".csv"), {"dim", "birth", "death"});
      for (const auto* r : rows) {
        w.row({(*r)[bars.column("dim")], (*r)[bars.column("birth_year")], (*r)[bars.column("death_year")]});
      }
    }
    CsvWriter lifetimes(fig / "gap_lifetimes.csv", {"network", "subject", "dim", "lifetime"});
    for (const auto& [name, file] : std::vector<std::pair<std::string, std::string>>{
             {"real", "barcodes.csv"}, {"simulated", "barcodes_simulated.csv"}, {"rewired", "barcodes_rewired.csv"}}) {
      if (!fs::exists(ctx.out(file))) continue;
      const auto t = detail::read_csv(ctx.out(file), {"subject", "dim", "birth_year", "death_year"});
      for (const auto& r : t.rows) {
        const auto& death = r[t.column("death_year")];
        if (death == "inf") continue;
        const double life = detail::parse_number(death, "death_year") -
                            detail::parse_number(r[t.column("birth_year")], "birth_year");
        lifetimes.row({name, r[t.column("subject")], r[t.column("dim")], num(life)});
      }
    }
    const auto gaps = detail::read_json_file(ctx.out("gaps.json"));
    report["gaps"] = gaps;
  }

  // Membership changes and the epoch signature.
  {
    const auto changes = detail::read_csv(ctx.out("changes.csv"), {"subject", "year", "count", "epoch"});
    CsvWriter w(fig / "change_counts.csv", {"subject", "year", "count", "epoch"});
    for (const auto& r : changes.rows) w.row(r);
    json sig = json::object();
    for (const auto& [name, file] : std::vector<std::pair<std::string, std::string>>{
             {"real", "signature.csv"}, {"rewired", "signature_rewired.csv"}, {"jittered", "signature_jittered.csv"}}) {
      if (!fs::exists(ctx.out(file))) continue;
      const auto t = detail::read_csv(ctx.out(file), {"epoch", "mean_change", "duration", "subject"});
      if (name == "real") {
        CsvWriter s(fig / "epoch_signature.csv", t.header);
        for (const auto& r : t.rows) s.row(r);
      }
      json average = json::array();
      for (const auto& r : t.rows) {
        if (r[t.column("subject")] != "AVERAGE") continue;
        average.push_back({{"epoch", detail::parse_number(r[t.column("epoch")], "epoch")},
                           {"mean_change", detail::parse_number(r[t.column("mean_change")], "mean_change")},
                           {"duration", detail::parse_number(r[t.column("duration")], "duration")}});
      }
      sig[name] = average;
    }
    report["signature"] = sig;
  }

  // Influence correlations and the prize comparison.
  {
    const auto inf = detail::read_json_file(ctx.out("influence.json"));
    const auto t = detail::read_csv(ctx.out("influence.csv"), {"title", "score", "birth_count", "death_count", "is_nobel"});
    CsvWriter w(fig / "influence_participation.csv", {"title", "score", "birth_count", "death_count", "is_nobel"});
    for (const auto& r : t.rows) w.row(r);
    CsvWriter h(fig / "horizon_correlations.csv", {"horizon", "birth_r", "birth_p", "death_r", "death_p"});
    for (const auto& c : inf.at("correlations")) {
      auto field = [](const json& test, const char* key) {
        return test.is_null() ? std::string() : num(test.at(key).get<double>());
      };
      h.row({num(c.at("horizon").get<int>()), field(c.at("birth"), "statistic"), field(c.at("birth"), "p"),
             field(c.at("death"), "statistic"), field(c.at("death"), "p")});
    }
    CsvWriter cf(fig / "prize_cdf_delta.csv", {"kind", "count", "delta_cf"});
    for (const auto* kind : {"birth", "death"}) {
      for (const auto& p : inf.at("nobel").at(std::string(kind) + "_delta_cf")) {
        cf.row({kind, num(p.at(0).get<double>()), num(p.at(1).get<double>())});
      }
    }
    report["influence_correlation"] = inf.at("correlations");
    report["nobel"] = {{"birth", inf.at("nobel").at("birth")},
                              {"death", inf.at("nobel").at("death")},
                              {"nobel_nodes", inf.at("nobel").at("nobel_nodes")},
                              {"other_nodes", inf.at("nobel").at("other_nodes")}};
    report["influence"] = {{"lambda_max", inf.at("lambda_max")}, {"nodes", inf.at("nodes")}};
  }

  json digests = json::object();
  for (const auto& [file, producer] : required) digests[file] = hex_digest(ctx.out(file));
  report["artifacts"] = digests;
  report["seed"] = ctx.config.seed;
  detail::write_json_file(report, ctx.out("report.json"));
  log("report written to " + ctx.out("report.json").generic_string());
}

// ---- argument parsing --------------------------------------------------------

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_file, "JSON run configuration");
  sub->add_option("--out", o.out, "Output directory");
  sub->add_option("--seed", o.seed, "Run seed");
  sub->add_option("--jobs", o.jobs, "Subjects processed in parallel");
  sub->add_option("--subject", o.subjects, "Restrict to these subjects (repeatable)");
}

void add_networks(CLI::App* sub, Overrides& o) {
  sub->add_option("--network", o.networks, "Network JSON inputs instead of the build output (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Growing concept networks: construction, topology, growth models and influence", "knet"};
  app.require_subcommand(1, 1);
  Overrides o;

  auto* ingest = app.add_subcommand("ingest", "Read a mini-corpus or a dump into corpus.json");
  add_common(ingest, o);
  ingest->add_option("--corpus", o.corpus, "Mini-corpus JSON");
  ingest->add_option("--dump", o.dump, "pages-articles-multistream .xml.bz2");
  ingest->add_option("--index", o.index, "multistream index .txt.bz2");
  ingest->add_option("--nobel-page", o.nobel_pages, "Laureate list page (repeatable)");

  auto* build = app.add_subcommand("build", "Build one network per subject");
  add_common(build, o);
  build->add_option("--corpus", o.corpus, "Corpus JSON (default: <out>/corpus.json)");

  auto* metrics = app.add_subcommand("metrics", "Clustering, modularity, core-periphery and lead-lag");
  add_common(metrics, o);
  add_networks(metrics, o);
  metrics->add_option("--restarts", o.restarts, "Core-periphery and modularity restarts");
  metrics->add_option("--epochs", o.n_epochs, "Lead-lag epochs");

  auto* rewire = app.add_subcommand("rewire", "Edge-rewired null networks");
  add_common(rewire, o);
  add_networks(rewire, o);

  auto* jitter = app.add_subcommand("jitter", "Year-jittered null networks");
  add_common(jitter, o);
  add_networks(jitter, o);

  auto* homology = app.add_subcommand("homology", "Persistent homology, participation and gap statistics");
  add_common(homology, o);
  add_networks(homology, o);
  homology->add_option("--max-dim", o.max_dim, "Highest homology dimension");
  homology->add_flag("--no-h0", o.no_h0, "Leave dimension-0 pairs out");

  auto* simulate = app.add_subcommand("simulate", "Calibrate and run the genetic growth model");
  add_common(simulate, o);
  add_networks(simulate, o);
  simulate->add_option("--start-year", o.start_year, "Nodes born before this year seed the model (required)");
  simulate->add_option("--max-year", o.max_year, "Last simulated year");

  auto* temporal = app.add_subcommand("temporal", "Temporal modules, changepoints and epoch signature");
  add_common(temporal, o);
  add_networks(temporal, o);
  temporal->add_option("--interslice", o.omega, "Interslice coupling");
  temporal->add_option("--gamma", o.gamma, "Resolution");
  temporal->add_option("--q", o.q, "Number of changepoints");
  temporal->add_option("--restarts", o.restarts, "Louvain restarts");

  auto* influence = app.add_subcommand("influence", "Impulse response, participation correlation, prize comparison");
  add_common(influence, o);
  add_networks(influence, o);
  influence->add_option("--corpus", o.corpus, "Corpus JSON (default: <out>/corpus.json)");
  influence->add_option("--horizon", o.horizon, "Impulse response horizon K");

  auto* report = app.add_subcommand("report", "Summary JSON and per-figure CSVs");
  add_common(report, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::map<CLI::App*, std::function<void(const Context&)>> commands = {
      {ingest, cmd_ingest},
      {build, cmd_build},
      {metrics, cmd_metrics},
      {rewire, [](const Context& c) { write_null(c, "rewired", edge_rewire); }},
      {jitter, [](const Context& c) { write_null(c, "jittered", jitter_years); }},
      {homology, cmd_homology},
      {simulate, cmd_simulate},
      {temporal, cmd_temporal},
      {influence, cmd_influence},
      {report, cmd_report}};
  try {
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) fn(make_context(sub->get_name(), o));
    }
  } catch (const UsageError& e) {
    std::cerr << "knet: " << e.what() << "\n" << app.help();
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "knet: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "knet: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args);
}

}  // namespace knet::cli

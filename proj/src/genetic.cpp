#include "knet/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "knet/error.hpp"

namespace knet {

namespace {

double sum_abs_diff(const SparseVec& u, const SparseVec& v) { return (u - v).cwiseAbs().sum(); }

double support_difference(const SparseVec& u, const SparseVec& v) {
  std::size_t shared = 0;
  SparseVec::InnerIterator a(u), b(v);
  while (a && b) {
    if (a.index() == b.index()) {
      ++shared;
      ++a;
      ++b;
    } else if (a.index() < b.index()) {
      ++a;
    } else {
      ++b;
    }
  }
  return static_cast<double>(u.nonZeros() + v.nonZeros() - 2 * shared);
}

double pool_draw(const MutationParams& params, Rng& rng) {
  return params.pool[rng.below(params.pool.size())];
}

void normalize(SparseVec& v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
}

std::size_t shared_words(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t k = 0;
  for (const auto& w : a) k += std::find(b.begin(), b.end(), w) != b.end();
  return k;
}

}  // namespace

std::vector<EdgeDiff> edge_diffs(const ConceptNetwork& network) {
  std::vector<EdgeDiff> out;
  out.reserve(network.edges.size());
  for (const auto& e : network.edges) {
    const auto& s = network.nodes[e.source];
    const auto& t = network.nodes[e.target];
    out.push_back({static_cast<double>(std::abs(s.year - t.year)), sum_abs_diff(s.tfidf, t.tfidf),
                   support_difference(s.tfidf, t.tfidf)});
  }
  return out;
}

double average_abs_diff(std::span<const double> pool, std::size_t pairs, Rng& rng) {
  if (pool.empty()) throw Error("empty tf-idf value pool");
  if (pairs == 0) throw RangeError("pool_pairs must be positive");
  double total = 0.0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const double x = pool[rng.below(pool.size())];
    const double y = pool[rng.below(pool.size())];
    total += std::abs(x - y);
  }
  return total / static_cast<double>(pairs);
}

MutationParams calibrate(std::span<const EdgeDiff> diffs, double avg_abs_diff, std::span<const double> similarities) {
  std::vector<double> year, sad, man;
  for (const auto& d : diffs) {
    year.push_back(d.year_diff);
    sad.push_back(d.sum_abs_diff);
    man.push_back(d.man_dist);
  }
  MutationParams m;
  m.edges = diffs.size();
  m.avg_abs_diff = avg_abs_diff;
  m.point_fit = stats::linear_regression(year, sad);
  m.word_fit = stats::linear_regression(year, man);
  m.p = avg_abs_diff > 0.0 ? std::clamp(m.point_fit.slope / avg_abs_diff, 0.0, 1.0) : 0.0;
  m.i = std::clamp(m.word_fit.slope / 2.0, 0.0, 1.0);
  m.d = m.i;
  if (!similarities.empty()) {
    m.sim_mean = stats::mean(similarities);
    m.sim_sd = stats::population_sd(similarities);
  }
  return m;
}

MutationParams estimate_params(const ConceptNetwork& network, std::uint64_t seed, std::size_t pool_pairs) {
  std::vector<double> pool;
  for (const auto& n : network.nodes) {
    for (SparseVec::InnerIterator it(n.tfidf); it; ++it) pool.push_back(it.value());
  }
  Rng rng(seed);
  const double avg = average_abs_diff(pool, pool_pairs, rng);
  std::vector<double> similarities;
  for (const auto& e : network.edges) similarities.push_back(e.weight);
  auto m = calibrate(edge_diffs(network), avg, similarities);
  m.pool = std::move(pool);
  return m;
}

MutationCounts mutate_seed(Seed& seed, const MutationParams& params, Eigen::Index vocab_size, Rng& rng) {
  MutationCounts c;
  SparseVec& v = seed.vector;
  if (rng.bernoulli(params.p) && v.nonZeros() > 0 && !params.pool.empty()) {
    v.valuePtr()[rng.below(static_cast<std::uint64_t>(v.nonZeros()))] = pool_draw(params, rng);
    ++c.point;
  }
  if (rng.bernoulli(params.i) && v.nonZeros() < vocab_size && !params.pool.empty()) {
    // r-th zero position of the vector.
    auto r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(vocab_size - v.nonZeros())));
    Eigen::Index pos = r;
    for (SparseVec::InnerIterator it(v); it && it.index() <= pos; ++it) ++pos;
    v.coeffRef(pos) = pool_draw(params, rng);
    ++c.insert;
  }
  if (rng.bernoulli(params.d) && v.nonZeros() > 0) {
    v.valuePtr()[rng.below(static_cast<std::uint64_t>(v.nonZeros()))] = 0.0;
    v.prune(0.0);
    ++c.remove;
  }
  return c;
}

double draw_threshold(const MutationParams& params, Rng& rng) {
  for (int k = 0; k < 1000; ++k) {
    const double x = rng.normal(params.sim_mean, params.sim_sd);
    if (x > 0.0 && x < 1.0) return x;
  }
  return std::clamp(params.sim_mean, 1e-9, 1.0 - 1e-9);
}

std::vector<std::string> title_words(const SparseVec& v, const std::vector<std::string>& vocab, std::size_t count) {
  std::vector<std::pair<double, Eigen::Index>> ranked;
  for (SparseVec::InnerIterator it(v); it; ++it) {
    if (it.value() > 0.0 && !is_stopword(vocab[static_cast<std::size_t>(it.index())])) {
      ranked.emplace_back(-it.value(), it.index());
    }
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<std::string> words;
  for (std::size_t k = 0; k < ranked.size() && k < count; ++k) {
    words.push_back(vocab[static_cast<std::size_t>(ranked[k].second)]);
  }
  return words;
}

SimTrace run_simulation(const ConceptNetwork& real, const MutationParams& params, std::uint64_t seed,
                        const SimulationOptions& options) {
  SimTrace trace;
  trace.start_year = options.start_year;
  ConceptNetwork& net = trace.network;
  net.subject = real.subject;
  net.vocab = real.vocab;
  const auto V = static_cast<Eigen::Index>(real.vocab.size());

  std::vector<int> remap(real.nodes.size(), -1);
  for (const auto& n : real.nodes) {
    if (n.year >= options.start_year) continue;
    remap[n.id] = net.size();
    ConceptNode copy = n;
    copy.id = net.size();
    net.nodes.push_back(std::move(copy));
  }
  if (net.nodes.empty()) {
    throw Error("no node of '" + real.subject + "' is born before " + std::to_string(options.start_year) +
                "; choose a later start year");
  }
  for (const auto& e : real.edges) {
    if (remap[e.source] >= 0 && remap[e.target] >= 0) net.edges.push_back({remap[e.source], remap[e.target], e.weight});
  }
  const int target = options.target_nodes < 0 ? real.size() : options.target_nodes;

  std::vector<std::vector<std::string>> words;
  for (const auto& n : net.nodes) words.push_back(title_words(n.tfidf, net.vocab));
  std::vector<Seed> seeds;
  std::vector<bool> has_seed(net.nodes.size(), false);

  Rng rng(seed);
  Year year = options.start_year;
  trace.end_year = options.start_year - 1;
  while (net.size() < target && year <= options.max_year) {
    // (i) every node without a live seed gets one; empty vectors have nothing to copy.
    for (int v = 0; v < net.size(); ++v) {
      if (has_seed[v] || net.nodes[v].tfidf.nonZeros() == 0) continue;
      seeds.push_back({v, net.nodes[v].tfidf, draw_threshold(params, rng)});
      has_seed[v] = true;
    }
    // (ii) mutate.
    SimEvent mutations;
    mutations.year = year;
    mutations.kind = "mutations";
    for (auto& s : seeds) {
      const auto c = mutate_seed(s, params, V, rng);
      mutations.mutations.point += c.point;
      mutations.mutations.insert += c.insert;
      mutations.mutations.remove += c.remove;
    }
    trace.events.push_back(mutations);
    // (iii) detach seeds that drifted past their threshold.
    const int existing = net.size();
    std::vector<Seed> kept;
    for (auto& s : seeds) {
      const double similarity = cosine_similarity(s.vector, net.nodes[s.parent].tfidf);
      if (similarity >= s.threshold || net.size() >= target) {
        kept.push_back(std::move(s));
        continue;
      }
      ConceptNode node;
      node.id = net.size();
      node.year = year;
      node.provenance = Provenance::simulated;
      node.tfidf = std::move(s.vector);
      normalize(node.tfidf);
      const auto title = title_words(node.tfidf, net.vocab);
      for (std::size_t k = 0; k < title.size(); ++k) node.title += (k ? " " : "") + title[k];
      trace.events.push_back({year, "birth", node.id, s.parent, similarity, s.threshold, {}});
      trace.birth_similarity.push_back(similarity);
      has_seed[s.parent] = false;
      words.push_back(title);
      has_seed.push_back(false);
      net.nodes.push_back(std::move(node));
    }
    seeds = std::move(kept);
    // (iv) connect each newborn to earlier nodes sharing enough title words.
    for (int v = existing; v < net.size(); ++v) {
      bool connected = false;
      for (int u = 0; u < existing; ++u) {
        if (shared_words(words[v], words[u]) < options.match_words) continue;
        const double w = cosine_similarity(net.nodes[v].tfidf, net.nodes[u].tfidf);
        net.edges.push_back({v, u, w});
        trace.events.push_back({year, "edge", v, u, w, 0.0, {}});
        connected = true;
      }
      trace.unconnected_births += !connected;
    }
    trace.node_counts.emplace_back(year, net.size());
    trace.end_year = year;
    ++year;
  }
  std::sort(net.edges.begin(), net.edges.end(), [](const ConceptEdge& a, const ConceptEdge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  return trace;
}

nlohmann::json params_to_json(const MutationParams& m) {
  auto fit = [](const stats::Regression& r) {
    return nlohmann::json{{"slope", r.slope}, {"intercept", r.intercept}, {"r", r.r}, {"n", r.n}};
  };
  return {{"p", m.p},
          {"i", m.i},
          {"d", m.d},
          {"sim_mean", m.sim_mean},
          {"sim_sd", m.sim_sd},
          {"avg_abs_diff", m.avg_abs_diff},
          {"edges", m.edges},
          {"pool_size", m.pool.size()},
          {"sum_abs_diff_fit", fit(m.point_fit)},
          {"man_dist_fit", fit(m.word_fit)}};
}

nlohmann::json trace_to_json(const SimTrace& trace) {
  nlohmann::json j = network_to_json(trace.network);
  auto& events = j["events"] = nlohmann::json::array();
  for (const auto& e : trace.events) {
    nlohmann::json x{{"year", e.year}, {"kind", e.kind}};
    if (e.kind == "mutations") {
      x["point"] = e.mutations.point;
      x["insert"] = e.mutations.insert;
      x["delete"] = e.mutations.remove;
    } else if (e.kind == "birth") {
      x["node"] = e.node;
      x["parent"] = e.other;
      x["similarity"] = e.value;
      x["threshold"] = e.threshold;
    } else {
      x["source"] = e.node;
      x["target"] = e.other;
      x["weight"] = e.value;
    }
    events.push_back(std::move(x));
  }
  auto& counts = j["node_counts"] = nlohmann::json::array();
  for (const auto& [y, c] : trace.node_counts) counts.push_back({y, c});
  j["start_year"] = trace.start_year;
  j["end_year"] = trace.end_year;
  j["unconnected_births"] = trace.unconnected_births;
  return j;
}

}  // namespace knet

#include "knet/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json_io.hpp"
#include "knet/error.hpp"

namespace knet {

int ConceptNetwork::find(std::string_view title) const {
  for (const auto& n : nodes) {
    if (n.title == title) return n.id;
  }
  return -1;
}

Year ConceptNetwork::arrival_year(const ConceptEdge& e) const {
  return std::max(nodes[e.source].year, nodes[e.target].year);
}

void ConceptNetwork::validate() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    if (nodes[i].id != i) throw Error("node " + std::to_string(i) + " has id " + std::to_string(nodes[i].id));
    if (nodes[i].tfidf.size() != static_cast<Eigen::Index>(vocab.size()) && nodes[i].tfidf.nonZeros() > 0) {
      throw Error("tf-idf of node '" + nodes[i].title + "' does not match the vocabulary size");
    }
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.source < 0 || e.source >= n || e.target < 0 || e.target >= n) {
      throw Error("edge " + std::to_string(k) + " has an endpoint outside the node set");
    }
    if (e.source == e.target) throw Error("edge " + std::to_string(k) + " is a self-loop");
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) throw Error("edge " + std::to_string(k) + " weight outside [0, 1]");
    if (k > 0 && std::pair(edges[k - 1].source, edges[k - 1].target) >= std::pair(e.source, e.target)) {
      throw Error("edges are not sorted and unique at position " + std::to_string(k));
    }
  }
}

bool same_network(const ConceptNetwork& a, const ConceptNetwork& b) {
  if (a.subject != b.subject || a.vocab != b.vocab || a.edges != b.edges || a.null != b.null) return false;
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    if (x.id != y.id || x.title != y.title || x.year != y.year || x.provenance != y.provenance) return false;
    if (x.tfidf.nonZeros() != y.tfidf.nonZeros()) return false;
    for (Eigen::Index k = 0; k < x.tfidf.nonZeros(); ++k) {
      if (x.tfidf.innerIndexPtr()[k] != y.tfidf.innerIndexPtr()[k] ||
          x.tfidf.valuePtr()[k] != y.tfidf.valuePtr()[k]) {
        return false;
      }
    }
  }
  return true;
}

std::vector<std::string> article_tokens(const ParsedArticle& article) {
  auto tokens = tokenize(article.lead_text);
  if (article.history_text) {
    auto more = tokenize(*article.history_text);
    tokens.insert(tokens.end(), more.begin(), more.end());
  }
  return tokens;
}

TfidfModel corpus_tfidf(const Corpus& corpus) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.articles.size());
  for (const auto& a : corpus.articles) docs.push_back(article_tokens(a));
  return compute_tfidf(docs);
}

ConceptNetwork build_network(const SubjectIndex& subject, const Corpus& corpus, const TfidfModel& model) {
  if (model.vectors.size() != corpus.articles.size()) {
    throw Error("tf-idf model does not cover the corpus (" + std::to_string(model.vectors.size()) + " vectors for " +
                std::to_string(corpus.articles.size()) + " articles)");
  }
  ConceptNetwork net;
  net.subject = subject.subject;
  std::vector<const ParsedArticle*> members;
  std::map<std::string, int> id_of;
  for (const auto& title : subject.member_titles) {
    const ParsedArticle* a = corpus.find(title);
    if (!a) continue;
    id_of.emplace(a->title, static_cast<int>(members.size()));
    members.push_back(a);
  }
  if (members.empty()) throw Error("subject '" + subject.subject + "' has no member articles in the corpus");

  std::set<std::pair<int, int>> links;
  for (int target = 0; target < static_cast<int>(members.size()); ++target) {
    for (const auto& l : members[target]->lead_links) {
      const auto it = id_of.find(l);
      if (it != id_of.end() && it->second != target) links.emplace(it->second, target);
    }
  }

  // Restrict the vocabulary to terms used by members; global ids are sorted,
  // so the remapped ids keep the same order.
  std::vector<const SparseVec*> vectors;
  std::set<int> used;
  for (const auto* a : members) {
    const auto idx = static_cast<std::size_t>(a - corpus.articles.data());
    vectors.push_back(&model.vectors[idx]);
    for (SparseVec::InnerIterator it(model.vectors[idx]); it; ++it) used.insert(static_cast<int>(it.index()));
  }
  std::map<int, int> local;
  for (int g : used) {
    local.emplace(g, static_cast<int>(net.vocab.size()));
    net.vocab.push_back(model.vocab[g]);
  }

  std::vector<std::vector<Year>> years;
  for (const auto* a : members) years.push_back(a->parsed_years);
  const std::vector<std::pair<int, int>> edge_list(links.begin(), links.end());
  const auto births = assign_birth_years(years, edge_list);

  for (int i = 0; i < static_cast<int>(members.size()); ++i) {
    ConceptNode node;
    node.id = i;
    node.title = members[i]->title;
    node.year = births[i].year;
    node.provenance = births[i].provenance;
    node.tfidf.resize(static_cast<Eigen::Index>(net.vocab.size()));
    for (SparseVec::InnerIterator it(*vectors[i]); it; ++it) {
      node.tfidf.insertBack(local.at(static_cast<int>(it.index()))) = it.value();
    }
    net.nodes.push_back(std::move(node));
  }
  for (const auto& [s, t] : edge_list) {
    net.edges.push_back({s, t, cosine_similarity(net.nodes[s].tfidf, net.nodes[t].tfidf)});
  }
  return net;
}

ConceptNetwork build_network(const SubjectIndex& subject, const Corpus& corpus) {
  return build_network(subject, corpus, corpus_tfidf(corpus));
}

GrowthFiltration make_filtration(const ConceptNetwork& network) {
  GrowthFiltration f;
  for (const auto& n : network.nodes) f.years.push_back(n.year);
  std::sort(f.years.begin(), f.years.end());
  f.years.erase(std::unique(f.years.begin(), f.years.end()), f.years.end());
  f.node_order.resize(network.nodes.size());
  for (int i = 0; i < network.size(); ++i) f.node_order[i] = i;
  std::stable_sort(f.node_order.begin(), f.node_order.end(),
                   [&](int a, int b) { return network.nodes[a].year < network.nodes[b].year; });
  for (const auto& e : network.edges) f.edge_arrival.push_back(network.arrival_year(e));
  return f;
}

ConceptNetwork snapshot_at(const ConceptNetwork& network, Year t) {
  ConceptNetwork snap;
  snap.subject = network.subject;
  snap.vocab = network.vocab;
  snap.null = network.null;
  std::vector<int> remap(network.nodes.size(), -1);
  for (const auto& n : network.nodes) {
    if (n.year > t) continue;
    remap[n.id] = snap.size();
    ConceptNode copy = n;
    copy.id = snap.size();
    snap.nodes.push_back(std::move(copy));
  }
  for (const auto& e : network.edges) {
    if (remap[e.source] >= 0 && remap[e.target] >= 0) snap.edges.push_back({remap[e.source], remap[e.target], e.weight});
  }
  return snap;
}

namespace {

Eigen::SparseMatrix<double> skeleton_of(const ConceptNetwork& network, const std::vector<bool>* present) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(network.edges.size() * 2);
  for (const auto& e : network.edges) {
    if (present && (!(*present)[e.source] || !(*present)[e.target])) continue;
    triplets.emplace_back(e.source, e.target, e.weight);
    triplets.emplace_back(e.target, e.source, e.weight);
  }
  Eigen::SparseMatrix<double> w(network.size(), network.size());
  w.setFromTriplets(triplets.begin(), triplets.end());
  return w;
}

}  // namespace

Eigen::SparseMatrix<double> undirected_skeleton(const ConceptNetwork& network) {
  return skeleton_of(network, nullptr);
}

Eigen::SparseMatrix<double> undirected_skeleton(const ConceptNetwork& network, Year t) {
  std::vector<bool> present(network.nodes.size());
  for (const auto& n : network.nodes) present[n.id] = n.year <= t;
  return skeleton_of(network, &present);
}

nlohmann::json network_to_json(const ConceptNetwork& network) {
  nlohmann::json j;
  j["subject"] = network.subject;
  j["vocab"] = network.vocab;
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& n : network.nodes) {
    nlohmann::json tf = nlohmann::json::array();
    for (SparseVec::InnerIterator it(n.tfidf); it; ++it) tf.push_back({it.index(), it.value()});
    nodes.push_back({{"id", n.id},
                     {"title", n.title},
                     {"year", n.year},
                     {"provenance", std::string(to_string(n.provenance))},
                     {"tfidf", std::move(tf)}});
  }
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : network.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
  if (network.null) j["null"] = {{"kind", network.null->kind}, {"seed", network.null->seed}};
  return j;
}

ConceptNetwork network_from_json(const nlohmann::json& j) {
  using detail::require;
  ConceptNetwork net;
  net.subject = detail::require_string(j, "subject", "");
  const auto& vocab = require(j, "vocab", "");
  if (!vocab.is_array()) throw SchemaError("vocab", "expected an array of strings");
  for (const auto& v : vocab) {
    if (!v.is_string()) throw SchemaError("vocab", "expected an array of strings");
    net.vocab.push_back(v.get<std::string>());
  }
  const auto V = static_cast<Eigen::Index>(net.vocab.size());
  const auto& nodes = require(j, "nodes", "");
  if (!nodes.is_array()) throw SchemaError("nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "].";
    const auto& jn = nodes[i];
    ConceptNode n;
    n.id = static_cast<int>(detail::require_int(jn, "id", where));
    if (n.id != static_cast<int>(i)) throw SchemaError(where + "id", "ids must equal node positions");
    n.title = detail::require_string(jn, "title", where);
    n.year = detail::require_int(jn, "year", where);
    try {
      n.provenance = provenance_from_string(detail::require_string(jn, "provenance", where));
    } catch (const SchemaError&) {
      throw SchemaError(where + "provenance", "unknown provenance");
    }
    n.tfidf.resize(V);
    if (jn.contains("tfidf")) {
      const auto& tf = jn.at("tfidf");
      if (!tf.is_array()) throw SchemaError(where + "tfidf", "expected [[token_id, weight], ...]");
      Eigen::Index last = -1;
      for (const auto& pair : tf) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() || !pair[1].is_number()) {
          throw SchemaError(where + "tfidf", "expected [[token_id, weight], ...]");
        }
        const auto k = pair[0].get<Eigen::Index>();
        if (k <= last || k >= V) throw SchemaError(where + "tfidf", "token ids must be increasing and inside vocab");
        n.tfidf.insertBack(k) = pair[1].get<double>();
        last = k;
      }
    }
    net.nodes.push_back(std::move(n));
  }
  const auto& edges = require(j, "edges", "");
  if (!edges.is_array()) throw SchemaError("edges", "expected an array");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string where = "edges[" + std::to_string(k) + "].";
    ConceptEdge e;
    e.source = static_cast<int>(detail::require_int(edges[k], "source", where));
    e.target = static_cast<int>(detail::require_int(edges[k], "target", where));
    e.weight = detail::require_number(edges[k], "weight", where);
    net.edges.push_back(e);
  }
  if (j.contains("null") && !j.at("null").is_null()) {
    NullStanza s;
    s.kind = detail::require_string(j.at("null"), "kind", "null.");
    const auto& seed = detail::require(j.at("null"), "seed", "null.");
    if (!seed.is_number_unsigned()) throw SchemaError("null.seed", "expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
    net.null = s;
  }
  try {
    net.validate();
  } catch (const Error& e) {
    throw SchemaError("edges", e.what());
  }
  return net;
}

void write_network(const ConceptNetwork& network, const std::filesystem::path& path) {
  detail::write_json_file(network_to_json(network), path);
}

ConceptNetwork read_network(const std::filesystem::path& path) { return network_from_json(detail::read_json_file(path)); }

}  // namespace knet

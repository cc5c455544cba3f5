#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <json.hpp>

#include "knet/corpus.hpp"
#include "knet/text.hpp"

namespace knet {

struct ConceptNode {
  int id = 0;
  std::string title;
  Year year = kDefaultYear;
  Provenance provenance = Provenance::defaulted;
  SparseVec tfidf;  // over the network's vocab
};

/// Directed edge from the hyperlinked article (source) to the hyperlinking
/// article (target), weighted by tf-idf cosine similarity.
struct ConceptEdge {
  int source = 0;
  int target = 0;
  double weight = 0.0;

  bool operator==(const ConceptEdge&) const = default;
};

struct NullStanza {
  std::string kind;  // "rewired" | "jittered"
  std::uint64_t seed = 0;

  bool operator==(const NullStanza&) const = default;
};

struct ConceptNetwork {
  std::string subject;
  std::vector<ConceptNode> nodes;  // id == index
  std::vector<ConceptEdge> edges;  // sorted by (source, target), no duplicates
  std::vector<std::string> vocab;
  std::optional<NullStanza> null;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Node id for a title, -1 if absent.
  int find(std::string_view title) const;
  /// max(year(source), year(target)).
  Year arrival_year(const ConceptEdge& e) const;
  /// Throws knet::Error on a broken invariant (ids, sorting, weights, loops).
  void validate() const;
};

bool same_network(const ConceptNetwork& a, const ConceptNetwork& b);

/// Token stream of an article used for tf-idf: lead text plus history text.
std::vector<std::string> article_tokens(const ParsedArticle& article);

/// tf-idf over every article of the corpus, in corpus order.
TfidfModel corpus_tfidf(const Corpus& corpus);

/// One node per member article (ids in title order), an edge L -> A for every
/// lead link L of member A that is itself a member. `model` holds one vector
/// per corpus article, in corpus order. Throws on an empty member set.
ConceptNetwork build_network(const SubjectIndex& subject, const Corpus& corpus, const TfidfModel& model);
ConceptNetwork build_network(const SubjectIndex& subject, const Corpus& corpus);

/// The yearly growth view of a network.
struct GrowthFiltration {
  std::vector<Year> years;        // sorted unique node years
  std::vector<int> node_order;    // node ids sorted by (year, id)
  std::vector<Year> edge_arrival; // parallel to network.edges
};

GrowthFiltration make_filtration(const ConceptNetwork& network);

/// Nodes with year <= t and edges arriving by t. Ids are renumbered densely
/// in title order; vocabulary is kept.
ConceptNetwork snapshot_at(const ConceptNetwork& network, Year t);

/// Symmetric weighted adjacency with W(i, j) = w(i -> j) + w(j -> i).
Eigen::SparseMatrix<double> undirected_skeleton(const ConceptNetwork& network);

/// Skeleton restricted to nodes with year <= t (same dimensions).
Eigen::SparseMatrix<double> undirected_skeleton(const ConceptNetwork& network, Year t);

nlohmann::json network_to_json(const ConceptNetwork& network);
/// Throws SchemaError naming the offending field.
ConceptNetwork network_from_json(const nlohmann::json& j);
void write_network(const ConceptNetwork& network, const std::filesystem::path& path);
ConceptNetwork read_network(const std::filesystem::path& path);

}  // namespace knet

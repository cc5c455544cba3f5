#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knet/network.hpp"
#include "knet/stats.hpp"

namespace knet {

struct Simplex {
  std::vector<int> vertices;  // strictly increasing
  Year year = 0;              // latest vertex year

  int dim() const { return static_cast<int>(vertices.size()) - 1; }
};

/// Simplices ordered by (year, dimension, vertices); faces precede cofaces.
struct Filtration {
  std::vector<Simplex> simplices;
};

struct PersistencePair {
  int dim = 0;
  Year birth = 0;
  std::optional<Year> death;  // empty while the cavity is alive
  std::vector<int> birth_simplex;
  std::vector<int> death_simplex;

  bool alive() const { return !death.has_value(); }
};

struct ParticipationCounts {
  std::vector<int> birth;
  std::vector<int> death;
};

inline constexpr std::size_t kMaxCliques = 10'000'000;

/// All cliques of 1..max_size vertices of the undirected skeleton, each dated
/// by its latest vertex. Throws when more than `limit` cliques would be made.
std::vector<Simplex> enumerate_cliques(const ConceptNetwork& network, int max_size, std::size_t limit = kMaxCliques);

/// Sorts and checks that every face precedes its cofaces.
Filtration build_filtration(std::vector<Simplex> cliques);
Filtration build_filtration(const ConceptNetwork& network, int max_dim);

struct HomologyOptions {
  int max_dim = 2;
  bool include_h0 = true;
  bool keep_zero_persistence = false;
};

/// Z/2 boundary-matrix reduction with clearing. Cliques up to max_dim + 2
/// vertices must be present so that max_dim cavities can die.
std::vector<PersistencePair> persistent_homology(const Filtration& filtration, const HomologyOptions& options = {});
std::vector<PersistencePair> persistent_homology(const ConceptNetwork& network, const HomologyOptions& options = {});

/// Number of pairs of dimension d with birth <= t < death (alive counts as
/// never dying).
std::vector<int> betti_numbers(std::span<const PersistencePair> pairs, Year t, int max_dim);

struct LifetimeSummary {
  std::vector<double> dead_lifetimes;
  int alive = 0;
  std::map<int, int> dead_by_dim;
  std::map<int, int> alive_by_dim;
};

LifetimeSummary lifetime_distributions(std::span<const PersistencePair> pairs);

/// birth[v] / death[v]: pairs whose birth / death simplex contains v.
ParticipationCounts participation(std::span<const PersistencePair> pairs, int n_nodes);

struct GapSample {
  std::string name;
  std::vector<double> dead_lifetimes;  // pooled over subjects
  std::vector<double> alive_counts;    // one value per subject
};

struct GapComparison {
  std::string name;
  std::optional<stats::TestResult> lifetimes;
  std::optional<stats::TestResult> alive;
};

/// Two-sample KS of `real` against each comparator. Empty samples skip the
/// test with a warning on stderr.
std::vector<GapComparison> compare_gap_statistics(const GapSample& real, std::span<const GapSample> others);

}  // namespace knet

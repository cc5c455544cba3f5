#include "knet/homology.hpp"

#include <algorithm>
#include <iostream>
#include <unordered_map>

#include "knet/error.hpp"

namespace knet {

namespace {

struct VertexHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }
};

using SimplexIndex = std::unordered_map<std::vector<int>, int, VertexHash>;

SimplexIndex index_of(const Filtration& f) {
  SimplexIndex index;
  index.reserve(f.simplices.size());
  for (std::size_t k = 0; k < f.simplices.size(); ++k) index.emplace(f.simplices[k].vertices, static_cast<int>(k));
  return index;
}

// Facet indices of simplex k, ascending; -1 entries mark missing facets.
std::vector<int> boundary(const Filtration& f, const SimplexIndex& index, int k) {
  const auto& v = f.simplices[k].vertices;
  std::vector<int> col;
  if (v.size() < 2) return col;
  std::vector<int> face(v.size() - 1);
  for (std::size_t drop = 0; drop < v.size(); ++drop) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i != drop) face[w++] = v[i];
    }
    const auto it = index.find(face);
    col.push_back(it == index.end() ? -1 : it->second);
  }
  std::sort(col.begin(), col.end());
  return col;
}

void add_column(std::vector<int>& into, const std::vector<int>& other, std::vector<int>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(into.begin(), into.end(), other.begin(), other.end(), std::back_inserter(scratch));
  into.swap(scratch);
}

}  // namespace

std::vector<Simplex> enumerate_cliques(const ConceptNetwork& network, int max_size, std::size_t limit) {
  if (max_size < 1) throw RangeError("clique size must be at least 1");
  const int n = network.size();
  std::vector<std::vector<int>> higher(n);
  for (const auto& e : network.edges) {
    higher[std::min(e.source, e.target)].push_back(std::max(e.source, e.target));
  }
  for (auto& h : higher) {
    std::sort(h.begin(), h.end());
    h.erase(std::unique(h.begin(), h.end()), h.end());
  }
  std::vector<Simplex> out;
  std::vector<int> clique;
  auto emit = [&] {
    if (out.size() >= limit) {
      throw Error("clique enumeration exceeded " + std::to_string(limit) +
                  " simplices; lower max_dim or analyse a smaller network");
    }
    Year y = network.nodes[clique.front()].year;
    for (int v : clique) y = std::max(y, network.nodes[v].year);
    out.push_back({clique, y});
  };
  auto extend = [&](auto&& self, const std::vector<int>& candidates) -> void {
    emit();
    if (static_cast<int>(clique.size()) >= max_size) return;
    std::vector<int> next;
    for (int u : candidates) {
      next.clear();
      std::set_intersection(candidates.begin(), candidates.end(), higher[u].begin(), higher[u].end(),
                            std::back_inserter(next));
      clique.push_back(u);
      self(self, next);
      clique.pop_back();
    }
  };
  for (int v = 0; v < n; ++v) {
    clique.assign(1, v);
    extend(extend, higher[v]);
  }
  return out;
}

Filtration build_filtration(std::vector<Simplex> cliques) {
  Filtration f;
  f.simplices = std::move(cliques);
  std::sort(f.simplices.begin(), f.simplices.end(), [](const Simplex& a, const Simplex& b) {
    if (a.year != b.year) return a.year < b.year;
    if (a.vertices.size() != b.vertices.size()) return a.vertices.size() < b.vertices.size();
    return a.vertices < b.vertices;
  });
  const auto index = index_of(f);
  for (int k = 0; k < static_cast<int>(f.simplices.size()); ++k) {
    for (int face : boundary(f, index, k)) {
      if (face < 0 || face >= k) {
        throw Error("filtration face-order violation at simplex " + std::to_string(k) + " (year " +
                    std::to_string(f.simplices[k].year) + ")");
      }
    }
  }
  return f;
}

Filtration build_filtration(const ConceptNetwork& network, int max_dim) {
  return build_filtration(enumerate_cliques(network, max_dim + 2));
}

std::vector<PersistencePair> persistent_homology(const Filtration& f, const HomologyOptions& options) {
  if (options.max_dim < 0) throw RangeError("max_dim must be non-negative");
  const int n = static_cast<int>(f.simplices.size());
  const auto index = index_of(f);
  int top = 0;
  for (const auto& s : f.simplices) top = std::max(top, s.dim());

  std::vector<std::vector<int>> columns(n);
  std::vector<int> column_with_low(n, -1);
  std::vector<bool> cleared(n, false);
  std::vector<int> scratch;
  // Highest dimension first so that paired creators can be cleared.
  for (int d = top; d >= 1; --d) {
    for (int j = 0; j < n; ++j) {
      if (f.simplices[j].dim() != d || cleared[j]) continue;
      auto col = boundary(f, index, j);
      if (!col.empty() && col.front() < 0) throw Error("filtration is missing a face of simplex " + std::to_string(j));
      while (!col.empty() && column_with_low[col.back()] >= 0) add_column(col, columns[column_with_low[col.back()]], scratch);
      if (col.empty()) continue;
      const int low = col.back();
      column_with_low[low] = j;
      cleared[low] = true;
      columns[j] = std::move(col);
    }
  }

  std::vector<PersistencePair> pairs;
  for (int i = 0; i < n; ++i) {
    const auto& s = f.simplices[i];
    if (!columns[i].empty()) continue;  // destroyer
    if (s.dim() > options.max_dim) continue;
    if (s.dim() == 0 && !options.include_h0) continue;
    PersistencePair p;
    p.dim = s.dim();
    p.birth = s.year;
    p.birth_simplex = s.vertices;
    if (const int j = column_with_low[i]; j >= 0) {
      p.death = f.simplices[j].year;
      p.death_simplex = f.simplices[j].vertices;
      if (*p.death == p.birth && !options.keep_zero_persistence) continue;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<PersistencePair> persistent_homology(const ConceptNetwork& network, const HomologyOptions& options) {
  return persistent_homology(build_filtration(network, options.max_dim), options);
}

std::vector<int> betti_numbers(std::span<const PersistencePair> pairs, Year t, int max_dim) {
  std::vector<int> betti(static_cast<std::size_t>(max_dim) + 1, 0);
  for (const auto& p : pairs) {
    if (p.dim > max_dim || p.birth > t) continue;
    if (p.alive() || *p.death > t) ++betti[p.dim];
  }
  return betti;
}

LifetimeSummary lifetime_distributions(std::span<const PersistencePair> pairs) {
  LifetimeSummary s;
  for (const auto& p : pairs) {
    if (p.alive()) {
      ++s.alive;
      ++s.alive_by_dim[p.dim];
    } else {
      s.dead_lifetimes.push_back(static_cast<double>(*p.death - p.birth));
      ++s.dead_by_dim[p.dim];
    }
  }
  return s;
}

ParticipationCounts participation(std::span<const PersistencePair> pairs, int n_nodes) {
  ParticipationCounts c;
  c.birth.assign(n_nodes, 0);
  c.death.assign(n_nodes, 0);
  for (const auto& p : pairs) {
    for (int v : p.birth_simplex) ++c.birth.at(v);
    for (int v : p.death_simplex) ++c.death.at(v);
  }
  return c;
}

std::vector<GapComparison> compare_gap_statistics(const GapSample& real, std::span<const GapSample> others) {
  std::vector<GapComparison> out;
  for (const auto& other : others) {
    GapComparison c;
    c.name = other.name;
    if (real.dead_lifetimes.empty() || other.dead_lifetimes.empty()) {
      std::cerr << "warning: empty lifetime sample; skipping " << real.name << " vs " << other.name << '\n';
    } else {
      c.lifetimes = stats::ks_two_sample(real.dead_lifetimes, other.dead_lifetimes);
    }
    if (real.alive_counts.empty() || other.alive_counts.empty()) {
      std::cerr << "warning: empty alive-count sample; skipping " << real.name << " vs " << other.name << '\n';
    } else {
      c.alive = stats::ks_two_sample(real.alive_counts, other.alive_counts);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace knet

#include "knet/null_models.hpp"

#include <algorithm>
#include <set>

#include "knet/rng.hpp"

namespace knet {

ConceptNetwork edge_rewire(const ConceptNetwork& network, std::uint64_t seed) {
  constexpr int kMaxDraws = 100;
  ConceptNetwork out = network;
  out.null = NullStanza{"rewired", seed};
  const auto n = static_cast<std::uint64_t>(network.size());
  if (n < 2) return out;

  Rng rng(seed);
  std::set<std::pair<int, int>> present;
  for (const auto& e : network.edges) present.emplace(e.source, e.target);
  std::vector<ConceptEdge> rewired;
  rewired.reserve(network.edges.size());
  for (const auto& e : network.edges) {
    present.erase({e.source, e.target});
    int target = e.target;
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      const int t = static_cast<int>(rng.below(n));
      if (t != e.source && !present.count({e.source, t})) {
        target = t;
        break;
      }
    }
    present.emplace(e.source, target);
    rewired.push_back({e.source, target, e.weight});
  }
  std::sort(rewired.begin(), rewired.end(), [](const ConceptEdge& a, const ConceptEdge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  out.edges = std::move(rewired);
  return out;
}

ConceptNetwork jitter_years(const ConceptNetwork& network, std::uint64_t seed) {
  ConceptNetwork out = network;
  out.null = NullStanza{"jittered", seed};
  Rng rng(seed);
  for (auto& node : out.nodes) node.year += static_cast<Year>(rng.below(3)) - 1;
  return out;
}

}  // namespace knet

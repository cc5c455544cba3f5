#pragma once

#include <cstdint>

#include "knet/network.hpp"

namespace knet {

/// Keeps every edge's source and weight and draws a new target uniformly,
/// rejecting self-loops and duplicates (up to 100 draws, else the original
/// target stays). Edges are visited in (source, target) order.
ConceptNetwork edge_rewire(const ConceptNetwork& network, std::uint64_t seed);

/// Adds -1, 0 or +1 (equally likely) to every node year.
ConceptNetwork jitter_years(const ConceptNetwork& network, std::uint64_t seed);

}  // namespace knet

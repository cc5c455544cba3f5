#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "knet/network.hpp"

namespace knet {

/// One layer per unique birth year; layer s holds the undirected skeleton of
/// the snapshot at years[s] over all node ids (absent nodes have no weight).
struct MultilayerNetwork {
  std::vector<Year> years;
  std::vector<Eigen::SparseMatrix<double>> layers;
  std::vector<int> birth_layer;  // first layer containing each node
  double omega = 0.01;

  int layer_count() const { return static_cast<int>(layers.size()); }
  int node_count() const { return static_cast<int>(birth_layer.size()); }
  bool present(int node, int layer) const { return birth_layer[node] <= layer; }
};

MultilayerNetwork build_multilayer(const ConceptNetwork& network, double omega = 0.01);

/// labels[layer][node], -1 where the node does not exist yet.
using LayerLabels = std::vector<std::vector<int>>;

struct TemporalModules {
  LayerLabels labels;
  double quality = 0.0;  // multislice modularity, tracked during optimization
  int levels = 0;
};

/// Multislice modularity with coupling omega between copies of a node in
/// consecutive layers. Layers without edges contribute no null term.
double multislice_modularity(const MultilayerNetwork& ml, const LayerLabels& labels, double gamma = 1.0);

/// Louvain on the supra-graph: local moving in a seeded random order until a
/// sweep gains less than 1e-10, then aggregation, until a level moves nothing.
/// Labels are renumbered by first appearance (layer, then node id).
TemporalModules detect_temporal_modules(const MultilayerNetwork& ml, double gamma, std::uint64_t seed);

/// changes[s] = nodes present in s-1 and s whose label differs; changes[0] = 0.
std::vector<int> count_changes(const LayerLabels& labels);

struct Changepoints {
  std::vector<std::size_t> indices;  // sorted; each is the first index of a new segment
  std::vector<double> log_likelihood;  // profile log-likelihood before and after each split
};

/// Poisson segment cost -S log(S/n) + S (0 when S = 0).
double poisson_cost(std::span<const int> segment);

/// Binary segmentation with exactly q splits, minimum segment length 2.
/// Each step takes the largest likelihood gain among splits that keep the
/// remaining splits feasible; ties go to the leftmost split.
Changepoints detect_changepoints(std::span<const int> signal, int q = 3);

struct Epoch {
  double mean_change = 0.0;
  double duration = 0.0;  // layers
  Year start_year = 0;
  Year end_year = 0;
};

std::vector<Epoch> epochs_from(std::span<const int> changes, std::span<const std::size_t> changepoints,
                               std::span<const Year> years);

struct MembershipTrace {
  std::string subject;
  std::vector<Year> years;
  std::vector<std::string> titles;
  LayerLabels labels;
  double quality = 0.0;
  std::vector<int> changes;
  Changepoints changepoints;
  std::vector<Epoch> epochs;
};

struct TemporalOptions {
  double omega = 0.01;
  double gamma = 1.0;
  int q = 3;
  int restarts = 1;  // independent Louvain runs; the best quality wins
};

MembershipTrace temporal_trace(const ConceptNetwork& network, const TemporalOptions& options, std::uint64_t seed);

struct Signature {
  std::vector<std::string> subjects;
  std::vector<std::vector<Epoch>> per_subject;
  std::vector<Epoch> average;  // arithmetic mean per epoch; years unset
};

/// Throws if a trace does not carry q + 1 epochs of the same count.
Signature epoch_signature(std::span<const MembershipTrace> traces);

}  // namespace knet

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "knet/network.hpp"
#include "knet/stats.hpp"

namespace knet {

struct Partition {
  std::vector<int> labels;  // 0..k-1, numbered by smallest member id
  double modularity = 0.0;

  int modules() const;
};

struct CoreAssignment {
  std::vector<bool> is_core;
  double rho = 0.0;       // skeleton weight of edges touching the core
  double rho_norm = 0.0;  // rho / total skeleton weight
  double score = 0.0;     // rho - |core| * (total weight / n)

  int core_size() const;
};

struct LeadLagEdge {
  int core = 0;
  int periphery = 0;
  Year delta = 0;  // year(core) - year(periphery)
  int module = -1;
};

struct LeadLagReport {
  std::vector<LeadLagEdge> edges;
  std::optional<stats::Summary> summary;
  std::optional<stats::TestResult> test;  // absent with < 2 values or zero variance

  std::vector<double> deltas() const;
};

/// Directed clustering over all triangle orientations of the binary
/// adjacency: ((A + A^T)^3)_ii / (2 [d_tot (d_tot - 1) - 2 d_recip]).
/// Equals the undirected 2T/(k(k-1)) on symmetric graphs.
double clustering_coefficient(const ConceptNetwork& network, int node);
std::vector<double> clustering_coefficients(const ConceptNetwork& network);

/// Newman modularity of `labels` on a symmetric weight matrix, with
/// resolution `gamma`.
double modularity(const Eigen::SparseMatrix<double>& w, std::span<const int> labels, double gamma = 1.0);

/// Agglomerative greedy modularity (Clauset-Newman-Moore) on the undirected
/// weighted skeleton. Merges the pair with the largest gain while the gain is
/// positive; equal gains go to the smallest label pair. Throws
/// "modularity undefined" on an edgeless network.
Partition greedy_modularity(const ConceptNetwork& network);
Partition greedy_modularity(const Eigen::SparseMatrix<double>& w);

/// Core score of a given core set on the skeleton.
CoreAssignment evaluate_core(const Eigen::SparseMatrix<double>& w, std::vector<bool> is_core);

/// Local search over single-node flips from a random bipartition, best of
/// `restarts`. Throws on an edgeless network.
CoreAssignment core_periphery(const ConceptNetwork& network, std::uint64_t seed, int restarts = 20);
CoreAssignment core_periphery(const Eigen::SparseMatrix<double>& w, std::uint64_t seed, int restarts = 20);

/// Year differences over directed edges with exactly one core endpoint.
LeadLagReport lead_lag(const ConceptNetwork& network, const CoreAssignment& assignment);

/// Greedy modules first, then a core per module; edges carry their module.
LeadLagReport lead_lag_per_module(const ConceptNetwork& network, std::uint64_t seed, int restarts = 20);

struct EpochLeadLag {
  Year cut = 0;
  int nodes = 0;
  LeadLagReport report;
};

/// Snapshots at `n_epochs` cut years equally spaced in unique-year count;
/// fewer epochs (with a warning on stderr) when there are fewer unique years.
std::vector<EpochLeadLag> epoch_lead_lag(const ConceptNetwork& network, int n_epochs, std::uint64_t seed,
                                         int restarts = 20);

/// Cut years used by epoch_lead_lag.
std::vector<Year> epoch_cuts(const ConceptNetwork& network, int n_epochs);

struct SubjectMetrics {
  int nodes = 0;
  int edges = 0;
  double clustering_mean = 0.0;
  double clustering_sd = 0.0;
  double modularity = 0.0;
  int modules = 0;
  double rho = 0.0;
  double rho_norm = 0.0;
  int core_size = 0;
};

SubjectMetrics subject_metrics(const ConceptNetwork& network, std::uint64_t seed, int restarts = 20);

}  // namespace knet

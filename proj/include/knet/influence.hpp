#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "knet/corpus.hpp"
#include "knet/homology.hpp"
#include "knet/network.hpp"
#include "knet/stats.hpp"

namespace knet {

struct UnionNetwork {
  ConceptNetwork network;  // subject "union", ids in title order
  std::map<std::string, std::vector<std::string>> subjects;  // title -> subjects containing it
  std::vector<std::string> warnings;
};

/// Title-keyed merge. Conflicting years keep the earliest (warned); an edge
/// present in several subjects keeps its largest weight (warned if they differ).
UnionNetwork build_union(std::span<const ConceptNetwork> networks);

/// Participation of union nodes, summed over the subjects containing each title.
ParticipationCounts union_participation(const UnionNetwork& u, std::span<const ConceptNetwork> networks,
                                        std::span<const ParticipationCounts> counts);

/// A(i, j) = weight of the edge j -> i.
Eigen::SparseMatrix<double> influence_adjacency(const ConceptNetwork& network);

struct SpectralRadius {
  double value = 0.0;
  int iterations = 0;
};

/// Spectral radius of |A|: power iteration on |A| + I restricted to each
/// strongly connected component, from a vector of ones, stopped when the
/// Collatz-Wielandt bounds agree to `tol` (relative). Throws with the last
/// bound gap after `max_iter` iterations.
SpectralRadius spectral_radius(const Eigen::SparseMatrix<double>& a, double tol = 1e-10, int max_iter = 10000);

struct NormalizedAdjacency {
  Eigen::SparseMatrix<double> matrix;  // A / (1 + lambda_max)
  double lambda_max = 0.0;
};

NormalizedAdjacency normalize_adjacency(const Eigen::SparseMatrix<double>& a);

/// sweep[k](i) = sum_{m=0}^{k} ((A^m) 1)_i^2 for k = 0..K, by K mat-vecs.
std::vector<Eigen::VectorXd> impulse_response_sweep(const Eigen::SparseMatrix<double>& a_norm, int K);

Eigen::VectorXd impulse_response(const Eigen::SparseMatrix<double>& a_norm, int K = 5);

struct InfluenceScores {
  std::vector<std::string> titles;
  std::vector<Eigen::VectorXd> by_horizon;  // index k = horizon k
  double lambda_max = 0.0;
  int horizon() const { return static_cast<int>(by_horizon.size()) - 1; }
  const Eigen::VectorXd& score() const { return by_horizon.back(); }
};

InfluenceScores influence_scores(const ConceptNetwork& network, int K = 5);

struct HorizonCorrelation {
  int horizon = 0;
  std::optional<stats::TestResult> birth;  // empty when undefined (constant input)
  std::optional<stats::TestResult> death;
};

/// Pearson r between scores and birth/death counts for every horizon 1..K.
std::vector<HorizonCorrelation> correlate_participation(const InfluenceScores& scores,
                                                        const ParticipationCounts& counts);

struct NobelComparison {
  std::size_t nobel_nodes = 0;
  std::size_t other_nodes = 0;
  std::vector<std::string> unmatched;  // prize titles without a union node
  stats::TestResult birth;
  stats::TestResult death;
  stats::CdfDifference birth_cdf;  // ECDF(nobel) - ECDF(other)
  stats::CdfDifference death_cdf;
};

/// Throws "empty Nobel intersection" or "empty complement".
NobelComparison nobel_comparison(const ConceptNetwork& network, const ParticipationCounts& counts,
                                 const NobelNodeSet& nobel);

}  // namespace knet

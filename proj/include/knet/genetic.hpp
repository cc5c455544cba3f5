#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "knet/network.hpp"
#include "knet/rng.hpp"
#include "knet/stats.hpp"

namespace knet {

struct EdgeDiff {
  double year_diff = 0.0;     // |year(source) - year(target)|
  double sum_abs_diff = 0.0;  // sum_k |u_k - v_k|
  double man_dist = 0.0;      // size of the symmetric difference of supports
};

struct MutationParams {
  double p = 0.0;  // point mutation, per seed and year
  double i = 0.0;  // insertion
  double d = 0.0;  // deletion (always equal to i)
  double sim_mean = 0.0;
  double sim_sd = 0.0;
  std::vector<double> pool;  // nonzero tf-idf values of the source network

  // Diagnostics.
  double avg_abs_diff = 0.0;
  stats::Regression point_fit;  // sum_abs_diff ~ year_diff
  stats::Regression word_fit;   // man_dist ~ year_diff
  std::size_t edges = 0;
};

std::vector<EdgeDiff> edge_diffs(const ConceptNetwork& network);

/// Mean |x - y| over `pairs` draws of two values from the pool.
double average_abs_diff(std::span<const double> pool, std::size_t pairs, Rng& rng);

/// p = slope(sum_abs_diff ~ year_diff) / avg_abs_diff, i = d =
/// slope(man_dist ~ year_diff) / 2, all clamped to [0, 1]. Throws
/// "regression undefined" with fewer than two distinct year differences.
MutationParams calibrate(std::span<const EdgeDiff> diffs, double avg_abs_diff, std::span<const double> similarities);

/// Calibration from a real network; `seed` drives the avg-abs-diff sample.
MutationParams estimate_params(const ConceptNetwork& network, std::uint64_t seed, std::size_t pool_pairs = 100000);

struct Seed {
  int parent = 0;
  SparseVec vector;
  double threshold = 0.0;
};

struct MutationCounts {
  int point = 0;
  int insert = 0;
  int remove = 0;
};

/// One year of mutation: point, then insertion, then deletion, each with its
/// probability. `vocab_size` bounds insert positions.
MutationCounts mutate_seed(Seed& seed, const MutationParams& params, Eigen::Index vocab_size, Rng& rng);

/// Threshold ~ Normal(sim_mean, sim_sd) truncated to (0, 1).
double draw_threshold(const MutationParams& params, Rng& rng);

/// The ten strongest non-stopword tokens of a vector (ties by token id).
std::vector<std::string> title_words(const SparseVec& v, const std::vector<std::string>& vocab, std::size_t count = 10);

struct SimEvent {
  Year year = 0;
  std::string kind;  // "birth" | "edge" | "mutations"
  int node = -1;     // birth: new node; edge: source
  int other = -1;    // birth: parent; edge: target
  double value = 0.0;      // birth: similarity to parent; edge: weight
  double threshold = 0.0;  // birth only
  MutationCounts mutations;
};

struct SimTrace {
  ConceptNetwork network;
  std::vector<std::pair<Year, int>> node_counts;  // after each simulated year
  std::vector<SimEvent> events;
  std::vector<double> birth_similarity;  // similarity to parent at birth
  int unconnected_births = 0;
  Year start_year = 0;
  Year end_year = 0;
};

struct SimulationOptions {
  Year start_year = 1;       // initial nodes: year < start_year
  Year max_year = 2200;
  int target_nodes = -1;     // -1: size of the real network
  std::size_t match_words = 6;
};

/// Grows the initial subgraph year by year until it has target_nodes nodes or
/// max_year is passed. Throws when no node predates start_year.
SimTrace run_simulation(const ConceptNetwork& real, const MutationParams& params, std::uint64_t seed,
                        const SimulationOptions& options);

nlohmann::json params_to_json(const MutationParams& params);
nlohmann::json trace_to_json(const SimTrace& trace);

}  // namespace knet

#include "knet/structure.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "knet/error.hpp"
#include "knet/rng.hpp"

namespace knet {

int Partition::modules() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

int CoreAssignment::core_size() const { return static_cast<int>(std::count(is_core.begin(), is_core.end(), true)); }

std::vector<double> LeadLagReport::deltas() const {
  std::vector<double> d;
  d.reserve(edges.size());
  for (const auto& e : edges) d.push_back(static_cast<double>(e.delta));
  return d;
}

namespace {

// S = A + A^T on the binary adjacency, as sorted (neighbor, multiplicity) rows.
struct SymmetricCounts {
  std::vector<std::map<int, int>> rows;
  std::vector<int> total_degree;
  std::vector<int> reciprocal;
};

SymmetricCounts symmetric_counts(const ConceptNetwork& network) {
  SymmetricCounts s;
  const auto n = static_cast<std::size_t>(network.size());
  s.rows.resize(n);
  s.total_degree.assign(n, 0);
  s.reciprocal.assign(n, 0);
  for (const auto& e : network.edges) {
    ++s.rows[e.source][e.target];
    ++s.rows[e.target][e.source];
    ++s.total_degree[e.source];
    ++s.total_degree[e.target];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, count] : s.rows[i]) s.reciprocal[i] += (count == 2);
  }
  return s;
}

double clustering_from(const SymmetricCounts& s, int i) {
  const double d = s.total_degree[i];
  const double denom = 2.0 * (d * (d - 1.0) - 2.0 * s.reciprocal[i]);
  if (denom <= 0.0) return 0.0;
  double closed = 0.0;
  for (const auto& [j, sij] : s.rows[i]) {
    for (const auto& [k, sjk] : s.rows[j]) {
      const auto it = s.rows[k].find(i);
      if (it != s.rows[k].end()) closed += static_cast<double>(sij) * sjk * it->second;
    }
  }
  return closed / denom;
}

LeadLagReport finish_report(std::vector<LeadLagEdge> edges) {
  LeadLagReport report;
  report.edges = std::move(edges);
  if (report.edges.empty()) return report;
  const auto d = report.deltas();
  report.summary = stats::summarize(d);
  if (d.size() >= 2 && stats::variance(d) > 0.0) report.test = stats::t_test_one_sample(d);
  return report;
}

void shuffle(std::vector<int>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

double clustering_coefficient(const ConceptNetwork& network, int node) {
  if (node < 0 || node >= network.size()) throw Error("unknown node " + std::to_string(node));
  return clustering_from(symmetric_counts(network), node);
}

std::vector<double> clustering_coefficients(const ConceptNetwork& network) {
  const auto s = symmetric_counts(network);
  std::vector<double> c(network.nodes.size());
  for (int i = 0; i < network.size(); ++i) c[i] = clustering_from(s, i);
  return c;
}

double modularity(const Eigen::SparseMatrix<double>& w, std::span<const int> labels, double gamma) {
  const double m2 = w.sum();
  if (m2 <= 0.0) throw Error("modularity undefined: network has no edges");
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> inside(k, 0.0), strength(k, 0.0);
  for (int col = 0; col < w.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
      strength[labels[it.col()]] += it.value();
      if (labels[it.row()] == labels[it.col()]) inside[labels[it.col()]] += it.value();
    }
  }
  double q = 0.0;
  for (int c = 0; c < k; ++c) q += inside[c] / m2 - gamma * (strength[c] / m2) * (strength[c] / m2);
  return q;
}

Partition greedy_modularity(const ConceptNetwork& network) { return greedy_modularity(undirected_skeleton(network)); }

Partition greedy_modularity(const Eigen::SparseMatrix<double>& w) {
  const double m2 = w.sum();
  if (m2 <= 0.0) throw Error("modularity undefined: network has no edges");
  const int n = static_cast<int>(w.rows());
  std::vector<std::map<int, double>> e(n);  // e[i][j]: fraction of edge ends between communities i and j
  std::vector<double> a(n, 0.0);
  std::vector<double> inside(n, 0.0);
  for (int col = 0; col < w.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      a[j] += it.value() / m2;
      if (i == j) {
        inside[i] += it.value() / m2;
      } else {
        e[i][j] += it.value() / m2;
      }
    }
  }
  double q = 0.0;
  for (int i = 0; i < n; ++i) q += inside[i] - a[i] * a[i];

  auto gain = [&](int i, int j) {
    const int lo = std::min(i, j), hi = std::max(i, j);
    return 2.0 * (e[lo].at(hi) - a[lo] * a[hi]);
  };
  using Key = std::tuple<double, int, int>;  // (-gain, i, j), i < j
  std::set<Key> heap;
  for (int i = 0; i < n; ++i) {
    for (const auto& [j, v] : e[i]) {
      if (i < j) heap.emplace(-gain(i, j), i, j);
    }
  }
  std::vector<int> community(n);
  std::iota(community.begin(), community.end(), 0);
  while (!heap.empty()) {
    const auto [neg, i, j] = *heap.begin();
    if (-neg <= 0.0) break;
    for (int x : {i, j}) {
      for (const auto& [k, v] : e[x]) heap.erase(Key(-gain(x, k), std::min(x, k), std::max(x, k)));
    }
    q += -neg;
    inside[i] += inside[j] + 2.0 * e[i][j];
    for (const auto& [k, v] : e[j]) {
      if (k == i) continue;
      e[i][k] += v;
      e[k][i] = e[i][k];
      e[k].erase(j);
    }
    e[i].erase(j);
    e[j].clear();
    a[i] += a[j];
    a[j] = 0.0;
    for (int& c : community) {
      if (c == j) c = i;
    }
    for (const auto& [k, v] : e[i]) heap.emplace(-gain(i, k), std::min(i, k), std::max(i, k));
  }

  Partition p;
  p.labels.assign(n, -1);
  std::map<int, int> relabel;
  for (int v = 0; v < n; ++v) {
    const auto [it, fresh] = relabel.emplace(community[v], static_cast<int>(relabel.size()));
    p.labels[v] = it->second;
  }
  p.modularity = q;
  return p;
}

CoreAssignment evaluate_core(const Eigen::SparseMatrix<double>& w, std::vector<bool> is_core) {
  CoreAssignment c;
  double total = 0.0;
  for (int col = 0; col < w.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
      if (it.row() >= it.col()) continue;
      total += it.value();
      if (is_core[it.row()] || is_core[it.col()]) c.rho += it.value();
    }
  }
  c.is_core = std::move(is_core);
  c.rho_norm = total > 0.0 ? c.rho / total : 0.0;
  const double n = static_cast<double>(w.rows());
  c.score = c.rho - c.core_size() * (n > 0 ? total / n : 0.0);
  return c;
}

CoreAssignment core_periphery(const ConceptNetwork& network, std::uint64_t seed, int restarts) {
  return core_periphery(undirected_skeleton(network), seed, restarts);
}

CoreAssignment core_periphery(const Eigen::SparseMatrix<double>& w, std::uint64_t seed, int restarts) {
  if (restarts < 1) throw RangeError("restarts must be at least 1");
  const int n = static_cast<int>(w.rows());
  double total = 0.0;
  for (int col = 0; col < w.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
      if (it.row() < it.col()) total += it.value();
    }
  }
  if (total <= 0.0) throw Error("core-periphery undefined: network has no edges");
  const double penalty = total / n;

  Rng rng(seed);
  std::vector<bool> best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> order(n);
  for (int r = 0; r < restarts; ++r) {
    std::vector<bool> core(n);
    for (int v = 0; v < n; ++v) core[v] = rng.bernoulli(0.5);
    // uncovered[v]: weight from v to periphery nodes.
    std::vector<double> uncovered(n, 0.0);
    for (int col = 0; col < w.outerSize(); ++col) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
        if (!core[it.row()] && it.row() != it.col()) uncovered[it.col()] += it.value();
      }
    }
    bool improved = true;
    while (improved) {
      improved = false;
      std::iota(order.begin(), order.end(), 0);
      shuffle(order, rng);
      for (int v : order) {
        const double delta = core[v] ? penalty - uncovered[v] : uncovered[v] - penalty;
        if (delta <= 1e-12) continue;
        core[v] = !core[v];
        for (Eigen::SparseMatrix<double>::InnerIterator it(w, v); it; ++it) {
          if (it.row() != v) uncovered[it.row()] += core[v] ? -it.value() : it.value();
        }
        improved = true;
      }
    }
    const double score = evaluate_core(w, core).score;
    if (score > best_score + 1e-12) {
      best_score = score;
      best = core;
    }
  }
  return evaluate_core(w, best);
}

LeadLagReport lead_lag(const ConceptNetwork& network, const CoreAssignment& assignment) {
  std::vector<LeadLagEdge> out;
  for (const auto& e : network.edges) {
    const bool s = assignment.is_core[e.source];
    const bool t = assignment.is_core[e.target];
    if (s == t) continue;
    const int core = s ? e.source : e.target;
    const int periphery = s ? e.target : e.source;
    out.push_back({core, periphery, network.nodes[core].year - network.nodes[periphery].year, -1});
  }
  return finish_report(std::move(out));
}

LeadLagReport lead_lag_per_module(const ConceptNetwork& network, std::uint64_t seed, int restarts) {
  if (network.edges.empty()) return {};
  const auto partition = greedy_modularity(network);
  std::vector<LeadLagEdge> out;
  for (int m = 0; m < partition.modules(); ++m) {
    std::vector<int> local(network.nodes.size(), -1);
    int size = 0;
    for (int v = 0; v < network.size(); ++v) {
      if (partition.labels[v] == m) local[v] = size++;
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& e : network.edges) {
      if (local[e.source] < 0 || local[e.target] < 0) continue;
      triplets.emplace_back(local[e.source], local[e.target], e.weight);
      triplets.emplace_back(local[e.target], local[e.source], e.weight);
    }
    if (triplets.empty()) continue;
    Eigen::SparseMatrix<double> w(size, size);
    w.setFromTriplets(triplets.begin(), triplets.end());
    const auto core = core_periphery(w, derive_seed(seed, "module " + std::to_string(m)), restarts);
    for (const auto& e : network.edges) {
      if (local[e.source] < 0 || local[e.target] < 0) continue;
      const bool s = core.is_core[local[e.source]];
      const bool t = core.is_core[local[e.target]];
      if (s == t) continue;
      const int c = s ? e.source : e.target;
      const int p = s ? e.target : e.source;
      out.push_back({c, p, network.nodes[c].year - network.nodes[p].year, m});
    }
  }
  return finish_report(std::move(out));
}

std::vector<Year> epoch_cuts(const ConceptNetwork& network, int n_epochs) {
  if (n_epochs < 1) throw RangeError("n_epochs must be at least 1");
  const auto years = make_filtration(network).years;
  const int u = static_cast<int>(years.size());
  const int n = std::min(n_epochs, u);
  std::vector<Year> cuts;
  for (int k = 0; k < n; ++k) {
    const auto idx = std::lround(static_cast<double>(k + 1) * u / n) - 1;
    cuts.push_back(years[static_cast<std::size_t>(idx)]);
  }
  return cuts;
}

std::vector<EpochLeadLag> epoch_lead_lag(const ConceptNetwork& network, int n_epochs, std::uint64_t seed,
                                         int restarts) {
  const auto cuts = epoch_cuts(network, n_epochs);
  if (static_cast<int>(cuts.size()) < n_epochs) {
    std::cerr << "warning: " << network.subject << " has " << cuts.size() << " unique years; using "
              << cuts.size() << " epochs instead of " << n_epochs << '\n';
  }
  std::vector<EpochLeadLag> out;
  for (Year cut : cuts) {
    EpochLeadLag epoch;
    epoch.cut = cut;
    const auto snap = snapshot_at(network, cut);
    epoch.nodes = snap.size();
    if (!snap.edges.empty()) {
      std::vector<int> original;
      for (const auto& n : network.nodes) {
        if (n.year <= cut) original.push_back(n.id);
      }
      epoch.report = lead_lag(snap, core_periphery(snap, seed, restarts));
      for (auto& e : epoch.report.edges) {
        e.core = original[e.core];
        e.periphery = original[e.periphery];
      }
    }
    out.push_back(std::move(epoch));
  }
  return out;
}

SubjectMetrics subject_metrics(const ConceptNetwork& network, std::uint64_t seed, int restarts) {
  SubjectMetrics m;
  m.nodes = network.size();
  m.edges = static_cast<int>(network.edges.size());
  const auto c = clustering_coefficients(network);
  if (!c.empty()) m.clustering_mean = stats::mean(c);
  if (c.size() >= 2) m.clustering_sd = std::sqrt(stats::variance(c));
  if (!network.edges.empty()) {
    const auto p = greedy_modularity(network);
    m.modularity = p.modularity;
    m.modules = p.modules();
    const auto core = core_periphery(network, seed, restarts);
    m.rho = core.rho;
    m.rho_norm = core.rho_norm;
    m.core_size = core.core_size();
  }
  return m;
}

}  // namespace knet

#include "knet/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "knet/error.hpp"
#include "knet/rng.hpp"

namespace knet {

MultilayerNetwork build_multilayer(const ConceptNetwork& network, double omega) {
  if (!(omega > 0.0)) throw RangeError("interslice weight must be > 0");
  MultilayerNetwork ml;
  ml.omega = omega;
  ml.years = make_filtration(network).years;
  ml.birth_layer.resize(network.nodes.size());
  for (const auto& n : network.nodes) {
    ml.birth_layer[n.id] =
        static_cast<int>(std::lower_bound(ml.years.begin(), ml.years.end(), n.year) - ml.years.begin());
  }
  for (Year t : ml.years) ml.layers.push_back(undirected_skeleton(network, t));
  return ml;
}

namespace {

struct LayerStats {
  std::vector<Eigen::VectorXd> degree;
  std::vector<double> total;  // sum of degrees (2m)
  double two_mu = 0.0;
};

LayerStats layer_stats(const MultilayerNetwork& ml) {
  LayerStats st;
  const int n = ml.node_count();
  for (const auto& w : ml.layers) {
    Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < w.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(w, j); it; ++it) k(j) += it.value();
    }
    st.total.push_back(k.sum());
    st.two_mu += k.sum();
    st.degree.push_back(std::move(k));
  }
  for (int s = 1; s < ml.layer_count(); ++s) {
    for (int i = 0; i < n; ++i) {
      if (ml.present(i, s - 1)) st.two_mu += 2.0 * ml.omega;
    }
  }
  return st;
}

double modularity_with(const MultilayerNetwork& ml, const LayerStats& st, const LayerLabels& labels, double gamma) {
  if (st.two_mu <= 0.0) throw Error("modularity undefined: multilayer network has no weight");
  double q = 0.0;
  for (int s = 0; s < ml.layer_count(); ++s) {
    const auto& w = ml.layers[s];
    for (int j = 0; j < w.outerSize(); ++j) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(w, j); it; ++it) {
        if (labels[s][it.row()] == labels[s][j]) q += it.value();
      }
    }
    if (st.total[s] > 0.0) {
      std::unordered_map<int, double> tot;
      for (int i = 0; i < ml.node_count(); ++i) {
        if (ml.present(i, s)) tot[labels[s][i]] += st.degree[s](i);
      }
      for (const auto& [c, k] : tot) q -= gamma * k * k / st.total[s];
    }
    if (s > 0) {
      for (int i = 0; i < ml.node_count(); ++i) {
        if (ml.present(i, s - 1) && labels[s - 1][i] == labels[s][i]) q += 2.0 * ml.omega;
      }
    }
  }
  return q / st.two_mu;
}

}  // namespace

double multislice_modularity(const MultilayerNetwork& ml, const LayerLabels& labels, double gamma) {
  return modularity_with(ml, layer_stats(ml), labels, gamma);
}

namespace {

// A node of the (possibly aggregated) supra-graph.
struct LouvainNode {
  std::vector<std::pair<int, double>> links;        // other nodes, no self-loops
  std::vector<std::pair<int, double>> layer_degree;  // (layer, degree), sorted by layer
};

struct Louvain {
  const LayerStats& st;
  double gamma;
  double quality;
  Rng& rng;

  // One level of local moving; returns community per node, or empty if no node moved.
  std::vector<int> move_nodes(const std::vector<LouvainNode>& g) {
    std::vector<int> comm(g.size());
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<std::map<int, double>> tot(g.size());  // community -> layer -> degree
    for (std::size_t u = 0; u < g.size(); ++u) {
      for (const auto& [s, k] : g[u].layer_degree) tot[u][s] += k;
    }
    auto null_term = [&](std::size_t u, int c) {
      double x = 0.0;
      for (const auto& [s, k] : g[u].layer_degree) {
        if (st.total[s] <= 0.0) continue;
        const auto it = tot[c].find(s);
        if (it != tot[c].end()) x += gamma * k * it->second / st.total[s];
      }
      return x;
    };
    std::vector<std::size_t> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    bool any = false;
    for (;;) {
      for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
      const double before = quality;
      bool moved = false;
      for (std::size_t u : order) {
        const int own = comm[u];
        std::map<int, double> links;
        links[own] += 0.0;
        for (const auto& [v, w] : g[u].links) links[comm[v]] += w;
        for (const auto& [s, k] : g[u].layer_degree) tot[own][s] -= k;
        const double own_gain = links[own] - null_term(u, own);
        int best = own;
        double best_gain = own_gain;
        for (const auto& [c, w] : links) {
          const double gain = w - null_term(u, c);
          if (gain > best_gain + 1e-14) {
            best_gain = gain;
            best = c;
          }
        }
        for (const auto& [s, k] : g[u].layer_degree) tot[best][s] += k;
        if (best != own) {
          comm[u] = best;
          quality += 2.0 * (best_gain - own_gain) / st.two_mu;
          moved = true;
        }
      }
      any = any || moved;
      if (!moved || quality - before < 1e-10) break;
    }
    if (!any) return {};
    return comm;
  }
};

std::vector<LouvainNode> aggregate(const std::vector<LouvainNode>& g, std::vector<int>& comm) {
  std::vector<int> index(g.size(), -1);
  int next = 0;
  for (int& c : comm) {
    if (index[c] < 0) index[c] = next++;
    c = index[c];
  }
  std::vector<std::map<int, double>> links(next), degree(next);
  for (std::size_t u = 0; u < g.size(); ++u) {
    const int cu = comm[u];
    for (const auto& [v, w] : g[u].links) {
      if (comm[v] != cu) links[cu][comm[v]] += w;
    }
    for (const auto& [s, k] : g[u].layer_degree) degree[cu][s] += k;
  }
  std::vector<LouvainNode> out(next);
  for (int c = 0; c < next; ++c) {
    out[c].links.assign(links[c].begin(), links[c].end());
    out[c].layer_degree.assign(degree[c].begin(), degree[c].end());
  }
  return out;
}

}  // namespace

TemporalModules detect_temporal_modules(const MultilayerNetwork& ml, double gamma, std::uint64_t seed) {
  const int L = ml.layer_count();
  const int n = ml.node_count();
  const LayerStats st = layer_stats(ml);

  LayerLabels labels(L, std::vector<int>(n, -1));
  std::vector<std::pair<int, int>> supra;  // (layer, node)
  for (int s = 0; s < L; ++s) {
    for (int i = 0; i < n; ++i) {
      if (!ml.present(i, s)) continue;
      labels[s][i] = static_cast<int>(supra.size());
      supra.emplace_back(s, i);
    }
  }
  TemporalModules out;
  if (supra.empty()) return out;

  std::vector<LouvainNode> g(supra.size());
  for (std::size_t u = 0; u < supra.size(); ++u) {
    const auto [s, i] = supra[u];
    for (Eigen::SparseMatrix<double>::InnerIterator it(ml.layers[s], i); it; ++it) {
      if (it.row() != i) g[u].links.emplace_back(labels[s][it.row()], it.value());
    }
    if (s > 0 && ml.present(i, s - 1)) g[u].links.emplace_back(labels[s - 1][i], ml.omega);
    if (s + 1 < L) g[u].links.emplace_back(labels[s + 1][i], ml.omega);
    g[u].layer_degree.emplace_back(s, st.degree[s](i));
  }

  Rng rng(seed);
  Louvain louvain{st, gamma, modularity_with(ml, st, labels, gamma), rng};
  std::vector<int> membership(supra.size());
  std::iota(membership.begin(), membership.end(), 0);
  for (;;) {
    auto comm = louvain.move_nodes(g);
    ++out.levels;
    if (comm.empty()) break;
    g = aggregate(g, comm);
    for (int& m : membership) m = comm[m];
  }

  std::unordered_map<int, int> relabel;
  for (std::size_t u = 0; u < supra.size(); ++u) {
    const auto [s, i] = supra[u];
    labels[s][i] = relabel.try_emplace(membership[u], static_cast<int>(relabel.size())).first->second;
  }
  out.labels = std::move(labels);
  out.quality = louvain.quality;
  return out;
}

std::vector<int> count_changes(const LayerLabels& labels) {
  std::vector<int> changes(labels.size(), 0);
  for (std::size_t s = 1; s < labels.size(); ++s) {
    for (std::size_t i = 0; i < labels[s].size(); ++i) {
      const int prev = labels[s - 1][i];
      if (prev >= 0 && labels[s][i] >= 0 && prev != labels[s][i]) ++changes[s];
    }
  }
  return changes;
}

double poisson_cost(std::span<const int> segment) {
  double sum = 0.0;
  for (int y : segment) sum += y;
  if (sum <= 0.0) return 0.0;
  return -sum * std::log(sum / static_cast<double>(segment.size())) + sum;
}

namespace {

constexpr std::size_t kMinSegment = 2;

// Splits a segment of length len can still take.
std::size_t capacity(std::size_t len) { return len / kMinSegment - 1; }

}  // namespace

Changepoints detect_changepoints(std::span<const int> signal, int q) {
  if (q < 1) throw RangeError("changepoint count q must be >= 1");
  if (signal.size() < kMinSegment * static_cast<std::size_t>(q + 1)) {
    throw Error("signal too short for " + std::to_string(q) + " changepoints: length " +
                std::to_string(signal.size()) + " < " + std::to_string(kMinSegment * (q + 1)));
  }
  for (int y : signal) {
    if (y < 0) throw RangeError("changepoint signal must be non-negative");
  }
  Changepoints out;
  std::vector<std::size_t> bounds = {0, signal.size()};
  auto cost = [&](std::size_t a, std::size_t b) { return poisson_cost(signal.subspan(a, b - a)); };
  double total = cost(0, signal.size());
  out.log_likelihood.push_back(-total);

  for (int step = 0; step < q; ++step) {
    const std::size_t remaining = static_cast<std::size_t>(q - step - 1);
    std::size_t total_capacity = 0;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) total_capacity += capacity(bounds[k + 1] - bounds[k]);

    double best_gain = -1.0;
    std::size_t best_split = 0;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      const std::size_t a = bounds[k], b = bounds[k + 1];
      if (b - a < 2 * kMinSegment) continue;
      const double whole = cost(a, b);
      const std::size_t others = total_capacity - capacity(b - a);
      for (std::size_t m = a + kMinSegment; m + kMinSegment <= b; ++m) {
        if (others + capacity(m - a) + capacity(b - m) < remaining) continue;
        const double g = whole - cost(a, m) - cost(m, b);
        if (g > best_gain + 1e-12) {
          best_gain = g;
          best_split = m;
        }
      }
    }
    bounds.insert(std::upper_bound(bounds.begin(), bounds.end(), best_split), best_split);
    total -= best_gain;
    out.log_likelihood.push_back(-total);
  }
  out.indices.assign(bounds.begin() + 1, bounds.end() - 1);
  return out;
}

std::vector<Epoch> epochs_from(std::span<const int> changes, std::span<const std::size_t> changepoints,
                               std::span<const Year> years) {
  std::vector<std::size_t> bounds = {0};
  bounds.insert(bounds.end(), changepoints.begin(), changepoints.end());
  bounds.push_back(changes.size());
  std::vector<Epoch> epochs;
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const std::size_t a = bounds[k], b = bounds[k + 1];
    Epoch e;
    e.duration = static_cast<double>(b - a);
    e.mean_change = std::accumulate(changes.begin() + a, changes.begin() + b, 0.0) / e.duration;
    if (!years.empty()) {
      e.start_year = years[a];
      e.end_year = years[b - 1];
    }
    epochs.push_back(e);
  }
  return epochs;
}

MembershipTrace temporal_trace(const ConceptNetwork& network, const TemporalOptions& options, std::uint64_t seed) {
  MembershipTrace trace;
  trace.subject = network.subject;
  const auto ml = build_multilayer(network, options.omega);
  trace.years = ml.years;
  for (const auto& n : network.nodes) trace.titles.push_back(n.title);
  if (options.restarts < 1) throw RangeError("temporal restarts must be >= 1");
  auto modules = detect_temporal_modules(ml, options.gamma, seed);
  for (int r = 1; r < options.restarts; ++r) {
    auto other = detect_temporal_modules(ml, options.gamma, derive_seed(seed, "restart/" + std::to_string(r)));
    if (other.quality > modules.quality + 1e-12) modules = std::move(other);
  }
  trace.labels = std::move(modules.labels);
  trace.quality = modules.quality;
  trace.changes = count_changes(trace.labels);
  trace.changepoints = detect_changepoints(trace.changes, options.q);
  trace.epochs = epochs_from(trace.changes, trace.changepoints.indices, trace.years);
  return trace;
}

Signature epoch_signature(std::span<const MembershipTrace> traces) {
  if (traces.empty()) throw Error("epoch signature needs at least one trace");
  Signature sig;
  const std::size_t count = traces.front().epochs.size();
  if (count == 0) throw Error("trace for '" + traces.front().subject + "' has no epochs");
  sig.average.assign(count, Epoch{});
  for (const auto& t : traces) {
    if (t.epochs.size() != count) {
      throw Error("trace for '" + t.subject + "' has " + std::to_string(t.epochs.size()) + " epochs, expected " +
                  std::to_string(count));
    }
    sig.subjects.push_back(t.subject);
    sig.per_subject.push_back(t.epochs);
    for (std::size_t k = 0; k < count; ++k) {
      sig.average[k].mean_change += t.epochs[k].mean_change;
      sig.average[k].duration += t.epochs[k].duration;
    }
  }
  for (auto& e : sig.average) {
    e.mean_change /= static_cast<double>(traces.size());
    e.duration /= static_cast<double>(traces.size());
  }
  return sig;
}

}  // namespace knet

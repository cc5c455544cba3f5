#include "knet/influence.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "knet/error.hpp"

namespace knet {

UnionNetwork build_union(std::span<const ConceptNetwork> networks) {
  if (networks.empty()) throw Error("union needs at least one network");
  UnionNetwork u;
  std::map<std::string, const ConceptNode*> first;
  std::map<std::string, Year> year;
  for (const auto& net : networks) {
    for (const auto& n : net.nodes) {
      u.subjects[n.title].push_back(net.subject);
      auto [it, fresh] = year.try_emplace(n.title, n.year);
      if (fresh) {
        first[n.title] = &n;
      } else if (n.year != it->second) {
        u.warnings.push_back("conflicting years for '" + n.title + "': " + std::to_string(it->second) + " and " +
                             std::to_string(n.year) + "; keeping the earliest");
        if (n.year < it->second) {
          it->second = n.year;
          first[n.title] = &n;
        }
      }
    }
  }
  ConceptNetwork& out = u.network;
  out.subject = "union";
  std::map<std::string, int> id;
  for (const auto& [title, node] : first) {
    ConceptNode copy;
    copy.id = static_cast<int>(out.nodes.size());
    copy.title = title;
    copy.year = node->year;
    copy.provenance = node->provenance;
    id[title] = copy.id;
    out.nodes.push_back(std::move(copy));
  }
  std::map<std::pair<int, int>, double> edges;
  for (const auto& net : networks) {
    for (const auto& e : net.edges) {
      const std::pair key(id.at(net.nodes[e.source].title), id.at(net.nodes[e.target].title));
      auto [it, fresh] = edges.try_emplace(key, e.weight);
      if (!fresh && it->second != e.weight) {
        u.warnings.push_back("edge '" + out.nodes[key.first].title + "' -> '" + out.nodes[key.second].title +
                             "' has differing weights; keeping the largest");
        it->second = std::max(it->second, e.weight);
      }
    }
  }
  for (const auto& [key, w] : edges) out.edges.push_back({key.first, key.second, w});
  return u;
}

ParticipationCounts union_participation(const UnionNetwork& u, std::span<const ConceptNetwork> networks,
                                        std::span<const ParticipationCounts> counts) {
  if (networks.size() != counts.size()) throw Error("participation counts do not match the network list");
  ParticipationCounts total;
  total.birth.assign(u.network.nodes.size(), 0);
  total.death.assign(u.network.nodes.size(), 0);
  for (std::size_t k = 0; k < networks.size(); ++k) {
    const auto& net = networks[k];
    if (counts[k].birth.size() != net.nodes.size() || counts[k].death.size() != net.nodes.size()) {
      throw Error("participation counts for '" + net.subject + "' do not cover its nodes");
    }
    for (const auto& n : net.nodes) {
      const int v = u.network.find(n.title);
      if (v < 0) throw Error("title '" + n.title + "' missing from the union network");
      total.birth[v] += counts[k].birth[n.id];
      total.death[v] += counts[k].death[n.id];
    }
  }
  return total;
}

Eigen::SparseMatrix<double> influence_adjacency(const ConceptNetwork& network) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(network.edges.size());
  for (const auto& e : network.edges) t.emplace_back(e.target, e.source, e.weight);
  const auto n = static_cast<Eigen::Index>(network.nodes.size());
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

namespace {

// Tarjan's algorithm without recursion; components are lists of vertex ids.
std::vector<std::vector<int>> strongly_connected(const Eigen::SparseMatrix<double>& a) {
  const int n = static_cast<int>(a.cols());
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<int>> out;
  int counter = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<int, Eigen::SparseMatrix<double>::InnerIterator>> work;
    auto open = [&](int v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      work.emplace_back(v, Eigen::SparseMatrix<double>::InnerIterator(a, v));
    };
    open(root);
    while (!work.empty()) {
      auto& [v, it] = work.back();
      if (it) {
        const int w = static_cast<int>(it.row());
        ++it;
        if (index[w] < 0) {
          open(w);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const int done = v;
      work.pop_back();
      if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
      if (low[done] == index[done]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != done);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace

SpectralRadius spectral_radius(const Eigen::SparseMatrix<double>& a, double tol, int max_iter) {
  if (a.rows() != a.cols()) throw Error("adjacency must be square");
  const Eigen::SparseMatrix<double> abs_a = a.cwiseAbs();
  SpectralRadius out;
  std::vector<int> where(static_cast<std::size_t>(a.cols()), -1);
  for (const auto& comp : strongly_connected(abs_a)) {
    const auto m = static_cast<Eigen::Index>(comp.size());
    for (Eigen::Index k = 0; k < m; ++k) where[comp[k]] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index k = 0; k < m; ++k) {
      t.emplace_back(k, k, 1.0);
      for (Eigen::SparseMatrix<double>::InnerIterator it(abs_a, comp[k]); it; ++it) {
        const int r = where[it.row()];
        if (r >= 0) t.emplace_back(r, k, it.value());
      }
    }
    for (int v : comp) where[v] = -1;
    if (t.size() == static_cast<std::size_t>(m)) continue;  // no internal edges: radius 0

    Eigen::SparseMatrix<double> shifted(m, m);
    shifted.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd x = Eigen::VectorXd::Ones(m);
    double lo = 0.0, hi = 0.0;
    int iter = 0;
    for (;; ++iter) {
      if (iter >= max_iter) {
        throw Error("power iteration did not converge after " + std::to_string(max_iter) +
                    " iterations (bound gap " + std::to_string(hi - lo) + ")");
      }
      const Eigen::VectorXd y = shifted * x;
      const Eigen::ArrayXd ratio = y.array() / x.array();
      lo = ratio.minCoeff();
      hi = ratio.maxCoeff();
      x = y / y.maxCoeff();
      if (hi - lo <= tol * std::max(1.0, hi)) break;
    }
    out.iterations += iter + 1;
    out.value = std::max(out.value, 0.5 * (lo + hi) - 1.0);
  }
  return out;
}

NormalizedAdjacency normalize_adjacency(const Eigen::SparseMatrix<double>& a) {
  NormalizedAdjacency out;
  out.lambda_max = spectral_radius(a).value;
  out.matrix = a / (1.0 + out.lambda_max);
  return out;
}

std::vector<Eigen::VectorXd> impulse_response_sweep(const Eigen::SparseMatrix<double>& a_norm, int K) {
  if (K < 0) throw RangeError("horizon K must be >= 0");
  Eigen::VectorXd x = Eigen::VectorXd::Ones(a_norm.rows());
  std::vector<Eigen::VectorXd> sweep = {x.cwiseAbs2()};
  for (int k = 1; k <= K; ++k) {
    x = a_norm * x;
    sweep.push_back(sweep.back() + x.cwiseAbs2());
  }
  return sweep;
}

Eigen::VectorXd impulse_response(const Eigen::SparseMatrix<double>& a_norm, int K) {
  return impulse_response_sweep(a_norm, K).back();
}

InfluenceScores influence_scores(const ConceptNetwork& network, int K) {
  InfluenceScores s;
  for (const auto& n : network.nodes) s.titles.push_back(n.title);
  const auto norm = normalize_adjacency(influence_adjacency(network));
  s.lambda_max = norm.lambda_max;
  s.by_horizon = impulse_response_sweep(norm.matrix, K);
  return s;
}

namespace {

std::optional<stats::TestResult> try_pearson(const Eigen::VectorXd& x, const std::vector<int>& counts) {
  const std::vector<double> a(x.data(), x.data() + x.size());
  const std::vector<double> b(counts.begin(), counts.end());
  auto constant = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
  };
  if (a.size() < 3 || constant(a) || constant(b)) return std::nullopt;
  return stats::pearson(a, b);
}

std::vector<double> pick(const std::vector<int>& counts, const std::vector<bool>& mask, bool value) {
  std::vector<double> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (mask[i] == value) out.push_back(counts[i]);
  }
  return out;
}

}  // namespace

std::vector<HorizonCorrelation> correlate_participation(const InfluenceScores& scores,
                                                        const ParticipationCounts& counts) {
  const auto n = scores.titles.size();
  if (counts.birth.size() != n || counts.death.size() != n) {
    throw Error("participation counts do not cover the scored nodes");
  }
  std::vector<HorizonCorrelation> out;
  for (int k = 1; k <= scores.horizon(); ++k) {
    out.push_back({k, try_pearson(scores.by_horizon[k], counts.birth), try_pearson(scores.by_horizon[k], counts.death)});
  }
  return out;
}

NobelComparison nobel_comparison(const ConceptNetwork& network, const ParticipationCounts& counts,
                                 const NobelNodeSet& nobel) {
  if (counts.birth.size() != network.nodes.size() || counts.death.size() != network.nodes.size()) {
    throw Error("participation counts do not cover the network nodes");
  }
  NobelComparison out;
  std::vector<bool> is_nobel(network.nodes.size(), false);
  for (const auto& title : nobel.prize_titles) {
    const int v = network.find(title);
    if (v < 0) {
      out.unmatched.push_back(title);
    } else {
      is_nobel[v] = true;
    }
  }
  out.nobel_nodes = static_cast<std::size_t>(std::count(is_nobel.begin(), is_nobel.end(), true));
  out.other_nodes = network.nodes.size() - out.nobel_nodes;
  if (out.nobel_nodes == 0) throw Error("empty Nobel intersection");
  if (out.other_nodes == 0) throw Error("empty complement");
  const auto nb = pick(counts.birth, is_nobel, true), ob = pick(counts.birth, is_nobel, false);
  const auto nd = pick(counts.death, is_nobel, true), od = pick(counts.death, is_nobel, false);
  out.birth = stats::ks_two_sample(nb, ob);
  out.death = stats::ks_two_sample(nd, od);
  out.birth_cdf = stats::cdf_difference(nb, ob);
  out.death_cdf = stats::cdf_difference(nd, od);
  return out;
}

}  // namespace knet

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "doctest.h"
#include "fixtures/graphs.hpp"
#include "knet/error.hpp"
#include "knet/structure.hpp"
#include "knet/temporal.hpp"

using namespace knet;

namespace {

// Direct transcription of the multislice quality over all (i, s, j, r).
double multislice_oracle(const MultilayerNetwork& ml, const LayerLabels& g, double gamma) {
  const int L = ml.layer_count();
  const int n = ml.node_count();
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> k;
  std::vector<double> m2;
  for (const auto& w : ml.layers) {
    A.emplace_back(Eigen::MatrixXd(w));
    k.emplace_back(A.back().rowwise().sum());
    m2.push_back(k.back().sum());
  }
  auto C = [&](int j, int s, int r) {
    return std::abs(s - r) == 1 && ml.present(j, std::min(s, r)) ? ml.omega : 0.0;
  };
  double two_mu = 0.0;
  for (int s = 0; s < L; ++s) {
    for (int j = 0; j < n; ++j) {
      if (!ml.present(j, s)) continue;
      double c = 0.0;
      for (int r = 0; r < L; ++r) c += C(j, s, r);
      two_mu += k[s](j) + c;
    }
  }
  double q = 0.0;
  for (int s = 0; s < L; ++s) {
    for (int r = 0; r < L; ++r) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (!ml.present(i, s) || !ml.present(j, r) || g[s][i] != g[r][j]) continue;
          double b = 0.0;
          if (s == r && m2[s] > 0.0) b += A[s](i, j) - gamma * k[s](i) * k[s](j) / m2[s];
          if (i == j) b += C(j, s, r);
          q += b;
        }
      }
    }
  }
  return q / two_mu;
}

// Two dense blocks joined by a single weak edge.
Eigen::SparseMatrix<double> planted_blocks(std::uint64_t seed, int half) {
  Rng rng(seed);
  std::vector<Eigen::Triplet<double>> t;
  const int n = 2 * half;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same = (i < half) == (j < half);
      if (same ? rng.bernoulli(0.8) : (i == 0 && j == half)) {
        const double w = same ? 0.5 + rng.uniform() : 0.1;
        t.emplace_back(i, j, w);
        t.emplace_back(j, i, w);
      }
    }
  }
  Eigen::SparseMatrix<double> w(n, n);
  w.setFromTriplets(t.begin(), t.end());
  return w;
}

MultilayerNetwork repeated_layers(const Eigen::SparseMatrix<double>& w, int layers, double omega) {
  MultilayerNetwork ml;
  ml.omega = omega;
  for (int s = 0; s < layers; ++s) {
    ml.years.push_back(2000 + s);
    ml.layers.push_back(w);
  }
  ml.birth_layer.assign(static_cast<std::size_t>(w.rows()), 0);
  return ml;
}

// Best single split by exhaustive scan of the Poisson likelihood.
std::size_t best_split_oracle(const std::vector<int>& y) {
  auto cost = [&](std::size_t a, std::size_t b) {
    double sum = 0.0;
    for (std::size_t k = a; k < b; ++k) sum += y[k];
    return sum == 0.0 ? 0.0 : sum - sum * std::log(sum / static_cast<double>(b - a));
  };
  double best = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t m = 2; m + 2 <= y.size(); ++m) {
    const double c = cost(0, m) + cost(m, y.size());
    if (c < best - 1e-12) {
      best = c;
      at = m;
    }
  }
  return at;
}

}  // namespace

TEST_CASE("build_multilayer: one layer per unique year, nested node sets") {
  const auto net = testing::random_network(3, 20, 0.15, 1900, 1905);
  const auto ml = build_multilayer(net, 0.01);
  std::set<Year> unique;
  for (const auto& n : net.nodes) unique.insert(n.year);
  REQUIRE(ml.layer_count() == static_cast<int>(unique.size()));
  for (int s = 0; s < ml.layer_count(); ++s) {
    for (int i = 0; i < ml.node_count(); ++i) {
      CHECK(ml.present(i, s) == (net.nodes[i].year <= ml.years[s]));
      if (!ml.present(i, s)) CHECK(ml.layers[s].col(i).nonZeros() == 0);
    }
  }
  CHECK_THROWS_AS(build_multilayer(net, 0.0), RangeError);

  const auto flat = testing::make_network(3, {{0, 1}, {1, 2}}, {1950, 1950, 1950});
  CHECK(build_multilayer(flat).layer_count() == 1);
}

TEST_CASE("detect_temporal_modules: tracked quality matches the formula") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const auto net = testing::random_network(seed, 14, 0.2, 1990, 1994);
    for (double omega : {0.01, 0.5}) {
      const auto ml = build_multilayer(net, omega);
      const auto modules = detect_temporal_modules(ml, 1.0, seed);
      CHECK(modules.quality == doctest::Approx(multislice_oracle(ml, modules.labels, 1.0)).epsilon(1e-9));
      CHECK(multislice_modularity(ml, modules.labels) ==
            doctest::Approx(multislice_oracle(ml, modules.labels, 1.0)).epsilon(1e-9));
      for (int s = 0; s < ml.layer_count(); ++s) {
        for (int i = 0; i < ml.node_count(); ++i) CHECK((modules.labels[s][i] >= 0) == ml.present(i, s));
      }
    }
  }
}

TEST_CASE("detect_temporal_modules: gamma enters the null term") {
  const auto net = testing::random_network(12, 12, 0.3, 2000, 2002);
  const auto ml = build_multilayer(net, 0.05);
  const auto modules = detect_temporal_modules(ml, 1.5, 4);
  CHECK(modules.quality == doctest::Approx(multislice_oracle(ml, modules.labels, 1.5)).epsilon(1e-9));
}

TEST_CASE("detect_temporal_modules: a single layer reduces to static modularity") {
  const auto w = planted_blocks(5, 8);
  const auto ml = repeated_layers(w, 1, 0.01);
  const auto modules = detect_temporal_modules(ml, 1.0, 9);
  CHECK(modules.quality == doctest::Approx(modularity(w, modules.labels[0])).epsilon(1e-9));
  CHECK(modules.quality >= greedy_modularity(w).modularity - 1e-9);
}

TEST_CASE("detect_temporal_modules: strong coupling gives identical layers") {
  const auto w = planted_blocks(6, 6);
  const auto ml = repeated_layers(w, 2, 10.0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto modules = detect_temporal_modules(ml, 1.0, seed);
    CHECK(modules.labels[0] == modules.labels[1]);
  }
}

TEST_CASE("detect_temporal_modules: planted modules stay put across layers") {
  int stable = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ml = repeated_layers(planted_blocks(100 + seed, 10), 5, 0.01);
    const auto modules = detect_temporal_modules(ml, 1.0, seed);
    const auto changes = count_changes(modules.labels);
    stable += std::accumulate(changes.begin(), changes.end(), 0) <= 1;
  }
  CHECK(stable >= 18);
}

TEST_CASE("detect_temporal_modules: deterministic for a seed") {
  const auto net = testing::random_network(8, 25, 0.1, 1900, 1910);
  const auto ml = build_multilayer(net, 0.01);
  const auto a = detect_temporal_modules(ml, 1.0, 77);
  const auto b = detect_temporal_modules(ml, 1.0, 77);
  CHECK(a.labels == b.labels);
  CHECK(a.quality == b.quality);
}

TEST_CASE("count_changes: flips, births and the per-node identity") {
  CHECK(count_changes({{0, 0, 1}, {0, 0, 1}, {0, 0, 1}}) == std::vector<int>{0, 0, 0});
  CHECK(count_changes({{0, 0, 1}, {0, 1, 1}, {0, 1, 1}}) == std::vector<int>{0, 1, 0});
  CHECK(count_changes({{0, -1}, {0, 3}, {0, 3}}) == std::vector<int>{0, 0, 0});

  Rng rng(4);
  LayerLabels labels(12, std::vector<int>(15, -1));
  for (int i = 0; i < 15; ++i) {
    const int birth = static_cast<int>(rng.below(12));
    for (int s = birth; s < 12; ++s) labels[s][i] = static_cast<int>(rng.below(3));
  }
  int flips = 0;
  for (int i = 0; i < 15; ++i) {
    for (int s = 1; s < 12; ++s) flips += labels[s - 1][i] >= 0 && labels[s - 1][i] != labels[s][i];
  }
  const auto changes = count_changes(labels);
  CHECK(changes[0] == 0);
  CHECK(std::accumulate(changes.begin(), changes.end(), 0) == flips);
}

TEST_CASE("detect_changepoints: step signal splits at the step") {
  const std::vector<int> y = {1, 1, 1, 1, 9, 9, 9, 9};
  CHECK(best_split_oracle(y) == 4);
  const auto cp = detect_changepoints(y, 3);
  REQUIRE(cp.indices.size() == 3);
  CHECK(std::find(cp.indices.begin(), cp.indices.end(), 4u) != cp.indices.end());
  CHECK(cp.indices == std::vector<std::size_t>{2, 4, 6});
  const auto one = detect_changepoints(y, 1);
  CHECK(one.indices == std::vector<std::size_t>{4});
}

TEST_CASE("detect_changepoints: first split agrees with an exhaustive scan") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y(10 + rng.below(30));
    for (auto& v : y) v = static_cast<int>(rng.poisson(1.0 + 6.0 * rng.uniform()));
    CHECK(detect_changepoints(y, 1).indices.front() == best_split_oracle(y));
  }
}

TEST_CASE("detect_changepoints: constant signals use the leftmost split") {
  const std::vector<int> y(12, 3);
  const auto a = detect_changepoints(y, 3);
  CHECK(a.indices == detect_changepoints(y, 3).indices);
  CHECK(a.indices.size() == 3);
  for (std::size_t k = 1; k < a.log_likelihood.size(); ++k) {
    CHECK(a.log_likelihood[k] == doctest::Approx(a.log_likelihood[0]));
  }
  CHECK(a.indices.front() == 2);
}

TEST_CASE("detect_changepoints: likelihood never decreases and segments stay long enough") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> y(8 + rng.below(40));
    for (auto& v : y) v = static_cast<int>(rng.poisson(0.5 + 4.0 * rng.uniform()));
    const auto cp = detect_changepoints(y, 3);
    REQUIRE(cp.indices.size() == 3);
    REQUIRE(cp.log_likelihood.size() == 4);
    for (std::size_t k = 1; k < 4; ++k) CHECK(cp.log_likelihood[k] >= cp.log_likelihood[k - 1] - 1e-9);
    std::size_t prev = 0;
    for (std::size_t c : cp.indices) {
      CHECK(c - prev >= 2);
      prev = c;
    }
    CHECK(y.size() - prev >= 2);
  }
}

TEST_CASE("detect_changepoints: recovers three planted Poisson steps") {
  const std::array<double, 4> rates = {1, 5, 1, 10};
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<int> y;
    for (double r : rates)
      for (int k = 0; k < 25; ++k) y.push_back(static_cast<int>(rng.poisson(r)));
    const auto cp = detect_changepoints(y, 3);
    bool ok = true;
    for (std::size_t k = 0; k < 3; ++k) {
      ok = ok && std::abs(static_cast<long>(cp.indices[k]) - static_cast<long>(25 * (k + 1))) <= 2;
    }
    recovered += ok;
  }
  CHECK(recovered >= 90);
}

TEST_CASE("detect_changepoints: short signal is an error") {
  CHECK_THROWS_AS(detect_changepoints(std::vector<int>{1, 2, 3, 4, 5, 6, 7}, 3), Error);
  CHECK_THROWS_AS(detect_changepoints(std::vector<int>{1, -2, 3, 4, 5, 6, 7, 8}, 3), RangeError);
}

TEST_CASE("epochs and signature arithmetic") {
  const std::vector<int> changes = {0, 2, 4, 1, 1, 1, 8, 0, 0, 0};
  const std::vector<Year> years = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const std::vector<std::size_t> cps = {2, 6, 7};
  const auto e = epochs_from(changes, cps, years);
  REQUIRE(e.size() == 4);
  CHECK(e[0].mean_change == doctest::Approx(1.0));
  CHECK(e[0].duration == 2);
  CHECK(e[1].mean_change == doctest::Approx(7.0 / 4));
  CHECK(e[2].mean_change == doctest::Approx(8.0));
  CHECK(e[2].start_year == 7);
  CHECK(e[3].duration == 3);
  CHECK(e[3].end_year == 10);

  MembershipTrace a, b;
  a.subject = "a";
  a.epochs = e;
  b.subject = "b";
  b.epochs = epochs_from(std::vector<int>{1, 1, 3, 3, 3, 3, 5, 5, 7, 7}, std::vector<std::size_t>{2, 6, 8}, years);
  const std::vector<MembershipTrace> one = {a};
  const auto single = epoch_signature(one);
  for (int k = 0; k < 4; ++k) CHECK(single.average[k].mean_change == e[k].mean_change);

  const std::vector<MembershipTrace> both = {a, b};
  const auto sig = epoch_signature(both);
  CHECK(sig.average[0].mean_change == doctest::Approx((1.0 + 1.0) / 2));
  CHECK(sig.average[1].mean_change == doctest::Approx((7.0 / 4 + 3.0) / 2));
  CHECK(sig.average[2].duration == doctest::Approx((1.0 + 2.0) / 2));
  CHECK(sig.average[3].mean_change == doctest::Approx((0.0 + 7.0) / 2));

  b.epochs.pop_back();
  const std::vector<MembershipTrace> bad = {a, b};
  CHECK_THROWS_AS(epoch_signature(bad), Error);
}

TEST_CASE("temporal_trace: end to end on a growing network") {
  const auto net = testing::random_network(31, 40, 0.08, 1900, 1915);
  const auto a = temporal_trace(net, {}, 5);
  const auto b = temporal_trace(net, {}, 5);
  CHECK(a.labels == b.labels);
  CHECK(a.changes == b.changes);
  CHECK(a.changes.size() == a.years.size());
  CHECK(a.epochs.size() == 4);
  double duration = 0.0;
  for (const auto& e : a.epochs) duration += e.duration;
  CHECK(duration == a.years.size());
}

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fixtures/graphs.hpp"
#include "knet/error.hpp"
#include "knet/influence.hpp"

using namespace knet;

namespace {

ConceptNetwork named(std::string subject, std::vector<std::pair<std::string, Year>> nodes,
                     std::vector<std::tuple<std::string, std::string, double>> edges) {
  ConceptNetwork net;
  net.subject = std::move(subject);
  std::sort(nodes.begin(), nodes.end());
  for (const auto& [title, year] : nodes) {
    ConceptNode n;
    n.id = net.size();
    n.title = title;
    n.year = year;
    n.provenance = Provenance::parsed;
    net.nodes.push_back(std::move(n));
  }
  for (const auto& [s, t, w] : edges) net.edges.push_back({net.find(s), net.find(t), w});
  std::sort(net.edges.begin(), net.edges.end(), [](const ConceptEdge& a, const ConceptEdge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  return net;
}

double dense_radius(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// Diagonal of sum_m A^m B B^T (A^T)^m with B = ones, from dense powers.
Eigen::VectorXd dense_gramian_diagonal(const Eigen::MatrixXd& a, int K) {
  const auto n = a.rows();
  const Eigen::MatrixXd bbt = Eigen::MatrixXd::Ones(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int m = 0; m <= K; ++m) {
    gram += power * bbt * power.transpose();
    power = a * power;
  }
  return gram.diagonal();
}

}  // namespace

TEST_CASE("build_union: shared titles merge and edges union") {
  const auto a = named("a", {{"X", 1900}, {"Y", 1910}, {"Z", 1920}}, {{"X", "Y", 0.5}, {"Y", "Z", 0.2}});
  const auto b = named("b", {{"Y", 1905}, {"W", 1930}}, {{"W", "Y", 0.4}});
  const std::vector<ConceptNetwork> nets = {a, b};
  const auto u = build_union(nets);
  CHECK(u.network.size() == 4);
  CHECK(u.network.edges.size() == 3);
  const int y = u.network.find("Y");
  REQUIRE(y >= 0);
  CHECK(u.network.nodes[y].year == 1905);
  CHECK(u.subjects.at("Y") == std::vector<std::string>{"a", "b"});
  CHECK(u.warnings.size() == 1);
  u.network.validate();

  const std::vector<ConceptNetwork> one = {a};
  const auto ident = build_union(one);
  CHECK(ident.network.edges == a.edges);
  CHECK(ident.warnings.empty());
  CHECK_THROWS_AS(build_union(std::span<const ConceptNetwork>{}), Error);
}

TEST_CASE("build_union: duplicated edges keep the largest weight") {
  const auto a = named("a", {{"X", 1900}, {"Y", 1910}}, {{"X", "Y", 0.5}});
  const auto b = named("b", {{"X", 1900}, {"Y", 1910}}, {{"X", "Y", 0.7}});
  const std::vector<ConceptNetwork> nets = {a, b};
  const auto u = build_union(nets);
  REQUIRE(u.network.edges.size() == 1);
  CHECK(u.network.edges[0].weight == 0.7);
  CHECK(u.warnings.size() == 1);
}

TEST_CASE("union_participation: counts add across subjects") {
  const auto a = named("a", {{"X", 1900}, {"Y", 1910}}, {});
  const auto b = named("b", {{"Y", 1910}, {"Z", 1920}}, {});
  const std::vector<ConceptNetwork> nets = {a, b};
  const auto u = build_union(nets);
  const std::vector<ParticipationCounts> counts = {{{1, 2}, {0, 1}}, {{3, 4}, {5, 0}}};
  const auto total = union_participation(u, nets, counts);
  CHECK(total.birth == std::vector<int>{1, 5, 4});
  CHECK(total.death == std::vector<int>{0, 6, 0});
}

TEST_CASE("influence_adjacency: entry (i, j) is the weight of j -> i") {
  const auto net = testing::make_network(3, {{0, 2, 0.25}, {1, 0, 0.5}});
  const auto a = influence_adjacency(net);
  CHECK(a.coeff(2, 0) == 0.25);
  CHECK(a.coeff(0, 1) == 0.5);
  CHECK(a.coeff(0, 2) == 0.0);
}

TEST_CASE("spectral_radius: known spectra") {
  Eigen::SparseMatrix<double> zero(4, 4);
  CHECK(spectral_radius(zero).value == 0.0);
  const auto norm = normalize_adjacency(zero);
  CHECK(norm.matrix.nonZeros() == 0);

  const auto cycle = influence_adjacency(testing::make_network(2, {{0, 1}, {1, 0}}));
  CHECK(spectral_radius(cycle).value == doctest::Approx(1.0).epsilon(1e-10));

  const auto dag = influence_adjacency(testing::make_network(3, {{0, 1}, {1, 2}, {0, 2}}));
  CHECK(spectral_radius(dag).value == 0.0);

  const auto three = influence_adjacency(testing::make_network(3, {{0, 1}, {1, 2}, {2, 0}}));
  CHECK(spectral_radius(three).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spectral_radius: matches a dense eigensolver") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto net = testing::random_network(seed, 50, 0.05 + 0.01 * static_cast<double>(seed));
    const auto a = influence_adjacency(net);
    CHECK(spectral_radius(a).value == doctest::Approx(dense_radius(Eigen::MatrixXd(a))).epsilon(1e-8));
  }
}

TEST_CASE("spectral_radius: reports non-convergence") {
  const auto a = influence_adjacency(testing::random_network(3, 40, 0.2));
  CHECK_THROWS_AS(spectral_radius(a, 1e-14, 3), Error);
}

TEST_CASE("impulse_response: closed forms") {
  const auto isolated = testing::make_network(3, {{0, 1, 1.0}});
  const auto s = impulse_response(normalize_adjacency(influence_adjacency(isolated)).matrix, 5);
  CHECK(s(2) == 1.0);
  CHECK(s(0) == 1.0);

  const auto single = testing::make_network(2, {{0, 1, 0.5}});
  const auto norm = normalize_adjacency(influence_adjacency(single));
  CHECK(norm.lambda_max == 0.0);
  const auto r = impulse_response(norm.matrix, 1);
  CHECK(r(0) == doctest::Approx(1.0));
  CHECK(r(1) == doctest::Approx(1.25));
  CHECK_THROWS_AS(impulse_response(norm.matrix, -1), RangeError);
}

TEST_CASE("impulse_response: equals the dense Gramian diagonal") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto net = testing::random_network(seed, 50 + 10 * static_cast<int>(seed), 0.06);
    const auto norm = normalize_adjacency(influence_adjacency(net));
    const auto dense = dense_gramian_diagonal(Eigen::MatrixXd(norm.matrix), 5);
    const auto sparse = impulse_response(norm.matrix, 5);
    CHECK((dense - sparse).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, dense.maxCoeff()));
  }
}

TEST_CASE("impulse_response: at least one, monotone in K, relabeling invariant") {
  const auto net = testing::random_network(9, 40, 0.1);
  const auto scores = influence_scores(net, 5);
  CHECK(scores.horizon() == 5);
  CHECK(scores.score().minCoeff() >= 1.0);
  for (int k = 1; k <= 5; ++k) CHECK(((scores.by_horizon[k] - scores.by_horizon[k - 1]).array() >= 0).all());

  // Reverse node order.
  auto reversed = net;
  const int n = net.size();
  for (auto& node : reversed.nodes) node.id = n - 1 - node.id;
  std::reverse(reversed.nodes.begin(), reversed.nodes.end());
  for (auto& e : reversed.edges) e = {n - 1 - e.source, n - 1 - e.target, e.weight};
  const auto again = influence_scores(reversed, 5);
  for (int i = 0; i < n; ++i) CHECK(again.score()(n - 1 - i) == doctest::Approx(scores.score()(i)).epsilon(1e-12));
}

TEST_CASE("correlate_participation: proportional counts and undefined inputs") {
  InfluenceScores s;
  s.titles = {"a", "b", "c", "d"};
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  s.by_horizon = {Eigen::VectorXd::Ones(4), v, 2 * v};
  const auto r = correlate_participation(s, {{2, 4, 6, 8}, {1, 1, 1, 1}});
  REQUIRE(r.size() == 2);
  REQUIRE(r[0].birth);
  CHECK(r[0].birth->statistic == doctest::Approx(1.0));
  CHECK(r[1].horizon == 2);
  CHECK_FALSE(r[0].death);
}

TEST_CASE("correlate_participation: independent counts give small r") {
  Rng rng(5);
  const int n = 10000;
  InfluenceScores s;
  s.titles.resize(n);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + rng.uniform();
  s.by_horizon = {Eigen::VectorXd::Ones(n), v};
  ParticipationCounts c;
  for (int i = 0; i < n; ++i) {
    c.birth.push_back(static_cast<int>(rng.poisson(2.0)));
    c.death.push_back(static_cast<int>(rng.poisson(3.0)));
  }
  const auto r = correlate_participation(s, c);
  CHECK(std::abs(r[0].birth->statistic) < 0.05);
  CHECK(std::abs(r[0].death->statistic) < 0.05);
}

TEST_CASE("nobel_comparison: planted shift matches an ECDF oracle") {
  const int n = 200;
  auto net = testing::make_network(n, {});
  Rng rng(8);
  ParticipationCounts c;
  NobelNodeSet nobel;
  for (int i = 0; i < n; ++i) {
    const bool prize = i % 5 == 0;
    const int base = static_cast<int>(rng.poisson(3.0));
    c.birth.push_back(base + (prize ? 2 : 0));
    c.death.push_back(static_cast<int>(rng.poisson(2.0)));
    if (prize) nobel.prize_titles.insert(net.nodes[i].title);
  }
  nobel.prize_titles.insert("Not a node");
  const auto cmp = nobel_comparison(net, c, nobel);
  CHECK(cmp.nobel_nodes == 40);
  CHECK(cmp.other_nodes == 160);
  CHECK(cmp.unmatched == std::vector<std::string>{"Not a node"});

  std::vector<double> a, b;
  for (int i = 0; i < n; ++i) (i % 5 == 0 ? a : b).push_back(c.birth[i]);
  auto ecdf = [](const std::vector<double>& s, double t) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= t; })) / s.size();
  };
  double d = 0.0;
  for (const auto* sample : {&a, &b}) {
    for (double t : *sample) d = std::max(d, std::abs(ecdf(a, t) - ecdf(b, t)));
  }
  CHECK(cmp.birth.statistic == doctest::Approx(d).epsilon(1e-12));
  CHECK(cmp.birth.p < 0.05);
  const double max_cf = *std::max_element(cmp.birth_cdf.difference.begin(), cmp.birth_cdf.difference.end(),
                                          [](double x, double y) { return std::abs(x) < std::abs(y); });
  CHECK(std::abs(max_cf) == doctest::Approx(d));
}

TEST_CASE("nobel_comparison: identical samples and degenerate sets") {
  auto net = testing::make_network(4, {});
  const ParticipationCounts c{{1, 2, 1, 2}, {0, 0, 0, 0}};
  NobelNodeSet nobel;
  nobel.prize_titles = {"n00", "n01"};
  const auto cmp = nobel_comparison(net, c, nobel);
  CHECK(cmp.birth.statistic == 0.0);

  nobel.prize_titles = {"n00", "n01", "n02", "n03"};
  CHECK_THROWS_WITH_AS(nobel_comparison(net, c, nobel), "empty complement", Error);
  nobel.prize_titles = {"elsewhere"};
  CHECK_THROWS_WITH_AS(nobel_comparison(net, c, nobel), "empty Nobel intersection", Error);
}

#include "isograph/clustering.hpp"
#include "isograph/error.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace isograph;

namespace {

// Disjoint unit-weight cliques of the given sizes, vertices in order.
Graph cliques(const std::vector<Index>& sizes, std::vector<int>* truth = nullptr) {
  std::vector<Edge> e;
  Index base = 0;
  int c = 0;
  for (Index s : sizes) {
    for (Index i = 0; i < s; ++i) {
      for (Index j = i + 1; j < s; ++j) e.push_back({base + i, base + j, 1.0});
      if (truth) truth->push_back(c);
    }
    base += s;
    ++c;
  }
  return Graph(base, e);
}

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

double permutation_cost(const Eigen::MatrixXd& c, const std::vector<int>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += c(static_cast<Index>(i), p[i]);
  return s;
}

}  // namespace

TEST_CASE("kmeans on points at k distinct locations") {
  Eigen::MatrixXd x(6, 2);
  x << 0, 0, 5, 5, 0, 0, 5, 5, -3, 2, -3, 2;
  const auto r = kmeans(x, 3, 1);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(same_partition(r.assignment, {0, 1, 0, 1, 2, 2}));
  CHECK_THROWS_AS(kmeans(x, 7, 1), DataError);
  CHECK_THROWS_AS(kmeans(x, 0, 1), DataError);
}

TEST_CASE("kmeans objective history is non-increasing") {
  Rng rng(71);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = oracle::gaussian(120, 3, rng);
    const auto r = kmeans(x, 5, static_cast<std::uint64_t>(t));
    REQUIRE(!r.history.empty());
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1] * (1 + 1e-12));
    CHECK(r.history.back() <= r.history.front());
    CHECK(r.objective == doctest::Approx(r.history.back()));
    // the reported objective is the sum of squared distances to the reported centers
    double s = 0.0;
    for (Index i = 0; i < x.rows(); ++i) s += (x.row(i) - r.centers.row(r.assignment[static_cast<std::size_t>(i)])).squaredNorm();
    CHECK(r.objective == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("two-blob kmeans reaches the best two-partition") {
  Rng rng(72);
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd x = oracle::gaussian(12, 2, rng);
    for (Index i = 0; i < 6; ++i) x(i, 0) += 6.0;
    const double best = oracle::exhaustive_two_means(x);
    CHECK(kmeans(x, 2, static_cast<std::uint64_t>(t)).objective == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("kmeans is deterministic per seed") {
  Rng rng(73);
  const Eigen::MatrixXd x = oracle::gaussian(200, 4, rng);
  const auto a = kmeans(x, 6, 99), b = kmeans(x, 6, 99);
  CHECK(a.assignment == b.assignment);
  CHECK(a.centers == b.centers);
  CHECK(a.restart == b.restart);
}

TEST_CASE("spectral clustering separates disjoint cliques") {
  std::vector<int> truth;
  const auto g2 = cliques({6, 9}, &truth);
  CHECK(same_partition(spectral_cluster(g2, 2, 3).cluster, truth));

  truth.clear();
  const auto g3 = cliques({5, 7, 6}, &truth);
  const auto a = spectral_cluster(g3, 3, 3);
  CHECK(a.n_clusters == 3);
  CHECK(same_partition(a.cluster, truth));
  const auto aligned = align_clusters_to_labels(a, LabelVector(truth));
  CHECK(aligned.accuracy == 1.0);

  CHECK(spectral_cluster(g3, 3, 8).cluster == spectral_cluster(g3, 3, 8).cluster);
  CHECK_THROWS_AS(spectral_cluster(g3, 1, 0), ConfigError);
  CHECK_THROWS_AS(spectral_cluster(g3, 19, 0), DataError);
}

TEST_CASE("spectral clustering is invariant under vertex permutation") {
  Rng rng(74);
  std::vector<int> truth;
  const auto g = cliques({8, 8, 8}, &truth);
  std::vector<Index> perm(24);
  std::iota(perm.begin(), perm.end(), Index{0});
  shuffle(perm, rng);
  std::vector<Edge> pe;
  for (const auto& e : g.edges()) pe.push_back({perm[static_cast<std::size_t>(e.i)], perm[static_cast<std::size_t>(e.j)], e.weight});
  const auto a = spectral_cluster(g, 3, 5).cluster;
  const auto b = spectral_cluster(Graph(24, pe), 3, 5).cluster;
  std::vector<int> back(24);
  for (std::size_t v = 0; v < 24; ++v) back[v] = b[static_cast<std::size_t>(perm[v])];
  CHECK(same_partition(a, back));
}

TEST_CASE("hungarian small cases") {
  Eigen::MatrixXd id = Eigen::MatrixXd::Ones(4, 4) - Eigen::MatrixXd::Identity(4, 4);
  const auto a = hungarian(id);
  CHECK(a.total == 0.0);
  CHECK(a.row_to_col == std::vector<int>{0, 1, 2, 3});

  Eigen::MatrixXd c(2, 2);
  c << 1, 2, 2, 1;
  const auto b = hungarian(c);
  CHECK(b.total == 2.0);
  CHECK(b.row_to_col == std::vector<int>{0, 1});

  CHECK_THROWS_AS(hungarian(Eigen::MatrixXd::Zero(2, 3)), DataError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(hungarian(bad), DataError);
  CHECK(hungarian(Eigen::MatrixXd(0, 0)).row_to_col.empty());
}

TEST_CASE("hungarian matches brute force and beats random permutations") {
  Rng rng(75);
  for (int t = 0; t < 60; ++t) {
    const Index n = 1 + t % 7;
    Eigen::MatrixXd c = oracle::gaussian(n, n, rng) * 10.0;
    if (t % 3 == 0) c = c.array().round();  // ties
    const auto a = hungarian(c);
    CHECK(a.total == doctest::Approx(oracle::brute_force_assignment(c)).epsilon(1e-12));
    CHECK(a.total == doctest::Approx(permutation_cost(c, a.row_to_col)).epsilon(1e-12));
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    CHECK(a.total <= permutation_cost(c, p) + 1e-9);
    for (int s = 0; s < 100; ++s) {
      shuffle(p, rng);
      CHECK(a.total <= permutation_cost(c, p) + 1e-9);
    }
  }
}

TEST_CASE("alignment") {
  const std::vector<int> y = {0, 0, 1, 1, 2, 2, 2};
  ClusterAssignment a;
  a.n_clusters = 3;
  a.cluster = {0, 0, 1, 1, 2, 2, 2};
  CHECK(align_clusters_to_labels(a, LabelVector(y)).accuracy == 1.0);
  a.cluster = {2, 2, 0, 0, 1, 1, 1};
  const auto p = align_clusters_to_labels(a, LabelVector(y));
  CHECK(p.accuracy == 1.0);
  CHECK(p.predicted_labels() == y);
  a.cluster = {2, 0, 0, 0, 1, 1, 2};
  CHECK(align_clusters_to_labels(a, LabelVector(y)).accuracy == doctest::Approx(5.0 / 7.0));

  ClusterAssignment unaligned = a;
  CHECK_THROWS_AS(unaligned.predicted_labels(), DataError);
  a.n_clusters = 2;
  a.cluster = {0, 0, 1, 1, 0, 1, 0};
  CHECK_THROWS_AS(align_clusters_to_labels(a, LabelVector(y)), DataError);
}

TEST_CASE("alignment is invariant under cluster relabelling") {
  Rng rng(76);
  std::vector<int> y(200), c(200);
  for (int i = 0; i < 200; ++i) {
    y[static_cast<std::size_t>(i)] = i % 4;
    c[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(4));
  }
  ClusterAssignment a;
  a.n_clusters = 4;
  a.cluster = c;
  const double base = align_clusters_to_labels(a, LabelVector(y)).accuracy;
  std::vector<int> relabel = {0, 1, 2, 3};
  for (int t = 0; t < 10; ++t) {
    shuffle(relabel, rng);
    for (std::size_t i = 0; i < c.size(); ++i) a.cluster[i] = relabel[static_cast<std::size_t>(c[i])];
    CHECK(align_clusters_to_labels(a, LabelVector(y)).accuracy == base);
  }
}

TEST_CASE("random clusters on four balanced classes score near chance") {
  Rng rng(77);
  std::vector<int> y(400);
  for (int i = 0; i < 400; ++i) y[static_cast<std::size_t>(i)] = i % 4;
  for (int t = 0; t < 20; ++t) {
    ClusterAssignment a;
    a.n_clusters = 4;
    for (int i = 0; i < 400; ++i) a.cluster.push_back(static_cast<int>(rng.below(4)));
    const double acc = align_clusters_to_labels(a, LabelVector(y)).accuracy;
    CHECK(acc >= 0.2);
    CHECK(acc <= 0.35);
  }
}

TEST_CASE("assignment csv round trip") {
  TempDir dir("clu");
  ClusterAssignment a;
  a.n_clusters = 2;
  a.cluster = {1, 0, 1};
  write_assignment(dir / "u.csv", a);
  CHECK(read_text(dir / "u.csv") == "vertex,cluster,label\n0,1,-1\n1,0,-1\n2,1,-1\n");
  const auto u = read_assignment(dir / "u.csv");
  CHECK(u.cluster == a.cluster);
  CHECK_FALSE(u.aligned());

  const auto al = align_clusters_to_labels(a, LabelVector({0, 1, 0}));
  write_assignment(dir / "a.csv", al);
  const auto back = read_assignment(dir / "a.csv");
  CHECK(back.predicted_labels() == std::vector<int>{0, 1, 0});

  write_text(dir / "bad.csv", "vertex,cluster,label\n0,x,1\n");
  CHECK_THROWS_AS(read_assignment(dir / "bad.csv"), DataError);
  write_text(dir / "nohead.csv", "0,1,1\n");
  CHECK_THROWS_AS(read_assignment(dir / "nohead.csv"), DataError);
}

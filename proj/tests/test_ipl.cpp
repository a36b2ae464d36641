#include "isograph/error.hpp"
#include "isograph/ipl.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace isograph;

namespace {

const Graph& k3() {
  static const Graph g(3, std::vector<Edge>{{0, 1, 1}, {1, 2, 1}, {0, 2, 1}});
  return g;
}

Graph path_graph(Index n) {
  std::vector<Edge> e;
  for (Index i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return Graph(n, e);
}

Graph grid_graph(Index side) {
  std::vector<Edge> e;
  for (Index r = 0; r < side; ++r)
    for (Index c = 0; c < side; ++c) {
      const Index v = r * side + c;
      if (c + 1 < side) e.push_back({v, v + 1, 1.0});
      if (r + 1 < side) e.push_back({v, v + side, 1.0});
    }
  return Graph(side * side, e);
}

Graph complete_graph(Index n) {
  std::vector<Edge> e;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
  return Graph(n, e);
}

}  // namespace

TEST_CASE("flow toward a center") {
  const auto p = path_graph(3);
  CHECK(flow_toward(p, 0, 0) == 0.0);
  CHECK(flow_toward(p, 2, 0) == 1.0);
  const Graph star(4, std::vector<Edge>{{0, 1, 0.3}, {0, 2, 0.6}, {0, 3, 0.9}});
  CHECK(flow_toward(star, 2, 0) == 0.6);
  CHECK_THROWS_AS(flow_toward(star, 9, 0), DataError);
}

TEST_CASE("geodesic flow small cases") {
  CHECK(geodesic_flow(k3(), 0, 1) == 2.0);
  CHECK(geodesic_flow(Graph(3, {}), 1, 2) == 0.0);
  CHECK(geodesic_flow(path_graph(4), 0, 2) == 1.0);
  CHECK_THROWS_AS(geodesic_flow(k3(), 3, 1), DataError);
}

TEST_CASE("geodesic flow is the shell sum of flows and the boundary cut") {
  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const auto g = oracle::random_graph(25, 0.12, rng);
    const auto hops = oracle::all_hops(g);
    for (Index xi = 0; xi < 25; xi += 4)
      for (int r = 1; r <= 4; ++r) {
        const auto& d = hops[static_cast<std::size_t>(xi)];
        double shell = 0.0;
        for (Index i = 0; i < 25; ++i)
          if (d[static_cast<std::size_t>(i)] == r) shell += flow_toward(g, i, xi);
        const double gf = geodesic_flow(g, xi, r);
        CHECK(std::abs(gf - shell) < 1e-12);
        CHECK(std::abs(gf - oracle::boundary_cut(g, d, r)) < 1e-9);
      }
  }
}

TEST_CASE("ball volume small cases and pair scan") {
  CHECK(ball_volume(k3(), 0, 1) == 0.0);
  CHECK(ball_volume(k3(), 0, 2) == 3.0);
  Rng rng(42);
  for (int t = 0; t < 10; ++t) {
    const auto g = oracle::random_graph(10, 0.3, rng);
    const auto hops = oracle::all_hops(g);
    for (Index xi = 0; xi < 10; ++xi)
      CHECK(ball_volume(g, xi, 2) == doctest::Approx(oracle::pair_scan_volume(g, hops[static_cast<std::size_t>(xi)], 2)).epsilon(1e-12));
  }
}

TEST_CASE("weight scaling scales flow and volume exactly") {
  Rng rng(43);
  const auto g = oracle::random_graph(20, 0.2, rng);
  const auto h = g.scaled(0.5);  // power of two keeps products exact
  for (Index xi = 0; xi < 20; ++xi) {
    CHECK(geodesic_flow(h, xi, 2) == 0.5 * geodesic_flow(g, xi, 2));
    CHECK(ball_volume(h, xi, 3) == 0.5 * ball_volume(g, xi, 3));
  }
  const auto q = g.scaled(0.3);
  for (Index xi = 0; xi < 20; ++xi)
    CHECK(geodesic_flow(q, xi, 2) == doctest::Approx(0.3 * geodesic_flow(g, xi, 2)).epsilon(1e-12));
}

TEST_CASE("gap definition") {
  IplParams p;
  p.delta = 2.0;
  p.c_delta = 1.0;
  p.r = 1;
  CHECK(isoperimetric_gap(k3(), 0, p) == -2.0);
  CHECK(isoperimetric_gap(Graph(2, {}), 0, p) == 0.0);

  // large-delta limit approaches c * volume - flow
  Rng rng(44);
  const auto g = oracle::random_graph(20, 0.25, rng);
  p.r = 2;
  p.delta = 1e6;
  for (Index xi = 0; xi < 20; ++xi) {
    const double limit = ball_volume(g, xi, 2) - geodesic_flow(g, xi, 2);
    CHECK(std::abs(isoperimetric_gap(g, xi, p) - limit) <= 1e-4 * std::max(1.0, std::abs(limit)));
  }
}

TEST_CASE("gap is monotone in c_delta and delta") {
  Rng rng(45);
  const auto g = oracle::random_graph(30, 0.2, rng);
  for (Index xi = 0; xi < 30; ++xi) {
    if (ball_volume(g, xi, 2) <= 1.0) continue;
    IplParams a{2.0, 1.0, 2, 1.0}, b{2.0, 1.5, 2, 1.0}, c{3.0, 1.0, 2, 1.0};
    CHECK(isoperimetric_gap(g, xi, b) > isoperimetric_gap(g, xi, a));
    CHECK(isoperimetric_gap(g, xi, c) > isoperimetric_gap(g, xi, a));
  }
}

TEST_CASE("invalid parameters are config errors") {
  CHECK_THROWS_AS((IplParams{1.0, 1.0, 3, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((IplParams{2.0, 0.0, 3, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((IplParams{2.0, 1.0, 0, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((IplParams{2.0, 1.0, 3, -1.0}.validate()), ConfigError);
}

TEST_CASE("mean gap aggregates per-vertex gaps") {
  IplParams p;
  const auto empty = mean_gap(Graph(5, {}), p);
  CHECK(empty.mean == 0.0);
  for (double b : empty.beta) CHECK(b == 0.0);

  Rng rng(46);
  const auto g = oracle::random_graph(40, 0.1, rng);
  const auto rep = mean_gap(g, p);
  double s = 0.0;
  int pos = 0;
  for (Index xi = 0; xi < 40; ++xi) {
    const double b = isoperimetric_gap(g, xi, p);
    CHECK(rep.beta[static_cast<std::size_t>(xi)] == b);
    s += b;
    pos += b > 0.0;
  }
  CHECK(rep.mean == doctest::Approx(s / 40.0).epsilon(1e-13));
  CHECK(rep.positive_fraction == pos / 40.0);
}

TEST_CASE("direct objective") {
  Rng rng(47);
  const auto g = oracle::random_graph(15, 0.25, rng);
  IplParams p{2.0, 1.0, 2, 0.0};
  const EmbeddingMatrix same(Eigen::MatrixXd::Ones(15, 3));
  CHECK(direct_objective(g, same, p) == 0.0);

  const EmbeddingMatrix s(oracle::gaussian(15, 3, rng));
  const auto hops = oracle::all_hops(g);
  const Eigen::MatrixXd w = oracle::dense_weights(g);
  double expect = 0.0;
  for (Index xi = 0; xi < 15; ++xi)
    for (Index i = 0; i < 15; ++i)
      for (Index j = i + 1; j < 15; ++j)
        if (hops[static_cast<std::size_t>(xi)][static_cast<std::size_t>(i)] < 2 &&
            hops[static_cast<std::size_t>(xi)][static_cast<std::size_t>(j)] < 2)
          expect += (s.values().row(i) - s.values().row(j)).norm() * w(i, j);
  CHECK(direct_objective(g, s, p) == doctest::Approx(expect).epsilon(1e-12));

  p.lambda = 1.0;
  CHECK(direct_objective(Graph(15, {}), s, p) == 0.0);
  const double sum_beta = mean_gap(g, p).mean * 15.0;
  CHECK(direct_objective(g, same, p) >= p.lambda * sum_beta - 1e-9);
  CHECK_THROWS_AS(direct_objective(g, EmbeddingMatrix(Eigen::MatrixXd::Ones(4, 3)), p), DataError);
}

TEST_CASE("dimension estimates on reference graphs") {
  CHECK(estimate_delta(path_graph(200), 6, 1) <= 1.5);
  const double grid = estimate_delta(grid_graph(20), 6, 1);
  CHECK(grid >= 1.6);
  CHECK(grid <= 2.6);
  CHECK(estimate_delta(complete_graph(12), 4, 1) == doctest::Approx(1.0 + 1e-6));
  CHECK_THROWS_AS(estimate_delta(Graph(2, {}), 4, 1), DataError);
  CHECK_THROWS_AS(estimate_delta(grid_graph(5), 2, 1), ConfigError);
  CHECK(estimate_delta(grid_graph(20), 6, 5) == estimate_delta(grid_graph(20), 6, 5));
}

TEST_CASE("gap report csv round trip") {
  TempDir dir("ipl");
  Rng rng(48);
  const auto rep = mean_gap(oracle::random_graph(30, 0.15, rng), IplParams{});
  write_gap_report(dir / "gap.csv", rep);
  const auto back = read_gap_report(dir / "gap.csv");
  CHECK(back.beta == rep.beta);
  CHECK(back.mean == rep.mean);
  CHECK(back.positive_fraction == rep.positive_fraction);
  const auto text = read_text(dir / "gap.csv");
  CHECK(text.rfind("vertex,beta\n", 0) == 0);
  CHECK(text.find("# mean=") != std::string::npos);
}

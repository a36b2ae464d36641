#include "isograph/ipl.hpp"

#include "isograph/error.hpp"
#include "isograph/parallel.hpp"
#include "isograph/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace isograph {

namespace {

void check_vertex(const Graph& g, Index v) {
  if (v < 0 || v >= g.size()) throw DataError("vertex " + std::to_string(v) + " outside graph");
}

// Depth-limited BFS that only touches the vertices it reaches, so one
// workspace can serve many centers without O(n) resets.
class BfsWorkspace {
 public:
  explicit BfsWorkspace(Index n) : dist_(static_cast<std::size_t>(n), -1) {}

  void run(const Graph& g, Index source, int max_depth) {
    run(g, source, max_depth, [](Index, int, const Neighbor&, int) {});
  }

  // visit(u, du, neighbour, dv) for every edge scanned from a vertex with
  // du < max_depth; dv is already final when the callback runs.
  template <class Visit>
  void run(const Graph& g, Index source, int max_depth, Visit&& visit) {
    for (Index v : order_) dist_[static_cast<std::size_t>(v)] = -1;
    order_.clear();
    order_.push_back(source);
    dist_[static_cast<std::size_t>(source)] = 0;
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const Index u = order_[head];
      const int du = dist_[static_cast<std::size_t>(u)];
      if (du >= max_depth) continue;
      for (const auto& nb : g.neighbors(u)) {
        auto& dv = dist_[static_cast<std::size_t>(nb.vertex)];
        if (dv < 0) {
          dv = du + 1;
          order_.push_back(nb.vertex);
        }
        visit(u, du, nb, dv);
      }
    }
  }

  // -1 when farther than the last max_depth
  int dist(Index v) const { return dist_[static_cast<std::size_t>(v)]; }
  const std::vector<Index>& reached() const { return order_; }

 private:
  std::vector<int> dist_;
  std::vector<Index> order_;
};

struct BallStats {
  double volume = 0.0;
  double flow = 0.0;
};

// Only ball vertices (d < r) are expanded: in-ball edges give the volume and
// edges reaching d = r the flow, so the outer shell is never scanned.
BallStats ball_stats(const Graph& g, Index xi, int r, BfsWorkspace& ws) {
  BallStats s;
  ws.run(g, xi, r, [&](Index u, int, const Neighbor& nb, int dv) {
    if (dv == r)
      s.flow += nb.weight;
    else if (u < nb.vertex)
      s.volume += nb.weight;
  });
  return s;
}

double gap_from(const BallStats& s, const IplParams& p) {
  return p.c_delta * std::pow(s.volume, 1.0 - 1.0 / p.delta) - s.flow;
}

template <class Fn>
void for_each_vertex_blocked(Index n, Fn&& fn) {
  constexpr Index kBlock = 64;
  const Index blocks = (n + kBlock - 1) / kBlock;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    BfsWorkspace ws(n);
    const Index begin = static_cast<Index>(b) * kBlock;
    const Index end = std::min(n, begin + kBlock);
    for (Index v = begin; v < end; ++v) fn(v, ws);
  });
}

}  // namespace

void IplParams::validate() const {
  if (!(delta > 1.0) || !std::isfinite(delta)) throw ConfigError("ipl.delta: must be > 1");
  if (!(c_delta > 0.0) || !std::isfinite(c_delta)) throw ConfigError("ipl.c_delta: must be > 0");
  if (r < 1) throw ConfigError("ipl.r: must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("ipl.lambda: must be >= 0");
}

double flow_toward(const Graph& g, Index i, Index xi) {
  check_vertex(g, i);
  const auto dist = hop_distances(g, xi);
  const int di = dist[static_cast<std::size_t>(i)];
  if (di <= 0) return 0.0;
  double f = 0.0;
  for (const auto& nb : g.neighbors(i)) {
    const int dj = dist[static_cast<std::size_t>(nb.vertex)];
    if (dj >= 0 && dj < di) f += nb.weight;
  }
  return f;
}

double geodesic_flow(const Graph& g, Index xi, int r) {
  check_vertex(g, xi);
  if (r < 1) throw DataError("radius must be >= 1");
  BfsWorkspace ws(g.size());
  return ball_stats(g, xi, r, ws).flow;
}

double ball_volume(const Graph& g, Index xi, int r) {
  check_vertex(g, xi);
  if (r < 1) throw DataError("radius must be >= 1");
  BfsWorkspace ws(g.size());
  return ball_stats(g, xi, r, ws).volume;
}

double isoperimetric_gap(const Graph& g, Index xi, const IplParams& p) {
  p.validate();
  check_vertex(g, xi);
  BfsWorkspace ws(g.size());
  return gap_from(ball_stats(g, xi, p.r, ws), p);
}

GapReport mean_gap(const Graph& g, const IplParams& p) {
  p.validate();
  GapReport rep;
  rep.beta.assign(static_cast<std::size_t>(g.size()), 0.0);
  for_each_vertex_blocked(g.size(), [&](Index v, BfsWorkspace& ws) {
    rep.beta[static_cast<std::size_t>(v)] = gap_from(ball_stats(g, v, p.r, ws), p);
  });
  if (!rep.beta.empty()) {
    rep.mean = pairwise_sum(rep.beta) / static_cast<double>(rep.beta.size());
    const auto pos = std::count_if(rep.beta.begin(), rep.beta.end(), [](double b) { return b > 0.0; });
    rep.positive_fraction = static_cast<double>(pos) / static_cast<double>(rep.beta.size());
  }
  return rep;
}

double direct_objective(const Graph& g, const EmbeddingMatrix& s, const IplParams& p) {
  p.validate();
  if (s.rows() != g.size()) throw DataError("semantic rows do not match graph vertices");
  const auto& sv = s.values();
  std::vector<double> per_vertex(static_cast<std::size_t>(g.size()), 0.0);
  for_each_vertex_blocked(g.size(), [&](Index xi, BfsWorkspace& ws) {
    const BallStats st = ball_stats(g, xi, p.r, ws);
    double fit = 0.0;
    for (Index u : ws.reached()) {
      if (ws.dist(u) >= p.r) continue;
      for (const auto& nb : g.neighbors(u)) {
        const int dv = ws.dist(nb.vertex);
        if (u < nb.vertex && dv >= 0 && dv < p.r)
          fit += (sv.row(u) - sv.row(nb.vertex)).norm() * nb.weight;
      }
    }
    per_vertex[static_cast<std::size_t>(xi)] = fit + p.lambda * gap_from(st, p);
  });
  return pairwise_sum(per_vertex);
}

double estimate_delta(const Graph& g, int r_max, std::uint64_t seed) {
  if (r_max < 3) throw ConfigError("ipl.delta_r_max: must be >= 3");
  const Index n = g.size();
  if (n < 3) throw DataError("graph too small to estimate the isoperimetric dimension");
  std::vector<Index> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), Index{0});
  Rng rng(seed);
  const std::size_t centers = std::min<std::size_t>(ids.size(), 64);
  for (std::size_t t = 0; t < centers; ++t) {
    const auto pick = t + rng.below(ids.size() - t);
    std::swap(ids[t], ids[pick]);
  }
  BfsWorkspace ws(n);
  std::vector<double> slopes;
  for (std::size_t t = 0; t < centers; ++t) {
    std::vector<double> xs, ys;
    for (int r = 2; r <= r_max; ++r) {
      const double vol = ball_stats(g, ids[t], r, ws).volume;
      if (vol > 0.0) {
        xs.push_back(std::log(static_cast<double>(r - 1)));
        ys.push_back(std::log(vol));
      }
    }
    if (xs.size() < 2) continue;
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) {
      sxy += (xs[q] - mx) * (ys[q] - my);
      sxx += (xs[q] - mx) * (xs[q] - mx);
    }
    slopes.push_back(sxy / sxx);
  }
  if (slopes.empty())
    throw DataError("no center has a non-trivial ball; graph too small to estimate delta");
  const double mean = pairwise_sum(slopes) / static_cast<double>(slopes.size());
  return std::clamp(mean, 1.0 + 1e-6, 64.0);
}

void write_gap_report(const std::filesystem::path& path, const GapReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "vertex,beta\n";
  for (std::size_t v = 0; v < report.beta.size(); ++v) out << v << ',' << format_double(report.beta[v]) << '\n';
  out << "# mean=" << format_double(report.mean) << " pos_frac=" << format_double(report.positive_fraction)
      << '\n';
  if (!out) throw DataError("write failure on " + path.string());
}

GapReport read_gap_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  auto to_double = [&](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw DataError(path.string() + ": bad number '" + std::string(s) + "'");
    return v;
  };
  GapReport rep;
  bool trailer = false;
  std::string line;
  std::getline(in, line);
  if (line != "vertex,beta") throw DataError(path.string() + ": missing 'vertex,beta' header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto m = line.find("mean=");
      const auto f = line.find(" pos_frac=");
      if (m == std::string::npos || f == std::string::npos)
        throw DataError(path.string() + ": malformed trailer");
      rep.mean = to_double(std::string_view(line).substr(m + 5, f - m - 5));
      rep.positive_fraction = to_double(std::string_view(line).substr(f + 10));
      trailer = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(path.string() + ": malformed row '" + line + "'");
    rep.beta.push_back(to_double(std::string_view(line).substr(comma + 1)));
  }
  if (!trailer) throw DataError(path.string() + ": missing trailer");
  return rep;
}

}  // namespace isograph

#include "isograph/graph.hpp"

#include "isograph/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

namespace isograph {

Graph::Graph(Index n, std::span<const Edge> edges) {
  if (n < 0) throw DataError("negative vertex count");
  std::vector<std::vector<Neighbor>> lists(static_cast<std::size_t>(n));
  for (const auto& e : edges) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n)
      throw DataError("edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                      ") outside vertex range");
    if (e.i == e.j) throw DataError("self-loop at vertex " + std::to_string(e.i));
    if (!(e.weight > 0.0 && e.weight <= 1.0))
      throw DataError("edge weight " + format_double(e.weight) + " outside (0, 1]");
    lists[static_cast<std::size_t>(e.i)].push_back({e.j, e.weight});
    lists[static_cast<std::size_t>(e.j)].push_back({e.i, e.weight});
  }
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (Index v = 0; v < n; ++v) {
    auto& l = lists[static_cast<std::size_t>(v)];
    std::sort(l.begin(), l.end(), [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
    for (std::size_t t = 1; t < l.size(); ++t)
      if (l[t].vertex == l[t - 1].vertex)
        throw DataError("duplicate edge (" + std::to_string(v) + "," +
                        std::to_string(l[t].vertex) + ")");
    offsets_[static_cast<std::size_t>(v) + 1] = offsets_[static_cast<std::size_t>(v)] + l.size();
  }
  adjacency_.reserve(offsets_.back());
  for (auto& l : lists) adjacency_.insert(adjacency_.end(), l.begin(), l.end());
}

std::span<const Neighbor> Graph::neighbors(Index v) const {
  const auto b = offsets_[static_cast<std::size_t>(v)];
  const auto e = offsets_[static_cast<std::size_t>(v) + 1];
  return {adjacency_.data() + b, e - b};
}

double Graph::degree(Index v) const {
  double d = 0.0;
  for (const auto& nb : neighbors(v)) d += nb.weight;
  return d;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Index v = 0; v < size(); ++v)
    for (const auto& nb : neighbors(v))
      if (v < nb.vertex) out.push_back({v, nb.vertex, nb.weight});
  return out;
}

double Graph::weight(Index i, Index j) const {
  const auto nbs = neighbors(i);
  auto it = std::lower_bound(nbs.begin(), nbs.end(), j,
                             [](const Neighbor& a, Index v) { return a.vertex < v; });
  return (it != nbs.end() && it->vertex == j) ? it->weight : 0.0;
}

Graph Graph::scaled(double alpha) const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DataError("weight scale must lie in (0, 1]");
  Graph out = *this;
  for (auto& nb : out.adjacency_) nb.weight *= alpha;
  return out;
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& u,
                         const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) throw DataError("cosine similarity of vectors with different sizes");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DataError("cosine similarity of a zero-norm vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

LaplacianMatrix laplacian(const Graph& g) {
  const Index n = g.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * g.edge_count() + static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) {
    double d = 0.0;
    for (const auto& nb : g.neighbors(v)) {
      t.emplace_back(v, nb.vertex, -nb.weight);
      d += nb.weight;
    }
    if (d != 0.0) t.emplace_back(v, v, d);
  }
  LaplacianMatrix l;
  l.matrix.resize(n, n);
  l.matrix.setFromTriplets(t.begin(), t.end());
  l.matrix.makeCompressed();
  return l;
}

std::vector<int> hop_distances(const Graph& g, Index source, int max_depth) {
  if (source < 0 || source >= g.size())
    throw DataError("vertex " + std::to_string(source) + " outside graph");
  std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
  std::deque<Index> queue{source};
  dist[static_cast<std::size_t>(source)] = 0;
  while (!queue.empty()) {
    const Index u = queue.front();
    queue.pop_front();
    const int du = dist[static_cast<std::size_t>(u)];
    if (max_depth >= 0 && du >= max_depth) continue;
    for (const auto& nb : g.neighbors(u)) {
      auto& dv = dist[static_cast<std::size_t>(nb.vertex)];
      if (dv < 0) {
        dv = du + 1;
        queue.push_back(nb.vertex);
      }
    }
  }
  return dist;
}

Ball ball(const Graph& g, Index xi, int r) {
  if (r < 1) throw DataError("ball radius must be >= 1");
  const auto dist = hop_distances(g, xi, r - 1);
  Ball b;
  b.center = xi;
  b.radius = r;
  for (Index v = 0; v < g.size(); ++v) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d >= 0 && d < r) {
      b.members.push_back(v);
      b.distance.push_back(d);
    }
  }
  return b;
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "n " << g.size() << '\n';
  for (const auto& e : g.edges()) out << e.i << ' ' << e.j << ' ' << format_double(e.weight) << '\n';
  if (!out) throw DataError("write failure on " + path.string());
}

Graph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  Index n = -1;
  std::vector<Edge> edges;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    if (n < 0) {
      std::string tag;
      if (!(ss >> tag >> n) || tag != "n" || n < 0)
        throw DataError(path.string() + ": expected 'n <N>' header on line " + std::to_string(line_no));
      continue;
    }
    std::string si, sj, sw;
    if (!(ss >> si >> sj >> sw))
      throw DataError(path.string() + ": malformed edge on line " + std::to_string(line_no));
    Edge e{};
    auto parse = [&](const std::string& s, auto& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw DataError(path.string() + ": bad token '" + s + "' on line " + std::to_string(line_no));
    };
    parse(si, e.i);
    parse(sj, e.j);
    parse(sw, e.weight);
    edges.push_back(e);
  }
  if (n < 0) throw DataError(path.string() + ": missing 'n <N>' header");
  return Graph(n, edges);
}

}  // namespace isograph

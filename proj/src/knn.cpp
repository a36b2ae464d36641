#include "isograph/graph.hpp"

#include "isograph/error.hpp"
#include "isograph/parallel.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

namespace isograph {

namespace {

struct Candidate {
  double sim;
  Index idx;
};

// Most similar first, lower index first among equals.
bool better(const Candidate& a, const Candidate& b) {
  return a.sim > b.sim || (a.sim == b.sim && a.idx < b.idx);
}

Eigen::MatrixXd unit_rows(const EmbeddingMatrix& x) {
  Eigen::MatrixXd u = x.values();
  for (Index i = 0; i < u.rows(); ++i) {
    const double nrm = u.row(i).norm();
    if (nrm == 0.0) throw DataError("row " + std::to_string(i) + " has zero norm");
    u.row(i) /= nrm;
  }
  return u;
}

std::vector<std::vector<Index>> brute_force(const Eigen::MatrixXd& u, int k) {
  const Index n = u.rows();
  constexpr Index kBlock = 256;
  const Index blocks = (n + kBlock - 1) / kBlock;
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const Index begin = static_cast<Index>(b) * kBlock;
    const Index len = std::min(kBlock, n - begin);
    const Eigen::MatrixXd sims = u.middleRows(begin, len) * u.transpose();
    std::vector<Candidate> cand;
    cand.reserve(static_cast<std::size_t>(n));
    for (Index r = 0; r < len; ++r) {
      const Index i = begin + r;
      cand.clear();
      for (Index j = 0; j < n; ++j)
        if (j != i) cand.push_back({sims(r, j), j});
      std::partial_sort(cand.begin(), cand.begin() + k, cand.end(), better);
      auto& row = out[static_cast<std::size_t>(i)];
      for (int t = 0; t < k; ++t) row.push_back(cand[static_cast<std::size_t>(t)].idx);
    }
  });
  return out;
}

// Exact kd-tree over unit vectors. The search key is the dot product itself so
// that ranking matches the brute-force path; pruning uses |q - p| >= h for a
// split-plane gap h, i.e. <q, p> <= 1 - h^2 / 2.
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& points) : pts_(points) {
    order_.resize(static_cast<std::size_t>(pts_.rows()));
    std::iota(order_.begin(), order_.end(), Index{0});
    nodes_.reserve(2 * order_.size() / kLeaf + 2);
    root_ = build(0, order_.size());
  }

  std::vector<Index> query(Index self, int k) const {
    std::vector<Candidate> heap;  // worst candidate at front
    heap.reserve(static_cast<std::size_t>(k) + 1);
    const Eigen::VectorXd q = pts_.row(self).transpose();
    search(root_, q, self, k, heap);
    std::sort(heap.begin(), heap.end(), better);
    std::vector<Index> ids;
    for (const auto& c : heap) ids.push_back(c.idx);
    return ids;
  }

 private:
  static constexpr std::size_t kLeaf = 16;
  struct Node {
    std::size_t begin, end;
    Index dim = -1;
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) return id;
    Index best_dim = 0;
    double best_spread = -1.0;
    for (Index d = 0; d < pts_.cols(); ++d) {
      double lo = pts_(order_[begin], d), hi = lo;
      for (std::size_t t = begin; t < end; ++t) {
        lo = std::min(lo, pts_(order_[t], d));
        hi = std::max(hi, pts_(order_[t], d));
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = d;
      }
    }
    if (best_spread <= 0.0) return id;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](Index a, Index b) {
                       return pts_(a, best_dim) < pts_(b, best_dim) ||
                              (pts_(a, best_dim) == pts_(b, best_dim) && a < b);
                     });
    const double split = pts_(order_[mid], best_dim);
    const int l = build(begin, mid);
    const int r = build(mid, end);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.dim = best_dim;
    node.split = split;
    node.left = l;
    node.right = r;
    return id;
  }

  void offer(const Candidate& c, int k, std::vector<Candidate>& heap) const {
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end(), better);
    } else if (better(c, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end(), better);
    }
  }

  void search(int id, const Eigen::VectorXd& q, Index self, int k,
              std::vector<Candidate>& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::size_t t = node.begin; t < node.end; ++t) {
        const Index j = order_[t];
        if (j != self) offer({pts_.row(j).dot(q.transpose()), j}, k, heap);
      }
      return;
    }
    const double gap = q(node.dim) - node.split;
    const int near = gap < 0.0 ? node.left : node.right;
    const int far = gap < 0.0 ? node.right : node.left;
    search(near, q, self, k, heap);
    // Points on the split value can sit on either side, so the far side is
    // bounded by the plane gap only; a small slack keeps ties reachable.
    const double bound = 1.0 - 0.5 * gap * gap + 1e-12;
    if (static_cast<int>(heap.size()) < k || bound >= heap.front().sim) search(far, q, self, k, heap);
  }

  const Eigen::MatrixXd& pts_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  int root_ = 0;
};

}  // namespace

std::vector<std::vector<Index>> knn_indices(const EmbeddingMatrix& x, int k,
                                            const KnnOptions& options) {
  const Index n = x.rows();
  if (k < 1 || k >= n)
    throw DataError("k = " + std::to_string(k) + " outside [1, " + std::to_string(n - 1) + "]");
  const Eigen::MatrixXd u = unit_rows(x);
  if (n < options.tree_threshold) return brute_force(u, k);
  const KdTree tree(u);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n),
               [&](std::size_t i) { out[i] = tree.query(static_cast<Index>(i), k); });
  return out;
}

Graph build_knn_graph(const EmbeddingMatrix& x, int k, const KnnOptions& options) {
  const auto nbrs = knn_indices(x, k, options);
  const Eigen::MatrixXd u = unit_rows(x);
  std::vector<std::pair<Index, Index>> pairs;
  for (std::size_t i = 0; i < nbrs.size(); ++i)
    for (Index j : nbrs[i]) {
      const Index a = std::min<Index>(static_cast<Index>(i), j);
      const Index b = std::max<Index>(static_cast<Index>(i), j);
      pairs.emplace_back(a, b);
    }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    // Recomputed per unordered pair so w_ij and w_ji are the same double.
    const double w = std::min(1.0, u.row(a).dot(u.row(b)));
    if (w > 0.0) edges.push_back({a, b, w});
  }
  return Graph(x.rows(), edges);
}

}  // namespace isograph

#pragma once

#include "isograph/dataset.hpp"

#include <Eigen/Sparse>

#include <filesystem>
#include <span>
#include <vector>

namespace isograph {

struct Edge {
  Index i;
  Index j;
  double weight;
};

struct Neighbor {
  Index vertex;
  double weight;
};

/// Weighted undirected graph without self-loops, weights in (0, 1], stored as
/// sorted adjacency lists. Immutable after construction.
class Graph {
 public:
  Graph() = default;
  /// Each undirected edge appears once in `edges` (either orientation).
  /// Throws DataError on self-loops, duplicates, out-of-range ids or weights.
  Graph(Index n, std::span<const Edge> edges);

  Index size() const { return static_cast<Index>(offsets_.size()) - 1; }
  std::span<const Neighbor> neighbors(Index v) const;
  double degree(Index v) const;
  bool isolated(Index v) const { return neighbors(v).empty(); }
  std::size_t edge_count() const { return adjacency_.size() / 2; }
  /// Undirected edges with i < j, lexicographic order.
  std::vector<Edge> edges() const;
  /// Weight of edge {i, j}, 0 when absent.
  double weight(Index i, Index j) const;
  Graph scaled(double alpha) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
};

/// <u, v> / (|u| |v|); throws DataError for a zero vector.
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& u,
                         const Eigen::Ref<const Eigen::VectorXd>& v);

struct KnnOptions {
  /// Vertex count from which the exact kd-tree search replaces brute force.
  Index tree_threshold = 20000;
};

/// Union-symmetrised kNN graph under cosine similarity. Candidate order is
/// (similarity descending, index ascending); weight = clamp(similarity, 0, 1)
/// and non-positive similarities produce no edge.
Graph build_knn_graph(const EmbeddingMatrix& x, int k, const KnnOptions& options = {});

/// Exact k most-similar rows for each row (excluding itself).
std::vector<std::vector<Index>> knn_indices(const EmbeddingMatrix& x, int k,
                                            const KnnOptions& options = {});

/// L = D - W.
struct LaplacianMatrix {
  Eigen::SparseMatrix<double> matrix;
  Index size() const { return matrix.rows(); }
};

LaplacianMatrix laplacian(const Graph& g);

/// Unweighted hop distance from `source`; -1 for unreachable vertices or those
/// farther than max_depth (max_depth < 0 means unlimited).
std::vector<int> hop_distances(const Graph& g, Index source, int max_depth = -1);

/// Vertices at hop distance < radius from the center.
struct Ball {
  Index center = 0;
  int radius = 1;
  std::vector<Index> members;
  std::vector<int> distance;  // parallel to members
};

Ball ball(const Graph& g, Index xi, int r);

/// Edge-list text: "n <N>" header, then "i j w" per undirected edge.
void write_edge_list(const std::filesystem::path& path, const Graph& g);
Graph read_edge_list(const std::filesystem::path& path);

}  // namespace isograph

#pragma once

#include "isograph/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace isograph {

struct ClusterAssignment {
  std::vector<int> cluster;  // per vertex, 0..n_clusters-1
  int n_clusters = 0;
  std::vector<int> cluster_to_label;  // empty until aligned
  std::uint64_t seed = 0;
  double accuracy = 0.0;  // fraction of vertices whose aligned label is right

  bool aligned() const { return !cluster_to_label.empty(); }
  /// Aligned label per vertex. Throws DataError before alignment.
  std::vector<int> predicted_labels() const;
};

struct KMeansOptions {
  int max_iter = 300;
  int restarts = 10;
  double rel_tol = 1e-8;
};

struct KMeansResult {
  std::vector<int> assignment;
  Eigen::MatrixXd centers;  // k x d
  double objective = 0.0;   // sum of squared distances to assigned centers
  std::vector<double> history;  // objective after each assignment step, best restart
  int restart = 0;
};

/// Lloyd iterations from k-means++ seeding (2 + floor(ln k) greedy candidates
/// per center). Restart r uses seed derive_seed(seed, r); the lowest
/// (objective, restart) pair wins. A cluster that empties is re-seeded at the
/// point farthest from its center.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// k-means on the rows of the eigenvectors of the n_u smallest eigenvalues of
/// the unnormalised Laplacian.
ClusterAssignment spectral_cluster(const Graph& g, int n_u, std::uint64_t seed,
                                   const KMeansOptions& options = {});

struct Assignment {
  std::vector<int> row_to_col;
  double total = 0.0;
};

/// Exact minimum-cost perfect matching on a square matrix (Kuhn-Munkres with
/// potentials, O(n^3)).
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Maps clusters onto the labels present in y_true maximising total overlap.
/// Throws DataError when the cluster count differs from the present label count.
ClusterAssignment align_clusters_to_labels(ClusterAssignment assign, const LabelVector& y_true);

/// "vertex,cluster,label" rows; label is -1 for an unaligned assignment.
void write_assignment(const std::filesystem::path& path, const ClusterAssignment& assign);
ClusterAssignment read_assignment(const std::filesystem::path& path);

}  // namespace isograph

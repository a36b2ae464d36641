#include "isograph/clustering.hpp"

#include "isograph/error.hpp"
#include "isograph/parallel.hpp"
#include "isograph/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace isograph {

namespace {

double sq_dist(const Eigen::MatrixXd& x, Index i, const Eigen::MatrixXd& c, Index j) {
  return (x.row(i) - c.row(j)).squaredNorm();
}

// Draws an index with probability proportional to weights (sum > 0).
Index draw(const std::vector<double>& weights, double total, Rng& rng) {
  const double target = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return static_cast<Index>(i);
  }
  // rounding: last point with positive weight
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return static_cast<Index>(i);
  return 0;
}

Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(x, i, centers, 0);
  const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) {
      // every point coincides with a center; duplicate the first point
      centers.row(c) = x.row(0);
      continue;
    }
    Index best = -1;
    double best_pot = std::numeric_limits<double>::infinity();
    std::vector<double> best_d2;
    for (int t = 0; t < trials; ++t) {
      const Index cand = draw(d2, total, rng);
      std::vector<double> nd2(d2);
      double pot = 0.0;
      for (Index i = 0; i < n; ++i) {
        auto& v = nd2[static_cast<std::size_t>(i)];
        v = std::min(v, (x.row(i) - x.row(cand)).squaredNorm());
        pot += v;
      }
      if (pot < best_pot) {
        best_pot = pot;
        best = cand;
        best_d2.swap(nd2);
      }
    }
    centers.row(c) = x.row(best);
    d2.swap(best_d2);
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& x, int k, std::uint64_t seed, const KMeansOptions& opt) {
  Rng rng(seed);
  const Index n = x.rows();
  KMeansResult res;
  res.centers = seed_centers(x, k, rng);
  res.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n));
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    double obj = 0.0;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x, i, res.centers, 0);
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(x, i, res.centers, c);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      res.assignment[static_cast<std::size_t>(i)] = best;
      dist[static_cast<std::size_t>(i)] = bd;
      obj += bd;
    }
    res.history.push_back(obj);
    res.objective = obj;
    if (prev < std::numeric_limits<double>::infinity() && prev - obj <= opt.rel_tol * std::max(prev, 1e-300))
      break;
    prev = obj;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int c = res.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        res.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
      res.centers.row(c) = x.row(far);
      dist[static_cast<std::size_t>(far)] = 0.0;
    }
  }
  return res;
}

}  // namespace

std::vector<int> ClusterAssignment::predicted_labels() const {
  if (!aligned()) throw DataError("cluster assignment has not been aligned to labels");
  std::vector<int> out(cluster.size());
  for (std::size_t i = 0; i < cluster.size(); ++i)
    out[i] = cluster_to_label[static_cast<std::size_t>(cluster[i])];
  return out;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1 || k > points.rows())
    throw DataError("k-means needs 1 <= k <= n (k = " + std::to_string(k) + ", n = " +
                    std::to_string(points.rows()) + ")");
  if (!points.allFinite()) throw NumericError("k-means input has non-finite values");
  const int restarts = std::max(1, options.restarts);
  std::vector<KMeansResult> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), [&](std::size_t r) {
    runs[r] = lloyd(points, k, Rng::derive_seed(seed, r), options);
    runs[r].restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].objective < runs[best].objective) best = r;
  return std::move(runs[best]);
}

ClusterAssignment spectral_cluster(const Graph& g, int n_u, std::uint64_t seed, const KMeansOptions& options) {
  if (n_u < 2) throw ConfigError("cluster count must be >= 2");
  if (n_u > g.size())
    throw DataError("cluster count " + std::to_string(n_u) + " exceeds vertex count " + std::to_string(g.size()));
  const Eigen::MatrixXd l(laplacian(g).matrix);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) throw NumericError("Laplacian eigendecomposition did not converge");
  const Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(n_u);
  const auto km = kmeans(embedding, n_u, seed, options);
  ClusterAssignment a;
  a.cluster = km.assignment;
  a.n_clusters = n_u;
  a.seed = seed;
  return a;
}

ClusterAssignment align_clusters_to_labels(ClusterAssignment assign, const LabelVector& y_true) {
  if (assign.cluster.size() != y_true.size())
    throw DataError("assignment covers " + std::to_string(assign.cluster.size()) + " vertices, labels " +
                    std::to_string(y_true.size()));
  const auto present = y_true.present_classes();
  const int c = assign.n_clusters;
  if (static_cast<int>(present.size()) != c)
    throw DataError(std::to_string(c) + " clusters but " + std::to_string(present.size()) + " labels present");
  std::vector<int> column(static_cast<std::size_t>(y_true.class_count()), -1);
  for (std::size_t t = 0; t < present.size(); ++t) column[static_cast<std::size_t>(present[t])] = static_cast<int>(t);
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(c, c);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int k = assign.cluster[i];
    if (k < 0 || k >= c) throw DataError("cluster id " + std::to_string(k) + " out of range");
    cost(k, column[static_cast<std::size_t>(y_true[i])]) -= 1.0;
  }
  const auto match = hungarian(cost);
  assign.cluster_to_label.resize(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k)
    assign.cluster_to_label[static_cast<std::size_t>(k)] = present[static_cast<std::size_t>(match.row_to_col[static_cast<std::size_t>(k)])];
  assign.accuracy = y_true.size() ? -match.total / static_cast<double>(y_true.size()) : 0.0;
  return assign;
}

void write_assignment(const std::filesystem::path& path, const ClusterAssignment& assign) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "vertex,cluster,label\n";
  for (std::size_t i = 0; i < assign.cluster.size(); ++i) {
    const int k = assign.cluster[i];
    out << i << ',' << k << ',' << (assign.aligned() ? assign.cluster_to_label[static_cast<std::size_t>(k)] : -1)
        << '\n';
  }
  if (!out) throw DataError("write failure on " + path.string());
}

ClusterAssignment read_assignment(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "vertex,cluster,label") throw DataError(path.string() + ": missing 'vertex,cluster,label' header");
  ClusterAssignment a;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    long v = 0;
    int k = 0, lab = 0;
    char c1 = 0, c2 = 0;
    if (!(ss >> v >> c1 >> k >> c2 >> lab) || c1 != ',' || c2 != ',' || v != static_cast<long>(row) || k < 0)
      throw DataError(path.string() + ": malformed row " + std::to_string(row + 2));
    a.cluster.push_back(k);
    labels.push_back(lab);
    a.n_clusters = std::max(a.n_clusters, k + 1);
    ++row;
  }
  if (!labels.empty() && labels.front() >= 0) {
    a.cluster_to_label.assign(static_cast<std::size_t>(a.n_clusters), -1);
    for (std::size_t i = 0; i < labels.size(); ++i) a.cluster_to_label[static_cast<std::size_t>(a.cluster[i])] = labels[i];
  }
  return a;
}

}  // namespace isograph

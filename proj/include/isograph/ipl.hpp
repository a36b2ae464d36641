#pragma once

#include "isograph/graph.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace isograph {

struct IplParams {
  double delta = 2.0;    // isoperimetric dimension, > 1
  double c_delta = 1.0;  // isoperimetric constant, > 0
  int r = 3;             // ball radius in hops, >= 1
  double lambda = 1.0;   // trade-off weight of the direct objective, >= 0

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct GapReport {
  std::vector<double> beta;
  double mean = 0.0;
  double positive_fraction = 0.0;
};

/// Sum of w_ij over neighbours j of i strictly closer (in hops) to xi than i.
double flow_toward(const Graph& g, Index i, Index xi);

/// Sum of flow_toward over the shell at distance exactly r; equals the cut
/// weight between {d < r} and {d >= r}.
double geodesic_flow(const Graph& g, Index xi, int r);

/// Sum of w_ij over unordered edges with both ends in ball(g, xi, r).
double ball_volume(const Graph& g, Index xi, int r);

/// c_delta * ball_volume^(1 - 1/delta) - geodesic_flow, unclamped.
double isoperimetric_gap(const Graph& g, Index xi, const IplParams& p);

/// Gap at every vertex; mean by pairwise summation, so the value does not
/// depend on the thread count.
GapReport mean_gap(const Graph& g, const IplParams& p);

/// sum over xi of [ sum over in-ball edges {i,j} of |s_i - s_j| w_ij + lambda beta(xi) ].
/// Evaluation only.
double direct_objective(const Graph& g, const EmbeddingMatrix& s, const IplParams& p);

/// Mean over sampled centers of the least-squares slope of log ball_volume
/// against log(r - 1), r = 2..r_max, clamped to [1 + 1e-6, 64]. Centers are
/// min(n, 64) vertices drawn without replacement from `seed`.
double estimate_delta(const Graph& g, int r_max = 4, std::uint64_t seed = 0);

/// "vertex,beta" rows plus a "# mean=<v> pos_frac=<v>" trailer.
void write_gap_report(const std::filesystem::path& path, const GapReport& report);
GapReport read_gap_report(const std::filesystem::path& path);

}  // namespace isograph

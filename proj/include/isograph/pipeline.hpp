#pragma once

#include "isograph/config.hpp"
#include "isograph/eval.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace isograph {

/// Visual blobs Z plus semantic samples S = Z P^T for a random P with
/// orthonormal rows, the stand-in for a fixed visual embedding and a learned
/// linear map.
struct SyntheticZsl {
  EmbeddingMatrix visual;
  EmbeddingMatrix semantic;
  LabelVector labels;
};

SyntheticZsl make_synthetic_zsl(const SynthConfig& spec, std::uint64_t seed);

struct PipelineSummary {
  std::vector<std::string> stages;
  std::optional<ScoreReport> score;
  std::optional<double> baseline_accuracy;  // clustering kNN(S_u) without regularisation
  double gap_before = 0.0;
  double gap_after = 0.0;
  int r0 = 0;
  bool r0_fallback = false;
  double delta = 0.0;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs the configured mode and writes fixed-name artifacts under `out`:
/// score.csv, gap_before.csv, gap_after.csv, s_hat.bin, graph_prime.edges.
/// On failure every artifact written so far is renamed with a ".partial"
/// suffix and the error is rethrown prefixed with the stage name. With
/// dry_run the config is validated and the stage plan returned, nothing else.
PipelineSummary run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out, bool dry_run,
                             std::ostream& log);

}  // namespace isograph

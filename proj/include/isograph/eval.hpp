#pragma once

#include "isograph/dataset.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace isograph {

struct GzslScores {
  double acc_s = 0.0;
  double acc_t = 0.0;
  double h = 0.0;
};

struct ScoreReport {
  /// Indexed by class id; NaN for classes absent from the truth.
  std::vector<double> per_class;
  double mean_class_accuracy = 0.0;  // in [0, 1]
  std::optional<GzslScores> gzsl;
  /// Classes excluded from the mean because no truth sample carries them.
  std::vector<int> skipped_classes;
};

/// Per-class hit rate averaged over the classes present in truth.
ScoreReport mean_class_accuracy(const std::vector<int>& pred, const LabelVector& truth);

/// 2 a b / (a + b); 0 when either side is 0. Throws DataError outside [0, 1].
double gzsl_harmonic(double acc_s, double acc_t);

/// Class-balanced accuracy over seen-class samples and over unseen-class
/// samples separately, predictions ranging over both sets.
ScoreReport gzsl_evaluate(const std::vector<int>& pred, const LabelVector& truth, const SplitSpec& split);

/// key,value rows: class.<id>, mean_class_accuracy, then acc_s, acc_t, h for GZSL.
void write_score_csv(const std::filesystem::path& path, const ScoreReport& report);
ScoreReport read_score_csv(const std::filesystem::path& path);
void print_score_table(std::ostream& out, const ScoreReport& report);

}  // namespace isograph

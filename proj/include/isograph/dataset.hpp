#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isograph {

using Index = Eigen::Index;

/// N x D matrix of finite row vectors (visual or semantic samples). Row i is
/// sample id i.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  /// Throws DataError on an empty shape or a non-finite entry.
  explicit EmbeddingMatrix(Eigen::MatrixXd values);

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  bool empty() const { return values_.size() == 0; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(Index i, Index j) const { return values_(i, j); }

 private:
  Eigen::MatrixXd values_;
};

/// Integer class id per sample. class_count is max id + 1; ids in range that
/// never occur are reported by absent_classes() instead of being an error.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<int> labels);
  LabelVector(std::vector<int> labels, int class_count);

  const std::vector<int>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  int operator[](std::size_t i) const { return labels_[i]; }
  int class_count() const { return class_count_; }
  std::vector<int> absent_classes() const;
  std::vector<int> present_classes() const;
  bool sparse() const { return !absent_classes().empty(); }

 private:
  std::vector<int> labels_;
  int class_count_ = 0;
};

struct SplitSpec {
  std::vector<int> seen_class_ids;
  std::vector<int> unseen_class_ids;
};

/// Samples of one side of a split; ids refer to rows of the source matrix.
struct Subset {
  std::vector<Index> ids;
  std::vector<int> labels;
  Eigen::MatrixXd values;
  std::size_t size() const { return ids.size(); }
};

struct SplitResult {
  Subset seen;
  Subset unseen;
};

enum class MatrixFormat { csv, bin };
enum class Structure { gaussian_blob, noisy_circle, noisy_swiss_band };

MatrixFormat parse_format(const std::string& name);
Structure parse_structure(const std::string& name);
std::string to_string(Structure s);

struct SyntheticSpec {
  int cluster_count = 2;
  int points_per_cluster = 50;
  int ambient_dim = 8;
  Structure structure = Structure::gaussian_blob;
  double noise_sigma = 0.1;
  double center_spacing = 1.0;
  std::uint64_t rng_seed = 1;
};

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, MatrixFormat format,
                                bool skip_header = false);
void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                     MatrixFormat format);

/// One base-10 integer per line. expected_count, when given, must match.
LabelVector load_labels(const std::filesystem::path& path,
                        std::optional<std::size_t> expected_count = std::nullopt);
void save_labels(const std::filesystem::path& path, const LabelVector& labels);

std::pair<EmbeddingMatrix, LabelVector> generate_synthetic(const SyntheticSpec& spec);

SplitResult split_by_classes(const EmbeddingMatrix& x, const LabelVector& y,
                             const SplitSpec& split);

/// "%.17g"; enough digits for an exact double round trip through text.
std::string format_double(double v);

}  // namespace isograph

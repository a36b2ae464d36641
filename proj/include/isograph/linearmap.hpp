#pragma once

#include "isograph/dataset.hpp"

namespace isograph {

/// One M-dimensional semantic vector per class id (row index = class id).
class ClassSemanticTable {
 public:
  ClassSemanticTable() = default;
  /// normalize=true L2-normalises every row (used with the cosine metric).
  explicit ClassSemanticTable(const EmbeddingMatrix& rows, bool normalize = false);

  const Eigen::MatrixXd& rows() const { return rows_; }
  int class_count() const { return static_cast<int>(rows_.rows()); }
  Index dim() const { return rows_.cols(); }

 private:
  Eigen::MatrixXd rows_;
};

/// psi(z) = V z with V of shape M x K.
class LinearMap {
 public:
  LinearMap(Eigen::MatrixXd v, double gamma, double lambda_reg);

  const Eigen::MatrixXd& v() const { return v_; }
  double gamma() const { return gamma_; }
  double lambda_reg() const { return lambda_reg_; }
  Index semantic_dim() const { return v_.rows(); }
  Index visual_dim() const { return v_.cols(); }

 private:
  Eigen::MatrixXd v_;
  double gamma_;
  double lambda_reg_;
};

/// ESZSL objective over the seen classes that occur in y_s:
///   |Z V^T S - Y|^2 + gamma |V^T S|^2 + lambda |Z V^T|^2 + gamma lambda |V^T|^2
/// with S the M x C matrix of seen-class semantic columns and Y one-hot.
double eszsl_objective(const Eigen::MatrixXd& v, const EmbeddingMatrix& z_s, const LabelVector& y_s,
                       const ClassSemanticTable& sem, double gamma, double lambda_reg);

/// Closed-form minimiser of eszsl_objective:
///   (Z^T Z + gamma I) V^T (S S^T + lambda I) = Z^T Y S^T,
/// solved as two symmetric positive-definite systems. Throws NumericError when
/// a system is singular (zero regulariser with rank-deficient data).
LinearMap train_linear_map(const EmbeddingMatrix& z_s, const LabelVector& y_s,
                           const ClassSemanticTable& sem, double gamma = 1.0,
                           double lambda_reg = 1.0);

EmbeddingMatrix project(const LinearMap& map, const EmbeddingMatrix& z);

enum class Metric { euclidean, cosine };
Metric parse_metric(const std::string& name);

/// argmin over table rows of the metric distance to sigma; lowest id wins ties.
int nearest_class(const Eigen::VectorXd& sigma, const ClassSemanticTable& sem,
                  Metric metric = Metric::euclidean);

}  // namespace isograph

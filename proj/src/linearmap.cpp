#include "isograph/linearmap.hpp"

#include "isograph/error.hpp"

#include <cmath>
#include <limits>

namespace isograph {

namespace {

struct SeenSystem {
  Eigen::MatrixXd s;       // M x C, seen-class columns
  Eigen::MatrixXd onehot;  // N x C
};

SeenSystem seen_system(const EmbeddingMatrix& z_s, const LabelVector& y_s,
                       const ClassSemanticTable& sem) {
  if (static_cast<Index>(y_s.size()) != z_s.rows())
    throw DataError("seen label count does not match seen sample count");
  const auto classes = y_s.present_classes();
  if (classes.empty()) throw DataError("no seen samples");
  for (int c : classes)
    if (c >= sem.class_count())
      throw DataError("semantic table has no row for class " + std::to_string(c));
  std::vector<int> column_of(static_cast<std::size_t>(y_s.class_count()), -1);
  SeenSystem sys;
  sys.s.resize(sem.dim(), static_cast<Index>(classes.size()));
  for (std::size_t k = 0; k < classes.size(); ++k) {
    column_of[static_cast<std::size_t>(classes[k])] = static_cast<int>(k);
    sys.s.col(static_cast<Index>(k)) = sem.rows().row(classes[k]).transpose();
  }
  sys.onehot = Eigen::MatrixXd::Zero(z_s.rows(), static_cast<Index>(classes.size()));
  for (std::size_t i = 0; i < y_s.size(); ++i)
    sys.onehot(static_cast<Index>(i), column_of[static_cast<std::size_t>(y_s[i])]) = 1.0;
  return sys;
}

Eigen::LDLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& a, const char* what) {
  Eigen::LDLT<Eigen::MatrixXd> f(a);
  // rcond() skips exactly-zero pivots, so check the pivot spread as well
  const Eigen::VectorXd d = f.vectorD().cwiseAbs();
  if (f.info() != Eigen::Success || !f.isPositive() || d.minCoeff() <= 1e-13 * d.maxCoeff() ||
      f.rcond() < 1e-13)
    throw NumericError(std::string("singular ") + what +
                       " system; increase the regulariser or check data rank");
  return f;
}

}  // namespace

ClassSemanticTable::ClassSemanticTable(const EmbeddingMatrix& rows, bool normalize)
    : rows_(rows.values()) {
  if (normalize) {
    for (Index i = 0; i < rows_.rows(); ++i) {
      const double n = rows_.row(i).norm();
      if (n == 0.0) throw DataError("zero semantic row " + std::to_string(i) + " cannot be normalised");
      rows_.row(i) /= n;
    }
  }
}

LinearMap::LinearMap(Eigen::MatrixXd v, double gamma, double lambda_reg)
    : v_(std::move(v)), gamma_(gamma), lambda_reg_(lambda_reg) {
  if (v_.rows() < 1 || v_.cols() < 1) throw DataError("linear map must be at least 1x1");
  if (!v_.allFinite()) throw NumericError("linear map has non-finite entries");
}

double eszsl_objective(const Eigen::MatrixXd& v, const EmbeddingMatrix& z_s, const LabelVector& y_s,
                       const ClassSemanticTable& sem, double gamma, double lambda_reg) {
  const auto sys = seen_system(z_s, y_s, sem);
  const Eigen::MatrixXd vt = v.transpose();
  const Eigen::MatrixXd zv = z_s.values() * vt;
  return (zv * sys.s - sys.onehot).squaredNorm() + gamma * (vt * sys.s).squaredNorm() +
         lambda_reg * zv.squaredNorm() + gamma * lambda_reg * vt.squaredNorm();
}

LinearMap train_linear_map(const EmbeddingMatrix& z_s, const LabelVector& y_s,
                           const ClassSemanticTable& sem, double gamma, double lambda_reg) {
  if (!(gamma >= 0.0) || !(lambda_reg >= 0.0))
    throw ConfigError("ESZSL regularisers must be >= 0");
  const auto sys = seen_system(z_s, y_s, sem);
  const auto& z = z_s.values();
  const Index k = z.cols();
  const Index m = sys.s.rows();

  const Eigen::MatrixXd visual = z.transpose() * z + gamma * Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd semantic =
      sys.s * sys.s.transpose() + lambda_reg * Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd rhs = z.transpose() * sys.onehot * sys.s.transpose();  // K x M

  const auto visual_f = spd_factor(visual, "visual-side");
  const auto semantic_f = spd_factor(semantic, "semantic-side");
  const Eigen::MatrixXd left = visual_f.solve(rhs);                  // A^-1 R
  const Eigen::MatrixXd vt = semantic_f.solve(left.transpose()).transpose();  // (B^-1 (A^-1 R)^T)^T
  return LinearMap(vt.transpose(), gamma, lambda_reg);
}

EmbeddingMatrix project(const LinearMap& map, const EmbeddingMatrix& z) {
  if (z.cols() != map.visual_dim())
    throw DataError("visual dimension " + std::to_string(z.cols()) + " does not match map input " +
                    std::to_string(map.visual_dim()));
  return EmbeddingMatrix(z.values() * map.v().transpose());
}

Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw ConfigError("unknown metric '" + name + "'");
}

int nearest_class(const Eigen::VectorXd& sigma, const ClassSemanticTable& sem, Metric metric) {
  if (sem.class_count() == 0) throw DataError("empty semantic table");
  if (sigma.size() != sem.dim()) throw DataError("semantic vector dimension mismatch");
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  const double sigma_norm = sigma.norm();
  for (int c = 0; c < sem.class_count(); ++c) {
    const auto row = sem.rows().row(c).transpose();
    double d;
    if (metric == Metric::euclidean) {
      d = (row - sigma).squaredNorm();
    } else {
      const double denom = row.norm() * sigma_norm;
      d = denom > 0.0 ? 1.0 - row.dot(sigma) / denom : 1.0;
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace isograph

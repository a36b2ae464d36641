#include "isograph/error.hpp"
#include "isograph/linearmap.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace isograph;

namespace {

struct Instance {
  EmbeddingMatrix z;
  LabelVector y;
  ClassSemanticTable sem;
};

Instance random_instance(Index n, Index k, int classes, Index m, Rng& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>(i % classes);
  return {EmbeddingMatrix(oracle::gaussian(n, k, rng)), LabelVector(labels),
          ClassSemanticTable(EmbeddingMatrix(oracle::gaussian(classes, m, rng)))};
}

oracle::EszslProblem problem_of(const Instance& in, double gamma, double lambda) {
  oracle::EszslProblem p;
  p.z = in.z.values();
  const int c = in.sem.class_count();
  p.y = Eigen::MatrixXd::Zero(in.z.rows(), c);
  for (std::size_t i = 0; i < in.y.size(); ++i) p.y(static_cast<Index>(i), in.y[i]) = 1.0;
  p.s = in.sem.rows().transpose();
  p.gamma = gamma;
  p.lambda = lambda;
  return p;
}

}  // namespace

TEST_CASE("one-hot interpolation with vanishing regularisers") {
  // orthonormal visual rows, one sample per class
  const EmbeddingMatrix z(Eigen::MatrixXd::Identity(3, 3));
  const LabelVector y(std::vector<int>{0, 1, 2});
  const ClassSemanticTable sem(EmbeddingMatrix(Eigen::MatrixXd::Identity(3, 3)));
  const auto map = train_linear_map(z, y, sem, 1e-10, 1e-10);
  const auto s = project(map, z);
  CHECK((s.values() - sem.rows()).norm() < 1e-8);
}

TEST_CASE("closed form matches a gradient-descent minimiser") {
  Rng rng(21);
  const auto in = random_instance(30, 8, 3, 4, rng);
  const auto map = train_linear_map(in.z, in.y, in.sem, 0.1, 0.1);
  const auto p = problem_of(in, 0.1, 0.1);
  const Eigen::MatrixXd w = oracle::gradient_descent(p);
  CHECK((map.v().transpose() - w).norm() / w.norm() < 1e-6);
  const double f_closed = eszsl_objective(map.v(), in.z, in.y, in.sem, 0.1, 0.1);
  CHECK(std::abs(f_closed - p.value(w)) / p.value(w) < 1e-6);
}

TEST_CASE("returned map is a local minimum") {
  Rng rng(22);
  const auto in = random_instance(25, 6, 4, 3, rng);
  const auto map = train_linear_map(in.z, in.y, in.sem, 0.5, 2.0);
  const double f0 = eszsl_objective(map.v(), in.z, in.y, in.sem, 0.5, 2.0);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd dv = 1e-3 * oracle::gaussian(map.v().rows(), map.v().cols(), rng);
    CHECK(eszsl_objective(map.v() + dv, in.z, in.y, in.sem, 0.5, 2.0) >= f0);
  }
}

TEST_CASE("map norm shrinks as gamma grows") {
  Rng rng(23);
  const auto in = random_instance(20, 5, 2, 3, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (double gamma : {0.1, 1.0, 10.0, 100.0, 1e4, 1e8}) {
    const double nrm = train_linear_map(in.z, in.y, in.sem, gamma, 1.0).v().norm();
    CHECK(nrm < prev);
    prev = nrm;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("singular system without regularisation is a numeric error") {
  // 2 samples in 4 dimensions: Z^T Z is rank 2
  const EmbeddingMatrix z(Eigen::MatrixXd::Random(2, 4));
  const LabelVector y(std::vector<int>{0, 1});
  const ClassSemanticTable sem(EmbeddingMatrix(Eigen::MatrixXd::Random(2, 3)));
  CHECK_THROWS_AS(train_linear_map(z, y, sem, 0.0, 0.0), NumericError);
  // identical rows give exactly zero pivots
  const EmbeddingMatrix flat(Eigen::MatrixXd::Ones(4, 3));
  const LabelVector y4(std::vector<int>{0, 1, 0, 1});
  const ClassSemanticTable sem2(EmbeddingMatrix(Eigen::MatrixXd::Identity(2, 2)));
  CHECK_THROWS_AS(train_linear_map(flat, y4, sem2, 0.0, 0.0), NumericError);
  CHECK_NOTHROW(train_linear_map(flat, y4, sem2, 1.0, 1.0));
}

TEST_CASE("shape mismatches are data errors") {
  const EmbeddingMatrix z(Eigen::MatrixXd::Random(4, 3));
  const ClassSemanticTable sem(EmbeddingMatrix(Eigen::MatrixXd::Random(2, 3)));
  CHECK_THROWS_AS(train_linear_map(z, LabelVector(std::vector<int>{0, 1}), sem), DataError);
  CHECK_THROWS_AS(train_linear_map(z, LabelVector(std::vector<int>{0, 1, 2, 0}), sem), DataError);
  const LinearMap map(Eigen::MatrixXd::Identity(2, 2), 1.0, 1.0);
  CHECK_THROWS_AS(project(map, z), DataError);
}

TEST_CASE("projection identities") {
  Rng rng(24);
  const EmbeddingMatrix z(oracle::gaussian(7, 4, rng));
  CHECK(project(LinearMap(Eigen::MatrixXd::Identity(4, 4), 0, 0), z).values() == z.values());
  CHECK(project(LinearMap(Eigen::MatrixXd::Zero(3, 4), 0, 0), z).values().isZero());

  const Eigen::MatrixXd v = oracle::gaussian(3, 4, rng);
  const auto s = project(LinearMap(v, 0, 0), z);
  for (Index j = 0; j < 3; ++j) {
    double dot = 0.0;
    for (Index k = 0; k < 4; ++k) dot += v(j, k) * z(0, k);
    CHECK(s(0, j) == doctest::Approx(dot).epsilon(1e-14));
  }
}

TEST_CASE("projection is linear") {
  Rng rng(25);
  const LinearMap map(oracle::gaussian(3, 5, rng), 0, 0);
  const Eigen::MatrixXd z1 = oracle::gaussian(6, 5, rng), z2 = oracle::gaussian(6, 5, rng);
  const auto lhs = project(map, EmbeddingMatrix(2.5 * z1 - 0.5 * z2)).values();
  const Eigen::MatrixXd rhs = 2.5 * project(map, EmbeddingMatrix(z1)).values() -
                              0.5 * project(map, EmbeddingMatrix(z2)).values();
  CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
}

TEST_CASE("nearest class picks exact rows, lowest id on ties") {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 0, -1, 0, 0, 5;
  const ClassSemanticTable sem{EmbeddingMatrix(rows)};
  CHECK(nearest_class(Eigen::Vector2d(0, 5), sem) == 2);
  CHECK(nearest_class(Eigen::Vector2d(0, 0), sem) == 0);
  CHECK(nearest_class(Eigen::Vector2d(0.2, 0.1), sem, Metric::cosine) == 0);
  CHECK_THROWS_AS(nearest_class(Eigen::Vector2d(0, 0), ClassSemanticTable{}), DataError);
}

TEST_CASE("nearest class matches an exhaustive scan and ignores farther rows") {
  Rng rng(26);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd rows = oracle::gaussian(5, 4, rng);
    const Eigen::VectorXd sigma = oracle::gaussian(4, 1, rng);
    int best = 0;
    for (int c = 1; c < 5; ++c)
      if ((rows.row(c).transpose() - sigma).norm() < (rows.row(best).transpose() - sigma).norm()) best = c;
    const ClassSemanticTable sem{EmbeddingMatrix(rows)};
    CHECK(nearest_class(sigma, sem) == best);

    Eigen::MatrixXd more(6, 4);
    more << rows, (sigma + 100.0 * Eigen::VectorXd::Ones(4)).transpose();
    CHECK(nearest_class(sigma, ClassSemanticTable{EmbeddingMatrix(more)}) == best);
  }
}

TEST_CASE("cosine table rows are normalised on load") {
  Eigen::MatrixXd rows(2, 2);
  rows << 3, 4, 0, 2;
  const ClassSemanticTable sem(EmbeddingMatrix(rows), true);
  CHECK(sem.rows().row(0).norm() == doctest::Approx(1.0));
  CHECK(sem.rows().row(1).norm() == doctest::Approx(1.0));
}

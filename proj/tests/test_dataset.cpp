#include "isograph/dataset.hpp"
#include "isograph/clustering.hpp"
#include "isograph/error.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace isograph;

TEST_CASE("csv matrix parses rows and columns") {
  TempDir dir("ds");
  write_text(dir / "m.csv", "1.0,0.0\n0.0,1.0\n1.0,1.0\n");
  const auto m = load_embeddings(dir / "m.csv", MatrixFormat::csv);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(2, 1) == 1.0);
  CHECK(m(1, 0) == 0.0);
}

TEST_CASE("csv header flag skips the first line") {
  TempDir dir("ds");
  write_text(dir / "m.csv", "a,b\n1,2\n");
  const auto m = load_embeddings(dir / "m.csv", MatrixFormat::csv, true);
  CHECK(m.rows() == 1);
  CHECK_THROWS_AS(load_embeddings(dir / "m.csv", MatrixFormat::csv), DataError);
}

TEST_CASE("non-finite token is reported with its position") {
  TempDir dir("ds");
  write_text(dir / "m.csv", "1,2\n3,nan\n");
  try {
    load_embeddings(dir / "m.csv", MatrixFormat::csv);
    FAIL("expected an error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("column 1") != std::string::npos);
  }
}

TEST_CASE("ragged rows, empty files and missing files are errors") {
  TempDir dir("ds");
  write_text(dir / "ragged.csv", "1,2\n3\n");
  write_text(dir / "empty.csv", "");
  CHECK_THROWS_AS(load_embeddings(dir / "ragged.csv", MatrixFormat::csv), DataError);
  CHECK_THROWS_AS(load_embeddings(dir / "empty.csv", MatrixFormat::csv), DataError);
  CHECK_THROWS_AS(load_embeddings(dir / "nope.bin", MatrixFormat::bin), DataError);
}

TEST_CASE("binary round trip is exact and byte-stable") {
  TempDir dir("ds");
  Rng rng(3);
  const EmbeddingMatrix m(oracle::gaussian(50, 16, rng));
  save_embeddings(dir / "a.bin", m, MatrixFormat::bin);
  const auto back = load_embeddings(dir / "a.bin", MatrixFormat::bin);
  CHECK(back.values() == m.values());
  save_embeddings(dir / "b.bin", back, MatrixFormat::bin);
  CHECK(read_text(dir / "a.bin") == read_text(dir / "b.bin"));
  const auto bytes = read_text(dir / "a.bin");
  CHECK(bytes.substr(0, 4) == "IGR1");
  CHECK(bytes.size() == 4 + 16 + 50 * 16 * 8);
}

TEST_CASE("csv round trip is value-identical") {
  TempDir dir("ds");
  Rng rng(4);
  const EmbeddingMatrix m(oracle::gaussian(20, 5, rng) * 1e-3);
  save_embeddings(dir / "a.csv", m, MatrixFormat::csv);
  CHECK(load_embeddings(dir / "a.csv", MatrixFormat::csv).values() == m.values());
}

TEST_CASE("labels load with class count and sparse flag") {
  TempDir dir("ds");
  write_text(dir / "a.txt", "0\n1\n0\n");
  const auto a = load_labels(dir / "a.txt");
  CHECK(a.labels() == std::vector<int>{0, 1, 0});
  CHECK(a.class_count() == 2);
  CHECK_FALSE(a.sparse());

  write_text(dir / "b.txt", "2\n2\n2\n");
  const auto b = load_labels(dir / "b.txt");
  CHECK(b.class_count() == 3);
  CHECK(b.absent_classes() == std::vector<int>{0, 1});
  CHECK(b.sparse());

  write_text(dir / "c.txt", "");
  CHECK_THROWS_AS(load_labels(dir / "c.txt"), DataError);
  write_text(dir / "d.txt", "1\n-1\n");
  CHECK_THROWS_AS(load_labels(dir / "d.txt"), DataError);
  write_text(dir / "e.txt", "1\nx\n");
  CHECK_THROWS_AS(load_labels(dir / "e.txt"), DataError);
  CHECK_THROWS_AS(load_labels(dir / "a.txt", 4), DataError);
}

TEST_CASE("zero-noise blobs collapse onto their centers") {
  SyntheticSpec s;
  s.cluster_count = 2;
  s.points_per_cluster = 10;
  s.noise_sigma = 0.0;
  const auto [x, y] = generate_synthetic(s);
  std::set<std::vector<double>> distinct;
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x.values()(i, j);
    distinct.insert(row);
  }
  CHECK(x.rows() == 20);
  CHECK(distinct.size() == 2);
  CHECK(y.class_count() == 2);
}

TEST_CASE("synthetic generation is a pure function of spec and seed") {
  for (auto st : {Structure::gaussian_blob, Structure::noisy_circle, Structure::noisy_swiss_band}) {
    SyntheticSpec s;
    s.structure = st;
    s.rng_seed = 99;
    const auto a = generate_synthetic(s);
    const auto b = generate_synthetic(s);
    CHECK(a.first.values() == b.first.values());
    CHECK(a.second.labels() == b.second.labels());
    s.rng_seed = 100;
    CHECK(generate_synthetic(s).first.values() != a.first.values());
  }
}

TEST_CASE("tight blobs are separated perfectly by k-means") {
  SyntheticSpec s;
  s.cluster_count = 3;
  s.points_per_cluster = 30;
  s.ambient_dim = 5;
  s.noise_sigma = 0.05;
  s.rng_seed = 7;
  const auto [x, y] = generate_synthetic(s);
  const auto km = kmeans(x.values(), 3, 11);
  ClusterAssignment a;
  a.cluster = km.assignment;
  a.n_clusters = 3;
  CHECK(align_clusters_to_labels(a, y).accuracy == 1.0);
}

TEST_CASE("class split partitions samples and keeps ids") {
  const EmbeddingMatrix x(Eigen::MatrixXd::Random(4, 2));
  const LabelVector y(std::vector<int>{0, 0, 1, 1});
  const auto r = split_by_classes(x, y, {{0}, {1}});
  CHECK(r.seen.ids == std::vector<Index>{0, 1});
  CHECK(r.unseen.ids == std::vector<Index>{2, 3});
  CHECK(r.unseen.values.row(1) == x.values().row(3));

  const auto all = split_by_classes(x, y, {{0, 1}, {}});
  CHECK(all.seen.size() == 4);
  CHECK(all.unseen.size() == 0);

  CHECK_THROWS_AS(split_by_classes(x, y, {{0}, {0, 1}}), DataError);
  CHECK_THROWS_AS(split_by_classes(x, y, {{0}, {5}}), DataError);
}

TEST_CASE("forty/ten class split sizes follow per-class counts") {
  std::vector<int> labels;
  for (int c = 0; c < 50; ++c)
    for (int t = 0; t < 3 + c % 4; ++t) labels.push_back(c);
  const LabelVector y(labels);
  const EmbeddingMatrix x(Eigen::MatrixXd::Ones(static_cast<Index>(labels.size()), 3));
  SplitSpec s;
  for (int c = 0; c < 40; ++c) s.seen_class_ids.push_back(c);
  for (int c = 40; c < 50; ++c) s.unseen_class_ids.push_back(c);
  const auto r = split_by_classes(x, y, s);
  std::size_t expect_unseen = 0;
  for (int c = 40; c < 50; ++c) expect_unseen += static_cast<std::size_t>(3 + c % 4);
  CHECK(r.unseen.size() == expect_unseen);
  CHECK(r.seen.size() + r.unseen.size() == labels.size());
}

#include "isograph/pipeline.hpp"

#include "isograph/error.hpp"
#include "isograph/rng.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace isograph {

namespace {

// Rethrows with the stage name in front, keeping the error category (and so
// the CLI exit code).
template <class Fn>
auto stage(const char* name, Fn&& fn) {
  const std::string prefix = std::string("stage ") + name + ": ";
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(prefix + e.what());
  }
}

class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

  template <class Fn>
  void write(const std::string& name, Fn&& fn) {
    const auto path = dir_ / name;
    written_.push_back(path);
    fn(path);
  }

  void mark_partial() noexcept {
    for (const auto& p : written_) {
      std::error_code ec;
      if (std::filesystem::exists(p, ec)) std::filesystem::rename(p, p.string() + ".partial", ec);
    }
  }

  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
};

std::vector<std::string> plan(Mode mode, bool baseline) {
  std::vector<std::string> s;
  switch (mode) {
    case Mode::synth: s = {"generate", "graph"}; break;
    case Mode::zsl:
    case Mode::gzsl: s = {"load", "embed", "graph"}; break;
    case Mode::diagnose: return {"load", "regularize", "write"};
  }
  if (baseline) s.push_back("baseline");
  for (const char* t : {"regularize", "cluster", "align", "score", "write"}) s.push_back(t);
  return s;
}

struct Transductive {
  EmbeddingMatrix visual;    // pool rows
  EmbeddingMatrix semantic;  // same rows
  LabelVector truth;
};

EmbeddingMatrix take_rows(const EmbeddingMatrix& m, const std::vector<Index>& ids) {
  Eigen::MatrixXd out(static_cast<Index>(ids.size()), m.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Index>(i)) = m.values().row(ids[i]);
  return EmbeddingMatrix(std::move(out));
}

double aligned_accuracy(const Graph& g, const LabelVector& truth, int n_u, std::uint64_t seed,
                        const KMeansOptions& km) {
  return align_clusters_to_labels(spectral_cluster(g, n_u, seed, km), truth).accuracy;
}

}  // namespace

SyntheticZsl make_synthetic_zsl(const SynthConfig& spec, std::uint64_t seed) {
  if (spec.semantic_dim < 1 || spec.semantic_dim > spec.visual_dim)
    throw ConfigError("synth.semantic_dim: must lie in [1, synth.visual_dim]");
  SyntheticSpec vs;
  vs.cluster_count = spec.clusters;
  vs.points_per_cluster = spec.points_per_cluster;
  vs.ambient_dim = spec.visual_dim;
  vs.structure = spec.structure;
  vs.noise_sigma = spec.sigma;
  vs.center_spacing = spec.spacing;
  vs.rng_seed = Rng::derive_seed(seed, 0);
  auto [z, y] = generate_synthetic(vs);

  Rng rng(Rng::derive_seed(seed, 1));
  Eigen::MatrixXd g(spec.visual_dim, spec.semantic_dim);
  for (Index j = 0; j < g.cols(); ++j)
    for (Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() *
                            Eigen::MatrixXd::Identity(spec.visual_dim, spec.semantic_dim);
  const LinearMap p(q.transpose(), 0.0, 0.0);
  return {z, project(p, z), y};
}

PipelineSummary run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out, bool dry_run,
                             std::ostream& log) {
  stage("validate", [&] { validate_config(cfg); });
  PipelineSummary sum;
  sum.stages = plan(cfg.mode, cfg.baseline && cfg.mode != Mode::diagnose);
  if (dry_run) return sum;

  std::filesystem::create_directories(out);
  Artifacts art(out);
  try {
    RegularizeOptions ropt = cfg.sgw;
    ropt.k = cfg.k;
    ropt.r0.seed = Rng::derive_seed(cfg.seed, 2);

    if (cfg.mode == Mode::diagnose) {
      const Graph g = stage("load", [&] { return read_edge_list(cfg.graph); });
      const EmbeddingMatrix s = stage("load", [&] { return load_embeddings(cfg.signal, cfg.format, cfg.header); });
      const auto reg = stage("regularize", [&] { return regularize_embeddings(g, s, ropt); });
      stage("write", [&] {
        art.write("gap_before.csv", [&](const auto& p) { write_gap_report(p, reg.gap_before); });
        art.write("gap_after.csv", [&](const auto& p) { write_gap_report(p, reg.gap_after); });
      });
      sum.gap_before = reg.gap_before.mean;
      sum.gap_after = reg.gap_after.mean;
      sum.r0 = reg.r0;
      sum.r0_fallback = reg.r0_fallback;
      sum.delta = reg.delta;
      sum.artifacts = art.written();
      log << "gap mean before " << format_double(sum.gap_before) << " after " << format_double(sum.gap_after) << '\n';
      return sum;
    }

    Transductive pool;
    SplitSpec split;
    std::optional<ClassSemanticTable> table;
    std::optional<LinearMap> map;
    // gzsl with an unseen-only graph: seen test rows are scored inductively
    std::vector<Index> seen_test_rows;
    EmbeddingMatrix visual_all;
    LabelVector labels_all;

    if (cfg.mode == Mode::synth) {
      auto syn = stage("generate", [&] { return make_synthetic_zsl(cfg.synth, cfg.seed); });
      pool = {syn.visual, syn.semantic, syn.labels};
    } else {
      stage("load", [&] {
        visual_all = load_embeddings(cfg.visual, cfg.format, cfg.header);
        labels_all = load_labels(cfg.labels, static_cast<std::size_t>(visual_all.rows()));
        split = {cfg.seen_classes, cfg.unseen_classes};
        if (!cfg.semantic_table.empty())
          table = ClassSemanticTable(load_embeddings(cfg.semantic_table, cfg.format, cfg.header),
                                     cfg.metric == Metric::cosine);
      });
      stage("embed", [&] {
        const auto parts = split_by_classes(visual_all, labels_all, split);
        std::vector<Index> train = parts.seen.ids;
        std::vector<Index> test_seen;
        if (cfg.mode == Mode::gzsl) {
          // per-class holdout of seen samples, drawn with a fixed seed
          std::map<int, std::vector<Index>> by_class;
          for (std::size_t i = 0; i < parts.seen.size(); ++i) by_class[parts.seen.labels[i]].push_back(parts.seen.ids[i]);
          Rng rng(Rng::derive_seed(cfg.seed, 3));
          train.clear();
          for (auto& [c, ids] : by_class) {
            for (std::size_t t = ids.size(); t > 1; --t) std::swap(ids[t - 1], ids[rng.below(t)]);
            const auto hold = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.gzsl_holdout * static_cast<double>(ids.size())));
            if (hold >= ids.size()) throw DataError("seen class " + std::to_string(c) + " has too few samples for a holdout");
            test_seen.insert(test_seen.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(hold));
            train.insert(train.end(), ids.begin() + static_cast<std::ptrdiff_t>(hold), ids.end());
          }
          std::sort(train.begin(), train.end());
          std::sort(test_seen.begin(), test_seen.end());
        }
        std::vector<Index> rows;
        if (cfg.mode == Mode::gzsl && cfg.gzsl_pool == GzslPool::mixed) rows = test_seen;
        if (cfg.mode == Mode::gzsl && cfg.gzsl_pool == GzslPool::unseen) seen_test_rows = test_seen;
        rows.insert(rows.end(), parts.unseen.ids.begin(), parts.unseen.ids.end());
        if (rows.size() < 3) throw DataError("test pool has fewer than 3 samples");

        if (!cfg.semantic_samples.empty() && !table) {
          const auto samples = load_embeddings(cfg.semantic_samples, cfg.format, cfg.header);
          if (samples.rows() != visual_all.rows())
            throw DataError("semantic samples have " + std::to_string(samples.rows()) + " rows, visual " +
                            std::to_string(visual_all.rows()));
          pool.semantic = take_rows(samples, rows);
        } else {
          std::vector<int> train_labels;
          for (Index i : train) train_labels.push_back(labels_all[static_cast<std::size_t>(i)]);
          map = train_linear_map(take_rows(visual_all, train), LabelVector(train_labels, labels_all.class_count()),
                                 *table, cfg.map_gamma, cfg.map_lambda);
          pool.semantic = project(*map, take_rows(visual_all, rows));
        }
        pool.visual = take_rows(visual_all, rows);
        std::vector<int> truth;
        for (Index i : rows) truth.push_back(labels_all[static_cast<std::size_t>(i)]);
        pool.truth = LabelVector(truth, labels_all.class_count());
      });
      if (!seen_test_rows.empty() && !map)
        throw ConfigError("gzsl.pool = unseen needs data.semantic_table to score seen samples");
    }

    const int n_u = cfg.n_u.value_or(static_cast<int>(pool.truth.present_classes().size()));
    const Graph g = stage("graph", [&] { return build_knn_graph(pool.visual, cfg.k); });
    log << "graph: " << g.size() << " vertices, " << g.edge_count() << " edges\n";

    if (cfg.baseline) {
      sum.baseline_accuracy = stage("baseline", [&] {
        return aligned_accuracy(build_knn_graph(pool.semantic, cfg.k), pool.truth, n_u,
                                Rng::derive_seed(cfg.seed, 4), cfg.kmeans);
      });
      log << "baseline accuracy (kNN on S_u): " << format_double(*sum.baseline_accuracy) << '\n';
    }

    const auto reg = stage("regularize", [&] { return regularize_embeddings(g, pool.semantic, ropt); });
    sum.gap_before = reg.gap_before.mean;
    sum.gap_after = reg.gap_after.mean;
    sum.r0 = reg.r0;
    sum.r0_fallback = reg.r0_fallback;
    sum.delta = reg.delta;
    log << "regularize: r0 " << reg.r0 << (reg.r0_fallback ? " (fallback)" : "") << ", delta "
        << format_double(reg.delta) << ", gap mean " << format_double(sum.gap_before) << " -> "
        << format_double(sum.gap_after) << '\n';

    const auto clusters = stage("cluster", [&] {
      return spectral_cluster(reg.rebuilt, n_u, Rng::derive_seed(cfg.seed, 5), cfg.kmeans);
    });
    const auto aligned = stage("align", [&] { return align_clusters_to_labels(clusters, pool.truth); });

    ScoreReport score = stage("score", [&] {
      std::vector<int> pred = aligned.predicted_labels();
      if (cfg.mode != Mode::gzsl) return mean_class_accuracy(pred, pool.truth);
      std::vector<int> truth = pool.truth.labels();
      if (!seen_test_rows.empty()) {
        const auto sem_seen = project(*map, take_rows(visual_all, seen_test_rows));
        for (std::size_t i = 0; i < seen_test_rows.size(); ++i) {
          pred.push_back(nearest_class(sem_seen.values().row(static_cast<Index>(i)).transpose(), *table, cfg.metric));
          truth.push_back(labels_all[static_cast<std::size_t>(seen_test_rows[i])]);
        }
      }
      return gzsl_evaluate(pred, LabelVector(truth, labels_all.class_count()), split);
    });
    sum.score = score;

    stage("write", [&] {
      art.write("score.csv", [&](const auto& p) { write_score_csv(p, score); });
      art.write("gap_before.csv", [&](const auto& p) { write_gap_report(p, reg.gap_before); });
      art.write("gap_after.csv", [&](const auto& p) { write_gap_report(p, reg.gap_after); });
      art.write("s_hat.bin", [&](const auto& p) { save_embeddings(p, reg.s_hat, MatrixFormat::bin); });
      art.write("graph_prime.edges", [&](const auto& p) { write_edge_list(p, reg.rebuilt); });
    });
    sum.artifacts = art.written();
    print_score_table(log, score);
    return sum;
  } catch (...) {
    art.mark_partial();
    throw;
  }
}

}  // namespace isograph

#include "isograph/clustering.hpp"
#include "isograph/config.hpp"
#include "isograph/error.hpp"
#include "isograph/eval.hpp"
#include "isograph/graph.hpp"
#include "isograph/ipl.hpp"
#include "isograph/parallel.hpp"
#include "isograph/pipeline.hpp"
#include "isograph/sgw.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

using namespace isograph;

namespace {

std::vector<int> int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

struct Common {
  std::size_t threads = 0;
  std::string format = "csv";
  bool header = false;
};

void add_format(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "matrix format: csv or bin")->capture_default_str();
  app->add_flag("--header", c.header, "skip the first CSV line");
}

void add_sgw(CLI::App* app, RegularizeOptions& o, std::string& path, double& delta) {
  app->add_option("--bands", o.bands, "wavelet band count J")->capture_default_str();
  app->add_option("--cheby-order", o.cheby_order, "Chebyshev order m")->capture_default_str();
  app->add_option("--exact-threshold", o.exact_threshold)->capture_default_str();
  app->add_option("--r0-tol", o.r0.tol)->capture_default_str();
  app->add_option("--path", path, "exact or chebyshev")->capture_default_str();
  app->add_option("--r", o.ipl.r, "ball radius in hops")->capture_default_str();
  app->add_option("--delta", delta, "isoperimetric dimension (default: estimated)");
  app->add_option("--c-delta", o.ipl.c_delta)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isograph: isoperimetric graph regularization for transductive zero-shot learning"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads (default: ISOGRAPH_THREADS or 1)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic visual/semantic scenario");
  SynthConfig sc;
  std::uint64_t synth_seed = 1;
  std::string synth_out = ".";
  std::string structure = "gaussian-blob";
  synth->add_option("--clusters", sc.clusters)->capture_default_str();
  synth->add_option("--points", sc.points_per_cluster, "points per cluster")->capture_default_str();
  synth->add_option("--visual-dim", sc.visual_dim)->capture_default_str();
  synth->add_option("--semantic-dim", sc.semantic_dim)->capture_default_str();
  synth->add_option("--structure", structure)->capture_default_str();
  synth->add_option("--sigma", sc.sigma)->capture_default_str();
  synth->add_option("--spacing", sc.spacing)->capture_default_str();
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();
  add_format(synth, common);

  // graph
  auto* graph = app.add_subcommand("graph", "build a cosine kNN graph from a matrix");
  std::string graph_in, graph_out = "graph.edges";
  int graph_k = 15;
  graph->add_option("--input", graph_in)->required();
  graph->add_option("--k", graph_k)->capture_default_str();
  graph->add_option("--out", graph_out)->capture_default_str();
  add_format(graph, common);

  // regularize
  auto* reg = app.add_subcommand("regularize", "SGW band annihilation of a graph signal");
  std::string reg_graph, reg_signal, reg_out = ".", reg_path = "chebyshev", reg_dump;
  double reg_delta = 0.0;
  RegularizeOptions ropt;
  std::uint64_t reg_seed = 1;
  reg->add_option("--graph", reg_graph, "edge list")->required();
  reg->add_option("--signal", reg_signal, "semantic matrix, one row per vertex")->required();
  reg->add_option("--k", ropt.k, "neighbours of the rebuilt graph")->capture_default_str();
  reg->add_option("--seed", reg_seed)->capture_default_str();
  reg->add_option("--out", reg_out, "output directory")->capture_default_str();
  reg->add_option("--dump-coefficients", reg_dump, "write band_<k>.bin files here");
  add_sgw(reg, ropt, reg_path, reg_delta);
  add_format(reg, common);

  // cluster
  auto* cl = app.add_subcommand("cluster", "spectral clustering of a graph");
  std::string cl_graph, cl_labels, cl_out = "assignment.csv";
  int cl_n = 2;
  std::uint64_t cl_seed = 1;
  cl->add_option("--graph", cl_graph)->required();
  cl->add_option("--n-clusters", cl_n)->capture_default_str();
  cl->add_option("--labels", cl_labels, "align clusters to these labels");
  cl->add_option("--seed", cl_seed)->capture_default_str();
  cl->add_option("--out", cl_out)->capture_default_str();

  // score
  auto* score = app.add_subcommand("score", "score predictions against labels");
  std::string sc_assign, sc_pred, sc_truth, sc_seen, sc_unseen, sc_out;
  score->add_option("--assignment", sc_assign, "aligned assignment CSV");
  score->add_option("--pred", sc_pred, "predicted labels, one per line");
  score->add_option("--truth", sc_truth)->required();
  score->add_option("--seen", sc_seen, "comma-separated seen class ids (GZSL)");
  score->add_option("--unseen", sc_unseen, "comma-separated unseen class ids (GZSL)");
  score->add_option("--out", sc_out, "score CSV path");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run the full pipeline from a config file");
  std::string pipe_config, pipe_out = "out", pipe_profile;
  std::uint64_t pipe_seed = 0;
  bool dry_run = false, print_defaults = false;
  pipe->add_option("--config", pipe_config);
  pipe->add_option("--out", pipe_out)->capture_default_str();
  pipe->add_option("--profile", pipe_profile, "awa (k=15, r=3) or cub (k=8, r=3)");
  auto* seed_opt = pipe->add_option("--seed", pipe_seed, "overrides run.seed");
  pipe->add_flag("--dry-run", dry_run, "validate and print the stage plan only");
  pipe->add_flag("--print-defaults", print_defaults, "print every config key with its default");

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "isoperimetric gap report of a graph");
  std::string dg_graph, dg_out = "gap.csv";
  IplParams dg_ipl;
  double dg_delta = 0.0;
  diag->add_option("--graph", dg_graph)->required();
  diag->add_option("--r", dg_ipl.r)->capture_default_str();
  diag->add_option("--delta", dg_delta, "default: estimated from the graph");
  diag->add_option("--c-delta", dg_ipl.c_delta)->capture_default_str();
  diag->add_option("--out", dg_out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage mistakes count as configuration errors; --help exits 0
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (common.threads == 0) {
    if (const char* env = std::getenv("ISOGRAPH_THREADS")) common.threads = std::strtoul(env, nullptr, 10);
  }
  set_thread_count(common.threads == 0 ? 1 : common.threads);

  try {
    const MatrixFormat fmt = parse_format(common.format);
    if (*synth) {
      auto data = make_synthetic_zsl(SynthConfig{sc.clusters, sc.points_per_cluster, sc.visual_dim,
                                                 sc.semantic_dim, parse_structure(structure), sc.sigma,
                                                 sc.spacing},
                                     synth_seed);
      std::filesystem::create_directories(synth_out);
      const std::string ext = fmt == MatrixFormat::bin ? ".bin" : ".csv";
      save_embeddings(std::filesystem::path(synth_out) / ("visual" + ext), data.visual, fmt);
      save_embeddings(std::filesystem::path(synth_out) / ("semantic" + ext), data.semantic, fmt);
      save_labels(std::filesystem::path(synth_out) / "labels.txt", data.labels);
      std::cout << "wrote " << data.visual.rows() << " samples to " << synth_out << '\n';
    } else if (*graph) {
      const auto g = build_knn_graph(load_embeddings(graph_in, fmt, common.header), graph_k);
      write_edge_list(graph_out, g);
      std::cout << g.size() << " vertices, " << g.edge_count() << " edges\n";
    } else if (*reg) {
      ropt.path = parse_transform_path(reg_path);
      if (reg_delta > 0.0) ropt.delta = reg_delta;
      ropt.r0.seed = reg_seed;
      const auto g = read_edge_list(reg_graph);
      const auto s = load_embeddings(reg_signal, fmt, common.header);
      const auto res = regularize_embeddings(g, s, ropt);
      const std::filesystem::path out(reg_out);
      std::filesystem::create_directories(out);
      save_embeddings(out / "s_hat.bin", res.s_hat, MatrixFormat::bin);
      write_edge_list(out / "graph_prime.edges", res.rebuilt);
      write_gap_report(out / "gap_before.csv", res.gap_before);
      write_gap_report(out / "gap_after.csv", res.gap_after);
      if (!reg_dump.empty()) {
        const auto l = laplacian(g);
        const auto bank = build_kernel_bank(estimate_lambda_max(l), ropt.bands, ropt.cheby_order, ropt.lowpass_factor);
        dump_coefficients(reg_dump, forward_sgw(l, bank, s));
      }
      std::cout << "r0 " << res.r0 << (res.r0_fallback ? " (fallback: no sign-clean band)" : "") << ", gap mean "
                << format_double(res.gap_before.mean) << " -> " << format_double(res.gap_after.mean) << '\n';
    } else if (*cl) {
      auto a = spectral_cluster(read_edge_list(cl_graph), cl_n, cl_seed);
      if (!cl_labels.empty()) {
        a = align_clusters_to_labels(a, load_labels(cl_labels, a.cluster.size()));
        std::cout << "aligned accuracy " << format_double(a.accuracy) << '\n';
      }
      write_assignment(cl_out, a);
    } else if (*score) {
      if (sc_assign.empty() == sc_pred.empty()) throw ConfigError("score: give exactly one of --assignment or --pred");
      std::vector<int> pred;
      if (!sc_assign.empty())
        pred = read_assignment(sc_assign).predicted_labels();
      else
        pred = load_labels(sc_pred).labels();
      const auto truth = load_labels(sc_truth, pred.size());
      ScoreReport rep;
      if (!sc_seen.empty() || !sc_unseen.empty())
        rep = gzsl_evaluate(pred, truth, SplitSpec{int_list(sc_seen), int_list(sc_unseen)});
      else
        rep = mean_class_accuracy(pred, truth);
      if (!sc_out.empty()) write_score_csv(sc_out, rep);
      print_score_table(std::cout, rep);
    } else if (*pipe) {
      if (print_defaults) {
        std::cout << default_config_text();
        return 0;
      }
      std::optional<std::string> profile;
      if (!pipe_profile.empty()) profile = pipe_profile;
      ConfigParse parsed = pipe_config.empty() ? parse_config("", profile) : load_config(pipe_config, profile);
      for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
      if (seed_opt->count() > 0) parsed.config.seed = pipe_seed;
      const auto summary = run_pipeline(parsed.config, pipe_out, dry_run, std::cout);
      if (dry_run) {
        std::cout << "config valid; stages:";
        for (const auto& s : summary.stages) std::cout << ' ' << s;
        std::cout << '\n';
      }
    } else if (*diag) {
      const auto g = read_edge_list(dg_graph);
      dg_ipl.delta = dg_delta > 0.0 ? dg_delta : estimate_delta(g);
      const auto rep = mean_gap(g, dg_ipl);
      write_gap_report(dg_out, rep);
      std::cout << "delta " << format_double(dg_ipl.delta) << ", mean gap " << format_double(rep.mean)
                << ", positive fraction " << format_double(rep.positive_fraction) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

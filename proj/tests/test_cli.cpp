// Drives the isograph executable through a shell, one stage per subcommand.
#include "isograph/clustering.hpp"
#include "isograph/eval.hpp"
#include "isograph/graph.hpp"
#include "isograph/ipl.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace isograph;

namespace {

int run(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = std::string("\"") + ISOGRAPH_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("standalone stages chain through files") {
  TempDir d("cli");
  const auto log = d / "log.txt";
  REQUIRE(run("synth --points 40 --visual-dim 16 --semantic-dim 4 --sigma 0.02 --out " + q(d / "data"), log) == 0);
  CHECK(std::filesystem::exists(d / "data/visual.csv"));
  CHECK(std::filesystem::exists(d / "data/labels.txt"));

  REQUIRE(run("graph --input " + q(d / "data/visual.csv") + " --k 8 --out " + q(d / "g.edges"), log) == 0);
  CHECK(read_edge_list(d / "g.edges").size() == 80);

  REQUIRE(run("regularize --graph " + q(d / "g.edges") + " --signal " + q(d / "data/semantic.csv") +
                  " --k 8 --out " + q(d / "reg") + " --dump-coefficients " + q(d / "coef"),
              log) == 0);
  CHECK(read_text(log).find("gap mean") != std::string::npos);
  CHECK(std::filesystem::exists(d / "coef/band_3.bin"));
  CHECK(read_gap_report(d / "reg/gap_after.csv").beta.size() == 80);

  REQUIRE(run("cluster --graph " + q(d / "reg/graph_prime.edges") + " --n-clusters 2 --labels " +
                  q(d / "data/labels.txt") + " --out " + q(d / "a.csv"),
              log) == 0);
  CHECK(read_assignment(d / "a.csv").aligned());

  REQUIRE(run("score --assignment " + q(d / "a.csv") + " --truth " + q(d / "data/labels.txt") + " --out " +
                  q(d / "score.csv"),
              log) == 0);
  CHECK(read_score_csv(d / "score.csv").mean_class_accuracy == 1.0);

  REQUIRE(run("--threads 2 diagnose --graph " + q(d / "g.edges") + " --out " + q(d / "gap.csv"), log) == 0);
  CHECK(read_text(log).find("mean gap") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir d("cli_codes");
  const auto log = d / "log.txt";
  CHECK(run("--help", log) == 0);
  CHECK(run("pipeline --print-defaults", log) == 0);
  CHECK(read_text(log).find("graph.k = 15") != std::string::npos);

  CHECK(run("", log) == 2);
  CHECK(run("graph --bogus", log) == 2);
  write_text(d / "bad.cfg", "graph.k = -3\n");
  CHECK(run("pipeline --dry-run --config " + q(d / "bad.cfg"), log) == 2);
  CHECK(read_text(log).find("graph.k") != std::string::npos);
  CHECK(run("pipeline --dry-run --profile nope", log) == 2);

  CHECK(run("graph --input " + q(d / "missing.csv"), log) == 3);
  write_text(d / "m.csv", "1,2\n3,oops\n");
  CHECK(run("graph --input " + q(d / "m.csv"), log) == 3);

  write_text(d / "ok.cfg", "run.mode = synth\nextra.key = 1\n");
  CHECK(run("pipeline --dry-run --config " + q(d / "ok.cfg"), log) == 0);
  const auto text = read_text(log);
  CHECK(text.find("warning: extra.key") != std::string::npos);
  CHECK(text.find("stages: generate graph baseline regularize") != std::string::npos);

  write_text(d / "s.csv", "1,2\n3,4\n5,inf\n");
  write_text(d / "g.edges", "n 3\n0 1 1\n1 2 1\n");
  CHECK(run("regularize --graph " + q(d / "g.edges") + " --signal " + q(d / "s.csv") + " --out " + q(d / "o"),
            log) == 3);

  // identical seen rows with zero regularisers leave the closed-form system singular
  write_text(d / "z.csv", "1,1,1\n1,1,1\n1,1,1\n1,1,1\n0,1,2\n2,1,0\n0,2,1\n");
  write_text(d / "y.txt", "0\n1\n0\n1\n2\n2\n2\n");
  write_text(d / "t.csv", "1,0\n0,1\n1,1\n");
  write_text(d / "zsl.cfg", "run.mode = zsl\nrun.baseline = false\ngraph.k = 1\nmap.gamma = 0\nmap.lambda = 0\n"
                            "data.visual = " + (d / "z.csv").string() + "\ndata.labels = " + (d / "y.txt").string() +
                            "\ndata.semantic_table = " + (d / "t.csv").string() +
                            "\ndata.seen_classes = 0,1\ndata.unseen_classes = 2\n");
  CHECK(run("pipeline --config " + q(d / "zsl.cfg") + " --out " + q(d / "zo"), log) == 4);
  CHECK(read_text(log).find("stage embed") != std::string::npos);
}

TEST_CASE("pipeline is deterministic across processes and thread counts") {
  TempDir d("cli_det");
  const auto log = d / "log.txt";
  write_text(d / "p.cfg", "run.mode = synth\nrun.seed = 7\nsynth.points_per_cluster = 60\n");
  REQUIRE(run("pipeline --config " + q(d / "p.cfg") + " --out " + q(d / "a"), log) == 0);
  REQUIRE(run("--threads 3 pipeline --config " + q(d / "p.cfg") + " --out " + q(d / "b"), log) == 0);
  for (const char* f : {"score.csv", "gap_before.csv", "gap_after.csv", "s_hat.bin", "graph_prime.edges"})
    CHECK(read_text(d / "a" / f) == read_text(d / "b" / f));
  REQUIRE(run("pipeline --config " + q(d / "p.cfg") + " --seed 8 --out " + q(d / "c"), log) == 0);
  CHECK(read_text(d / "a/gap_after.csv") != read_text(d / "c/gap_after.csv"));
}

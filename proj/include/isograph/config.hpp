#pragma once

#include "isograph/clustering.hpp"
#include "isograph/dataset.hpp"
#include "isograph/linearmap.hpp"
#include "isograph/sgw.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace isograph {

enum class Mode { zsl, gzsl, diagnose, synth };
Mode parse_mode(const std::string& name);
std::string to_string(Mode m);

/// Which test samples enter the transductive graph in gzsl mode.
enum class GzslPool { mixed, unseen };

struct SynthConfig {
  int clusters = 2;
  int points_per_cluster = 150;
  int visual_dim = 128;
  int semantic_dim = 6;
  Structure structure = Structure::gaussian_blob;
  double sigma = 0.03;
  double spacing = 1.0;
};

struct PipelineConfig {
  Mode mode = Mode::synth;
  std::string profile;

  std::filesystem::path visual;
  std::filesystem::path labels;
  std::filesystem::path semantic_table;
  std::filesystem::path semantic_samples;
  std::filesystem::path graph;   // diagnose
  std::filesystem::path signal;  // diagnose
  MatrixFormat format = MatrixFormat::csv;
  bool header = false;
  std::vector<int> seen_classes;
  std::vector<int> unseen_classes;

  int k = 15;
  std::optional<int> n_u;  // defaults to the unseen (or pool) class count
  RegularizeOptions sgw;   // ipl.r etc. live in sgw.ipl
  double map_gamma = 1.0;
  double map_lambda = 1.0;
  Metric metric = Metric::euclidean;
  KMeansOptions kmeans;
  GzslPool gzsl_pool = GzslPool::mixed;
  double gzsl_holdout = 0.2;
  SynthConfig synth;
  std::uint64_t seed = 1;
  bool baseline = true;
};

/// Profile defaults: "awa" (k = 15, r = 3) and "cub" (k = 8, r = 3).
void apply_profile(PipelineConfig& cfg, const std::string& name);

struct ConfigParse {
  PipelineConfig config;
  std::vector<std::string> warnings;  // unknown keys
};

/// Flat "section.key = value" lines with '#' comments. A profile (from
/// run.profile or `profile_override`) is applied first, explicit keys after.
/// Throws ConfigError listing every problem as "<key>: <reason>".
ConfigParse parse_config(const std::string& text, const std::optional<std::string>& profile_override = {});
ConfigParse load_config(const std::filesystem::path& path,
                        const std::optional<std::string>& profile_override = {});

/// Structural checks plus existence of referenced files.
void validate_config(const PipelineConfig& cfg);

/// Every recognised key with its documented default, one per line.
std::string default_config_text();

}  // namespace isograph

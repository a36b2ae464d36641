#include "isograph/config.hpp"

#include "isograph/error.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace isograph {

namespace {

struct BadValue {
  std::string reason;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& v, const char* what) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    throw BadValue{std::string("expected ") + what + ", got '" + v + "'"};
  return out;
}

int as_int(const std::string& v) { return parse_number<int>(v, "an integer"); }
double as_double(const std::string& v) { return parse_number<double>(v, "a number"); }

bool as_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw BadValue{"expected true or false, got '" + v + "'"};
}

std::vector<int> as_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(as_int(item));
  }
  return out;
}

template <class Fn>
auto wrap_enum(Fn&& fn, const std::string& v) {
  try {
    return fn(v);
  } catch (const Error& e) {
    throw BadValue{e.what()};
  }
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"run.mode", [](PipelineConfig& c, const std::string& v) { c.mode = wrap_enum(parse_mode, v); }},
      {"run.profile", [](PipelineConfig&, const std::string&) {}},
      {"run.seed", [](PipelineConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>(v, "an unsigned integer"); }},
      {"run.baseline", [](PipelineConfig& c, const std::string& v) { c.baseline = as_bool(v); }},
      {"data.visual", [](PipelineConfig& c, const std::string& v) { c.visual = v; }},
      {"data.labels", [](PipelineConfig& c, const std::string& v) { c.labels = v; }},
      {"data.semantic_table", [](PipelineConfig& c, const std::string& v) { c.semantic_table = v; }},
      {"data.semantic_samples", [](PipelineConfig& c, const std::string& v) { c.semantic_samples = v; }},
      {"data.graph", [](PipelineConfig& c, const std::string& v) { c.graph = v; }},
      {"data.signal", [](PipelineConfig& c, const std::string& v) { c.signal = v; }},
      {"data.format", [](PipelineConfig& c, const std::string& v) { c.format = wrap_enum(parse_format, v); }},
      {"data.header", [](PipelineConfig& c, const std::string& v) { c.header = as_bool(v); }},
      {"data.seen_classes", [](PipelineConfig& c, const std::string& v) { c.seen_classes = as_int_list(v); }},
      {"data.unseen_classes", [](PipelineConfig& c, const std::string& v) { c.unseen_classes = as_int_list(v); }},
      {"graph.k", [](PipelineConfig& c, const std::string& v) { c.k = as_int(v); }},
      {"ipl.r", [](PipelineConfig& c, const std::string& v) { c.sgw.ipl.r = as_int(v); }},
      {"ipl.delta", [](PipelineConfig& c, const std::string& v) {
         if (v == "auto") c.sgw.delta.reset(); else c.sgw.delta = as_double(v);
       }},
      {"ipl.delta_r_max", [](PipelineConfig& c, const std::string& v) { c.sgw.delta_r_max = as_int(v); }},
      {"ipl.c_delta", [](PipelineConfig& c, const std::string& v) { c.sgw.ipl.c_delta = as_double(v); }},
      {"ipl.lambda", [](PipelineConfig& c, const std::string& v) { c.sgw.ipl.lambda = as_double(v); }},
      {"sgw.bands", [](PipelineConfig& c, const std::string& v) { c.sgw.bands = as_int(v); }},
      {"sgw.cheby_order", [](PipelineConfig& c, const std::string& v) { c.sgw.cheby_order = as_int(v); }},
      {"sgw.exact_threshold", [](PipelineConfig& c, const std::string& v) { c.sgw.exact_threshold = as_int(v); }},
      {"sgw.r0_tol", [](PipelineConfig& c, const std::string& v) { c.sgw.r0.tol = as_double(v); }},
      {"sgw.r0_centers", [](PipelineConfig& c, const std::string& v) { c.sgw.r0.centers = as_int(v); }},
      {"sgw.lowpass_factor", [](PipelineConfig& c, const std::string& v) { c.sgw.lowpass_factor = as_double(v); }},
      {"sgw.path", [](PipelineConfig& c, const std::string& v) { c.sgw.path = wrap_enum(parse_transform_path, v); }},
      {"sgw.cg_max_iter", [](PipelineConfig& c, const std::string& v) { c.sgw.cg.max_iterations = as_int(v); }},
      {"sgw.cg_tol", [](PipelineConfig& c, const std::string& v) { c.sgw.cg.tolerance = as_double(v); }},
      {"map.gamma", [](PipelineConfig& c, const std::string& v) { c.map_gamma = as_double(v); }},
      {"map.lambda", [](PipelineConfig& c, const std::string& v) { c.map_lambda = as_double(v); }},
      {"map.metric", [](PipelineConfig& c, const std::string& v) { c.metric = wrap_enum(parse_metric, v); }},
      {"cluster.n_u", [](PipelineConfig& c, const std::string& v) { c.n_u = as_int(v); }},
      {"cluster.restarts", [](PipelineConfig& c, const std::string& v) { c.kmeans.restarts = as_int(v); }},
      {"cluster.max_iter", [](PipelineConfig& c, const std::string& v) { c.kmeans.max_iter = as_int(v); }},
      {"gzsl.pool", [](PipelineConfig& c, const std::string& v) {
         if (v == "mixed") c.gzsl_pool = GzslPool::mixed;
         else if (v == "unseen") c.gzsl_pool = GzslPool::unseen;
         else throw BadValue{"expected 'mixed' or 'unseen', got '" + v + "'"};
       }},
      {"gzsl.holdout", [](PipelineConfig& c, const std::string& v) { c.gzsl_holdout = as_double(v); }},
      {"synth.clusters", [](PipelineConfig& c, const std::string& v) { c.synth.clusters = as_int(v); }},
      {"synth.points_per_cluster", [](PipelineConfig& c, const std::string& v) { c.synth.points_per_cluster = as_int(v); }},
      {"synth.visual_dim", [](PipelineConfig& c, const std::string& v) { c.synth.visual_dim = as_int(v); }},
      {"synth.semantic_dim", [](PipelineConfig& c, const std::string& v) { c.synth.semantic_dim = as_int(v); }},
      {"synth.structure", [](PipelineConfig& c, const std::string& v) { c.synth.structure = wrap_enum(parse_structure, v); }},
      {"synth.sigma", [](PipelineConfig& c, const std::string& v) { c.synth.sigma = as_double(v); }},
      {"synth.spacing", [](PipelineConfig& c, const std::string& v) { c.synth.spacing = as_double(v); }},
  };
  return table;
}

[[noreturn]] void fail(const std::vector<std::string>& errors) {
  std::string msg;
  for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
  throw ConfigError(msg);
}

}  // namespace

Mode parse_mode(const std::string& name) {
  if (name == "zsl") return Mode::zsl;
  if (name == "gzsl") return Mode::gzsl;
  if (name == "diagnose") return Mode::diagnose;
  if (name == "synth") return Mode::synth;
  throw ConfigError("unknown mode '" + name + "' (zsl, gzsl, diagnose, synth)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::zsl: return "zsl";
    case Mode::gzsl: return "gzsl";
    case Mode::diagnose: return "diagnose";
    case Mode::synth: return "synth";
  }
  return "?";
}

void apply_profile(PipelineConfig& cfg, const std::string& name) {
  if (name == "awa") {
    cfg.k = 15;
    cfg.sgw.ipl.r = 3;
  } else if (name == "cub") {
    cfg.k = 8;
    cfg.sgw.ipl.r = 3;
  } else {
    throw ConfigError("run.profile: unknown profile '" + name + "' (awa, cub)");
  }
  cfg.profile = name;
}

ConfigParse parse_config(const std::string& text, const std::optional<std::string>& profile_override) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<std::string> errors;
  std::set<std::string> seen_keys;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'section.key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (!seen_keys.insert(key).second) errors.push_back(key + ": set more than once");
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }

  ConfigParse out;
  std::optional<std::string> profile = profile_override;
  if (!profile)
    for (const auto& [k, v] : entries)
      if (k == "run.profile") profile = v;
  if (profile) {
    try {
      apply_profile(out.config, *profile);
    } catch (const ConfigError& e) {
      errors.push_back(e.what());
    }
  }
  const auto& table = setters();
  for (const auto& [key, value] : entries) {
    const auto it = table.find(key);
    if (it == table.end()) {
      out.warnings.push_back(key + ": unknown key, ignored");
      continue;
    }
    try {
      it->second(out.config, value);
    } catch (const BadValue& b) {
      errors.push_back(key + ": " + b.reason);
    }
  }
  if (!out.config.semantic_table.empty() && !out.config.semantic_samples.empty())
    errors.push_back("data.semantic_table, data.semantic_samples: mutually exclusive, set only one");
  if (!errors.empty()) fail(errors);
  return out;
}

ConfigParse load_config(const std::filesystem::path& path, const std::optional<std::string>& profile_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot read config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), profile_override);
}

void validate_config(const PipelineConfig& c) {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  auto file = [&](const std::filesystem::path& p, const char* key, bool required) {
    if (p.empty()) {
      if (required) errors.push_back(std::string(key) + ": required for mode " + to_string(c.mode));
    } else if (!std::filesystem::is_regular_file(p)) {
      errors.push_back(std::string(key) + ": file not found: " + p.string());
    }
  };
  need(c.k >= 1, "graph.k: must be >= 1");
  need(c.sgw.ipl.r >= 1, "ipl.r: must be >= 1");
  need(!c.sgw.delta || *c.sgw.delta > 1.0, "ipl.delta: must be > 1 or 'auto'");
  need(c.sgw.delta_r_max >= 3, "ipl.delta_r_max: must be >= 3");
  need(c.sgw.ipl.c_delta > 0.0, "ipl.c_delta: must be > 0");
  need(c.sgw.ipl.lambda >= 0.0, "ipl.lambda: must be >= 0");
  need(c.sgw.bands >= 3, "sgw.bands: must be >= 3 (r0 selection needs three wavelet bands)");
  need(c.sgw.cheby_order >= 3, "sgw.cheby_order: must be >= 3");
  need(c.sgw.exact_threshold >= 1, "sgw.exact_threshold: must be >= 1");
  need(c.sgw.r0.tol >= 0.0, "sgw.r0_tol: must be >= 0");
  need(c.sgw.r0.centers >= 1, "sgw.r0_centers: must be >= 1");
  need(c.sgw.lowpass_factor > 1.0, "sgw.lowpass_factor: must be > 1");
  need(c.sgw.cg.max_iterations >= 1, "sgw.cg_max_iter: must be >= 1");
  need(c.sgw.cg.tolerance > 0.0, "sgw.cg_tol: must be > 0");
  need(c.map_gamma >= 0.0, "map.gamma: must be >= 0");
  need(c.map_lambda >= 0.0, "map.lambda: must be >= 0");
  need(!c.n_u || *c.n_u >= 2, "cluster.n_u: must be >= 2");
  need(c.kmeans.restarts >= 1, "cluster.restarts: must be >= 1");
  need(c.kmeans.max_iter >= 1, "cluster.max_iter: must be >= 1");
  need(c.gzsl_holdout > 0.0 && c.gzsl_holdout < 1.0, "gzsl.holdout: must lie in (0, 1)");
  need(c.semantic_table.empty() || c.semantic_samples.empty(),
       "data.semantic_table, data.semantic_samples: mutually exclusive, set only one");

  switch (c.mode) {
    case Mode::synth:
      need(c.synth.clusters >= 2, "synth.clusters: must be >= 2");
      need(c.synth.points_per_cluster >= 1, "synth.points_per_cluster: must be >= 1");
      need(c.synth.visual_dim >= 1, "synth.visual_dim: must be >= 1");
      need(c.synth.semantic_dim >= 1 && c.synth.semantic_dim <= c.synth.visual_dim,
           "synth.semantic_dim: must lie in [1, synth.visual_dim]");
      need(c.synth.sigma >= 0.0, "synth.sigma: must be >= 0");
      need(c.synth.spacing > 0.0, "synth.spacing: must be > 0");
      need(c.k < c.synth.clusters * c.synth.points_per_cluster, "graph.k: must be below the sample count");
      break;
    case Mode::diagnose:
      file(c.graph, "data.graph", true);
      file(c.signal, "data.signal", true);
      break;
    case Mode::zsl:
    case Mode::gzsl:
      file(c.visual, "data.visual", true);
      file(c.labels, "data.labels", true);
      if (c.semantic_table.empty() && c.semantic_samples.empty())
        errors.push_back("data.semantic_table: one of data.semantic_table or data.semantic_samples is required");
      file(c.semantic_table, "data.semantic_table", false);
      file(c.semantic_samples, "data.semantic_samples", false);
      need(!c.unseen_classes.empty(), "data.unseen_classes: required for mode " + to_string(c.mode));
      need(c.mode == Mode::zsl || !c.seen_classes.empty(), "data.seen_classes: required for mode gzsl");
      need(!c.semantic_samples.empty() || !c.seen_classes.empty(),
           "data.seen_classes: required to train the linear map");
      break;
  }
  if (!errors.empty()) fail(errors);
}

std::string default_config_text() {
  const PipelineConfig d;
  std::ostringstream o;
  o << "run.mode = synth\n"
    << "run.seed = " << d.seed << "\n"
    << "run.baseline = true\n"
    << "# run.profile = awa | cub\n"
    << "# data.visual, data.labels, data.semantic_table | data.semantic_samples\n"
    << "# data.graph, data.signal (diagnose)\n"
    << "data.format = csv\n"
    << "data.header = false\n"
    << "# data.seen_classes = 0,1,2\n"
    << "# data.unseen_classes = 3,4\n"
    << "graph.k = " << d.k << "\n"
    << "ipl.r = " << d.sgw.ipl.r << "\n"
    << "ipl.delta = auto\n"
    << "ipl.delta_r_max = " << d.sgw.delta_r_max << "\n"
    << "ipl.c_delta = " << d.sgw.ipl.c_delta << "\n"
    << "ipl.lambda = " << d.sgw.ipl.lambda << "\n"
    << "sgw.bands = " << d.sgw.bands << "\n"
    << "sgw.cheby_order = " << d.sgw.cheby_order << "\n"
    << "sgw.exact_threshold = " << d.sgw.exact_threshold << "\n"
    << "sgw.r0_tol = " << format_double(d.sgw.r0.tol) << "\n"
    << "sgw.r0_centers = " << d.sgw.r0.centers << "\n"
    << "sgw.lowpass_factor = " << d.sgw.lowpass_factor << "\n"
    << "sgw.path = chebyshev\n"
    << "sgw.cg_max_iter = " << d.sgw.cg.max_iterations << "\n"
    << "sgw.cg_tol = " << format_double(d.sgw.cg.tolerance) << "\n"
    << "map.gamma = " << d.map_gamma << "\n"
    << "map.lambda = " << d.map_lambda << "\n"
    << "map.metric = euclidean\n"
    << "# cluster.n_u = <class count of the test pool>\n"
    << "cluster.restarts = " << d.kmeans.restarts << "\n"
    << "cluster.max_iter = " << d.kmeans.max_iter << "\n"
    << "gzsl.pool = mixed\n"
    << "gzsl.holdout = " << d.gzsl_holdout << "\n"
    << "synth.clusters = " << d.synth.clusters << "\n"
    << "synth.points_per_cluster = " << d.synth.points_per_cluster << "\n"
    << "synth.visual_dim = " << d.synth.visual_dim << "\n"
    << "synth.semantic_dim = " << d.synth.semantic_dim << "\n"
    << "synth.structure = gaussian-blob\n"
    << "synth.sigma = " << d.synth.sigma << "\n"
    << "synth.spacing = " << d.synth.spacing << "\n";
  return o.str();
}

}  // namespace isograph

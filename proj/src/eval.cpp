#include "isograph/eval.hpp"

#include "isograph/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>

namespace isograph {

namespace {

struct ClassRates {
  std::vector<double> per_class;
  std::vector<int> present;
};

ClassRates class_rates(const std::vector<int>& pred, const LabelVector& truth) {
  if (pred.size() != truth.size())
    throw DataError("prediction count " + std::to_string(pred.size()) + " differs from truth count " +
                    std::to_string(truth.size()));
  if (truth.size() == 0) throw DataError("empty prediction set");
  const auto c = static_cast<std::size_t>(truth.class_count());
  std::vector<double> hits(c, 0.0), totals(c, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    totals[t] += 1.0;
    if (pred[i] == truth[i]) hits[t] += 1.0;
  }
  ClassRates r;
  r.per_class.assign(c, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < c; ++k)
    if (totals[k] > 0.0) {
      r.per_class[k] = hits[k] / totals[k];
      r.present.push_back(static_cast<int>(k));
    }
  return r;
}

double mean_over(const std::vector<double>& per_class, const std::vector<int>& classes) {
  if (classes.empty()) return 0.0;
  double s = 0.0;
  for (int k : classes) s += per_class[static_cast<std::size_t>(k)];
  return s / static_cast<double>(classes.size());
}

}  // namespace

ScoreReport mean_class_accuracy(const std::vector<int>& pred, const LabelVector& truth) {
  auto rates = class_rates(pred, truth);
  ScoreReport rep;
  rep.mean_class_accuracy = mean_over(rates.per_class, rates.present);
  rep.skipped_classes = truth.absent_classes();
  rep.per_class = std::move(rates.per_class);
  return rep;
}

double gzsl_harmonic(double acc_s, double acc_t) {
  if (!(acc_s >= 0.0 && acc_s <= 1.0 && acc_t >= 0.0 && acc_t <= 1.0))
    throw DataError("accuracies must lie in [0, 1]");
  if (acc_s == 0.0 || acc_t == 0.0) return 0.0;
  return 2.0 * acc_s * acc_t / (acc_s + acc_t);
}

ScoreReport gzsl_evaluate(const std::vector<int>& pred, const LabelVector& truth, const SplitSpec& split) {
  const std::set<int> seen(split.seen_class_ids.begin(), split.seen_class_ids.end());
  const std::set<int> unseen(split.unseen_class_ids.begin(), split.unseen_class_ids.end());
  for (int c : seen)
    if (unseen.count(c)) throw DataError("class " + std::to_string(c) + " is both seen and unseen");
  auto rates = class_rates(pred, truth);
  std::vector<int> s_cls, t_cls;
  for (int k : rates.present) {
    if (seen.count(k))
      s_cls.push_back(k);
    else if (unseen.count(k))
      t_cls.push_back(k);
    else
      throw DataError("truth class " + std::to_string(k) + " is in neither side of the split");
  }
  if (s_cls.empty() || t_cls.empty()) throw DataError("GZSL evaluation needs samples from both seen and unseen classes");
  ScoreReport rep;
  rep.mean_class_accuracy = mean_over(rates.per_class, rates.present);
  GzslScores g;
  g.acc_s = mean_over(rates.per_class, s_cls);
  g.acc_t = mean_over(rates.per_class, t_cls);
  g.h = gzsl_harmonic(g.acc_s, g.acc_t);
  rep.gzsl = g;
  rep.skipped_classes = truth.absent_classes();
  rep.per_class = std::move(rates.per_class);
  return rep;
}

void write_score_csv(const std::filesystem::path& path, const ScoreReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "key,value\n";
  for (std::size_t k = 0; k < report.per_class.size(); ++k)
    if (!std::isnan(report.per_class[k])) out << "class." << k << ',' << format_double(report.per_class[k]) << '\n';
  out << "mean_class_accuracy," << format_double(report.mean_class_accuracy) << '\n';
  if (report.gzsl) {
    out << "acc_s," << format_double(report.gzsl->acc_s) << '\n';
    out << "acc_t," << format_double(report.gzsl->acc_t) << '\n';
    out << "h," << format_double(report.gzsl->h) << '\n';
  }
  if (!out) throw DataError("write failure on " + path.string());
}

ScoreReport read_score_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "key,value") throw DataError(path.string() + ": missing 'key,value' header");
  ScoreReport rep;
  GzslScores g;
  int gz_fields = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(path.string() + ": malformed row '" + line + "'");
    const std::string key = line.substr(0, comma);
    const std::string val = line.substr(comma + 1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc() || p != val.data() + val.size())
      throw DataError(path.string() + ": bad value for " + key);
    if (key.rfind("class.", 0) == 0) {
      const auto id = static_cast<std::size_t>(std::stoul(key.substr(6)));
      if (rep.per_class.size() <= id) rep.per_class.resize(id + 1, std::numeric_limits<double>::quiet_NaN());
      rep.per_class[id] = v;
    } else if (key == "mean_class_accuracy") {
      rep.mean_class_accuracy = v;
    } else if (key == "acc_s") {
      g.acc_s = v;
      ++gz_fields;
    } else if (key == "acc_t") {
      g.acc_t = v;
      ++gz_fields;
    } else if (key == "h") {
      g.h = v;
      ++gz_fields;
    } else {
      throw DataError(path.string() + ": unknown key '" + key + "'");
    }
  }
  if (gz_fields == 3) rep.gzsl = g;
  return rep;
}

void print_score_table(std::ostream& out, const ScoreReport& report) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(2);
  out << "class   accuracy(%)\n";
  for (std::size_t k = 0; k < report.per_class.size(); ++k)
    if (!std::isnan(report.per_class[k])) out << std::setw(5) << k << "   " << std::setw(8) << 100.0 * report.per_class[k] << '\n';
  out << "mean class accuracy: " << 100.0 * report.mean_class_accuracy << "%\n";
  if (report.gzsl)
    out << "Acc_s " << 100.0 * report.gzsl->acc_s << "%  Acc_t " << 100.0 * report.gzsl->acc_t << "%  H "
        << 100.0 * report.gzsl->h << "%\n";
  if (!report.skipped_classes.empty()) out << "warning: " << report.skipped_classes.size() << " class(es) absent from truth, excluded\n";
  out.flags(flags);
}

}  // namespace isograph

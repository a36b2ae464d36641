#include "isograph/dataset.hpp"

#include "isograph/error.hpp"
#include "isograph/rng.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace isograph {

namespace {

constexpr std::array<char, 4> kMagic = {'I', 'G', 'R', '1'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw DataError("read failure on " + path.string());
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

template <typename T>
void put_le(std::string& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(const char* p) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

EmbeddingMatrix parse_csv(const std::string& text, const std::string& name, bool skip_header) {
  auto lines = split_lines(text);
  if (skip_header && !lines.empty()) lines.erase(lines.begin());
  if (lines.empty()) throw DataError(name + ": empty file");
  std::vector<std::vector<double>> rows;
  rows.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::vector<double> row;
    std::string_view line = lines[r];
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view field =
          trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError(name + ": unparsable value '" + std::string(field) + "' at row " +
                        std::to_string(r) + ", column " + std::to_string(row.size()));
      }
      if (!std::isfinite(v)) {
        throw DataError(name + ": non-finite value at row " + std::to_string(r) + ", column " +
                        std::to_string(row.size()));
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(name + ": ragged row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " columns, expected " +
                      std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return EmbeddingMatrix(std::move(m));
}

EmbeddingMatrix parse_bin(const std::string& bytes, const std::string& name) {
  constexpr std::size_t kHeader = 4 + 8 + 8;
  if (bytes.empty()) throw DataError(name + ": empty file");
  if (bytes.size() < kHeader || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw DataError(name + ": missing IGR1 header");
  const auto n = get_le<std::uint64_t>(bytes.data() + 4);
  const auto d = get_le<std::uint64_t>(bytes.data() + 12);
  if (n == 0 || d == 0) throw DataError(name + ": zero-sized matrix");
  if (d > (bytes.size() - kHeader) / 8 || (bytes.size() - kHeader) != n * d * 8)
    throw DataError(name + ": payload size does not match header " + std::to_string(n) + "x" +
                    std::to_string(d));
  Eigen::MatrixXd m(static_cast<Index>(n), static_cast<Index>(d));
  const char* p = bytes.data() + kHeader;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j, p += 8) {
      const double v = get_le<double>(p);
      if (!std::isfinite(v))
        throw DataError(name + ": non-finite value at row " + std::to_string(i) + ", column " +
                        std::to_string(j));
      m(i, j) = v;
    }
  }
  return EmbeddingMatrix(std::move(m));
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write failure on " + path.string());
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) throw DataError("embedding matrix is empty");
  for (Index j = 0; j < values_.cols(); ++j)
    for (Index i = 0; i < values_.rows(); ++i)
      if (!std::isfinite(values_(i, j)))
        throw DataError("non-finite value at row " + std::to_string(i) + ", column " +
                        std::to_string(j));
}

LabelVector::LabelVector(std::vector<int> labels) : labels_(std::move(labels)) {
  int max_id = -1;
  for (int l : labels_) {
    if (l < 0) throw DataError("negative class id " + std::to_string(l));
    max_id = std::max(max_id, l);
  }
  class_count_ = max_id + 1;
}

LabelVector::LabelVector(std::vector<int> labels, int class_count)
    : labels_(std::move(labels)), class_count_(class_count) {
  for (int l : labels_)
    if (l < 0 || l >= class_count_)
      throw DataError("class id " + std::to_string(l) + " outside 0.." +
                      std::to_string(class_count_ - 1));
}

std::vector<int> LabelVector::present_classes() const {
  std::vector<char> seen(static_cast<std::size_t>(class_count_), 0);
  for (int l : labels_) seen[static_cast<std::size_t>(l)] = 1;
  std::vector<int> out;
  for (int c = 0; c < class_count_; ++c)
    if (seen[static_cast<std::size_t>(c)]) out.push_back(c);
  return out;
}

std::vector<int> LabelVector::absent_classes() const {
  std::vector<char> seen(static_cast<std::size_t>(class_count_), 0);
  for (int l : labels_) seen[static_cast<std::size_t>(l)] = 1;
  std::vector<int> out;
  for (int c = 0; c < class_count_; ++c)
    if (!seen[static_cast<std::size_t>(c)]) out.push_back(c);
  return out;
}

MatrixFormat parse_format(const std::string& name) {
  if (name == "csv") return MatrixFormat::csv;
  if (name == "bin") return MatrixFormat::bin;
  throw ConfigError("unknown matrix format '" + name + "' (expected csv or bin)");
}

Structure parse_structure(const std::string& name) {
  if (name == "gaussian-blob") return Structure::gaussian_blob;
  if (name == "noisy-circle") return Structure::noisy_circle;
  if (name == "noisy-swiss-band") return Structure::noisy_swiss_band;
  throw ConfigError("unknown synthetic structure '" + name + "'");
}

std::string to_string(Structure s) {
  switch (s) {
    case Structure::gaussian_blob: return "gaussian-blob";
    case Structure::noisy_circle: return "noisy-circle";
    case Structure::noisy_swiss_band: return "noisy-swiss-band";
  }
  return "?";
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  (void)ec;
  return std::string(buf.data(), ptr);
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, MatrixFormat format,
                                bool skip_header) {
  const std::string data = read_file(path);
  if (format == MatrixFormat::csv) return parse_csv(data, path.string(), skip_header);
  return parse_bin(data, path.string());
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                     MatrixFormat format) {
  const auto& m = matrix.values();
  std::string out;
  if (format == MatrixFormat::csv) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j) out += ',';
        out += format_double(m(i, j));
      }
      out += '\n';
    }
  } else {
    out.reserve(20 + static_cast<std::size_t>(m.size()) * 8);
    out.append(kMagic.data(), kMagic.size());
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) put_le<double>(out, m(i, j));
  }
  write_file(path, out);
}

LabelVector load_labels(const std::filesystem::path& path,
                        std::optional<std::size_t> expected_count) {
  const std::string text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError(path.string() + ": empty label file");
  std::vector<int> labels;
  labels.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto field = trim(lines[r]);
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
      throw DataError(path.string() + ": non-integer label '" + std::string(field) +
                      "' on line " + std::to_string(r + 1));
    if (v < 0)
      throw DataError(path.string() + ": negative label on line " + std::to_string(r + 1));
    labels.push_back(v);
  }
  if (expected_count && *expected_count != labels.size())
    throw DataError(path.string() + ": " + std::to_string(labels.size()) + " labels, expected " +
                    std::to_string(*expected_count));
  return LabelVector(std::move(labels));
}

void save_labels(const std::filesystem::path& path, const LabelVector& labels) {
  std::string out;
  for (int l : labels.labels()) {
    out += std::to_string(l);
    out += '\n';
  }
  write_file(path, out);
}

std::pair<EmbeddingMatrix, LabelVector> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.cluster_count < 1 || spec.points_per_cluster < 1 || spec.ambient_dim < 1)
    throw ConfigError("synthetic spec counts must be >= 1");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
    throw ConfigError("synthetic noise_sigma must be finite and >= 0");
  const int c = spec.cluster_count;
  const int d = spec.ambient_dim;
  const int per = spec.points_per_cluster;
  if (spec.structure != Structure::gaussian_blob && d < 2)
    throw ConfigError("circle and swiss-band structures need ambient_dim >= 2");
  Rng rng(spec.rng_seed);

  // Cluster i sits on axis i when there are enough axes, otherwise on a random
  // unit direction drawn from the same stream.
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(c, d);
  for (int i = 0; i < c; ++i) {
    if (c <= d) {
      centers(i, i) = spec.center_spacing;
    } else {
      Eigen::VectorXd dir(d);
      for (int j = 0; j < d; ++j) dir(j) = rng.normal();
      centers.row(i) = spec.center_spacing * dir.normalized().transpose();
    }
  }

  Eigen::MatrixXd x(static_cast<Index>(c) * per, d);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(c) * per);
  const double radius = 0.35 * spec.center_spacing;
  for (int i = 0; i < c; ++i) {
    // structure plane for this cluster: two axes other than its own where possible
    const int a0 = (i + 1) % d;
    const int a1 = (i + 2) % d == a0 ? (a0 + 1) % d : (i + 2) % d;
    for (int p = 0; p < per; ++p) {
      const Index row = static_cast<Index>(i) * per + p;
      Eigen::RowVectorXd point = centers.row(i);
      const double u = (per == 1) ? 0.0 : static_cast<double>(p) / (per - 1);
      switch (spec.structure) {
        case Structure::gaussian_blob: break;
        case Structure::noisy_circle: {
          const double theta = 2.0 * std::numbers::pi * u;
          point(a0) += radius * std::cos(theta);
          point(a1) += radius * std::sin(theta);
          break;
        }
        case Structure::noisy_swiss_band: {
          // one and a half turns of an Archimedean spiral
          const double theta = 3.0 * std::numbers::pi * u;
          const double rho = radius * (0.3 + 0.7 * u);
          point(a0) += rho * std::cos(theta);
          point(a1) += rho * std::sin(theta);
          break;
        }
      }
      for (int j = 0; j < d; ++j) point(j) += spec.noise_sigma * rng.normal();
      x.row(row) = point;
      labels.push_back(i);
    }
  }
  return {EmbeddingMatrix(std::move(x)), LabelVector(std::move(labels), c)};
}

SplitResult split_by_classes(const EmbeddingMatrix& x, const LabelVector& y,
                             const SplitSpec& split) {
  if (static_cast<Index>(y.size()) != x.rows())
    throw DataError("label count " + std::to_string(y.size()) + " does not match " +
                    std::to_string(x.rows()) + " samples");
  std::set<int> seen(split.seen_class_ids.begin(), split.seen_class_ids.end());
  std::set<int> unseen(split.unseen_class_ids.begin(), split.unseen_class_ids.end());
  for (int c : seen) {
    if (unseen.count(c)) throw DataError("class " + std::to_string(c) + " is both seen and unseen");
  }
  const auto observed = y.present_classes();
  const std::set<int> observed_set(observed.begin(), observed.end());
  for (const auto* s : {&seen, &unseen})
    for (int c : *s)
      if (!observed_set.count(c)) throw DataError("unknown class id " + std::to_string(c));
  for (int c : observed)
    if (!seen.count(c) && !unseen.count(c))
      throw DataError("class " + std::to_string(c) + " is in neither side of the split");

  SplitResult out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    Subset& side = seen.count(y[i]) ? out.seen : out.unseen;
    side.ids.push_back(static_cast<Index>(i));
    side.labels.push_back(y[i]);
  }
  for (Subset* side : {&out.seen, &out.unseen}) {
    side->values.resize(static_cast<Index>(side->ids.size()), x.cols());
    for (std::size_t r = 0; r < side->ids.size(); ++r)
      side->values.row(static_cast<Index>(r)) = x.values().row(side->ids[r]);
  }
  return out;
}

}  // namespace isograph

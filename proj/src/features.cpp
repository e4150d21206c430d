#include "gbal/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "gbal/binary_io.hpp"
#include "gbal/error.hpp"

namespace gbal {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  // std::from_chars for double is available in libstdc++ 11.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool all_numeric(const std::vector<std::string_view>& fields) {
  for (auto f : fields)
    if (!parse_double(f)) return false;
  return true;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t n_points, std::size_t dim, std::vector<double> values)
    : n_points_(n_points), dim_(dim), values_(std::move(values)) {
  if (n_points_ == 0 || dim_ == 0) throw InvalidInput("feature matrix must be non-empty");
  if (values_.size() != n_points_ * dim_)
    throw InvalidInput("feature matrix value count does not match n_points*dim");
  for (std::size_t i = 0; i < n_points_; ++i) {
    double sq = 0.0;
    for (double v : row(i)) {
      if (!std::isfinite(v))
        throw InvalidInput("non-finite feature value in row " + std::to_string(i));
      sq += v * v;
    }
    if (!(sq > 0.0)) throw InvalidInput("zero-norm feature row " + std::to_string(i));
  }
}

LabeledFeatures read_features_csv(const std::filesystem::path& path, bool last_column_is_label) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t dim = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (rows == 0 && values.empty() && !all_numeric(fields)) continue;  // header
    std::size_t n_feat = fields.size() - (last_column_is_label ? 1 : 0);
    if (n_feat == 0) throw InvalidInput("no feature columns at line " + std::to_string(line_no));
    if (dim == 0) dim = n_feat;
    if (n_feat != dim) throw InvalidInput("ragged CSV row at line " + std::to_string(line_no));
    for (std::size_t c = 0; c < n_feat; ++c) {
      auto v = parse_double(fields[c]);
      if (!v) throw InvalidInput("non-numeric field at line " + std::to_string(line_no));
      values.push_back(*v);
    }
    if (last_column_is_label) {
      auto lab = parse_int(fields.back());
      if (!lab || *lab < 0) throw InvalidInput("bad label at line " + std::to_string(line_no));
      labels.push_back(static_cast<int>(*lab));
    }
    ++rows;
  }
  LabeledFeatures out{FeatureMatrix(rows, dim, std::move(values)), std::nullopt};
  if (last_column_is_label) out.labels = std::move(labels);
  return out;
}

void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& features,
                        const std::vector<int>* labels) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.precision(17);
  for (std::size_t i = 0; i < features.n_points(); ++i) {
    auto r = features.row(i);
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    if (labels) out << ',' << (*labels)[i];
    out << '\n';
  }
}

FeatureMatrix read_features_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kFeatureMagic, 4))
    throw InvalidInput("bad magic in feature file " + path.string());
  auto version = detail::read_le<std::uint32_t>(in);
  if (version != kFeatureVersion)
    throw InvalidInput("unsupported feature file version " + std::to_string(version));
  auto n = detail::read_le<std::uint64_t>(in);
  auto d = detail::read_le<std::uint64_t>(in);
  std::vector<double> values(n * d);
  for (auto& v : values) v = static_cast<double>(detail::read_le<float>(in));
  return FeatureMatrix(n, d, std::move(values));
}

void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(kFeatureMagic, 4);
  detail::write_le<std::uint32_t>(out, kFeatureVersion);
  detail::write_le<std::uint64_t>(out, features.n_points());
  detail::write_le<std::uint64_t>(out, features.dim());
  for (double v : features.values()) detail::write_le<float>(out, static_cast<float>(v));
}

LabeledFeatures read_features(const std::filesystem::path& path, bool last_column_is_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in && std::string_view(magic, 4) == std::string_view(kFeatureMagic, 4))
    return {read_features_binary(path), std::nullopt};
  return read_features_csv(path, last_column_is_label);
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<int> labels;
  std::vector<std::pair<long long, long long>> pairs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (first && !all_numeric(fields)) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() == 1) {
      auto v = parse_int(fields[0]);
      if (!v || *v < 0) throw InvalidInput("bad label line: " + line);
      labels.push_back(static_cast<int>(*v));
    } else if (fields.size() == 2) {
      auto id = parse_int(fields[0]);
      auto v = parse_int(fields[1]);
      if (!id || !v || *id < 0 || *v < 0) throw InvalidInput("bad label line: " + line);
      pairs.emplace_back(*id, *v);
    } else {
      throw InvalidInput("label lines must have one or two fields: " + line);
    }
  }
  if (!pairs.empty()) {
    if (!labels.empty()) throw InvalidInput("mixed label line formats in " + path.string());
    labels.assign(pairs.size(), -1);
    for (auto [id, v] : pairs) {
      if (static_cast<std::size_t>(id) >= pairs.size() || labels[id] != -1)
        throw InvalidInput("label ids must be a permutation of 0..N-1");
      labels[id] = static_cast<int>(v);
    }
  }
  return labels;
}

}  // namespace gbal

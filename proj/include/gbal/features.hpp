#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace gbal {

// Dense row-major N x d matrix of embedded feature vectors.
//
// Construction validates that every entry is finite and every row has a
// strictly positive Euclidean norm; angular distance is undefined otherwise.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t n_points, std::size_t dim, std::vector<double> values);

  std::size_t n_points() const noexcept { return n_points_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t n_points_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct LabeledFeatures {
  FeatureMatrix features;
  std::optional<std::vector<int>> labels;
};

// CSV: one row per point, optional header line (detected when the first line
// has a non-numeric field). When `last_column_is_label` is set, the final
// column is parsed as an integer class id.
LabeledFeatures read_features_csv(const std::filesystem::path& path,
                                  bool last_column_is_label = false);
void write_features_csv(const std::filesystem::path& path, const FeatureMatrix& features,
                        const std::vector<int>* labels = nullptr);

// Binary layout, all little-endian:
//   "GBAL" | u32 version (=1) | u64 n_points | u64 dim | n_points*dim f32, row-major
inline constexpr char kFeatureMagic[4] = {'G', 'B', 'A', 'L'};
inline constexpr std::uint32_t kFeatureVersion = 1;

FeatureMatrix read_features_binary(const std::filesystem::path& path);
void write_features_binary(const std::filesystem::path& path, const FeatureMatrix& features);

// Dispatches on the leading magic bytes: binary when they read "GBAL", CSV otherwise.
LabeledFeatures read_features(const std::filesystem::path& path,
                              bool last_column_is_label = false);

// Label file: one integer per line, or "id,label" pairs; a header is allowed.
std::vector<int> read_labels_csv(const std::filesystem::path& path);

}  // namespace gbal

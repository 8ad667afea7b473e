#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bifid/model/observation.hpp"

namespace bifid::io {

/// Materials-style table: an id, a fixed-width feature vector and optional
/// cheap/expensive targets per row.
struct DescriptorRow {
  std::string id;
  std::vector<double> features;
  std::optional<double> y_cheap;
  std::optional<double> y_exp;
};

class DescriptorDataset {
public:
  DescriptorDataset() = default;
  explicit DescriptorDataset(int width) : width_(width) {}

  int width() const { return width_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<DescriptorRow>& rows() const { return rows_; }

  /// Throws ArgumentError when the feature width differs, a value is not
  /// finite or both targets are missing.
  void add(DescriptorRow row);

  /// Observations of both fidelities; features are used as given.
  model::Dataset to_dataset() const;

  /// CSV with header `id,f1..fP,y_cheap,y_exp`; missing targets are empty
  /// cells. Throws IoError with the offending line on malformed input.
  static DescriptorDataset read_csv(const std::filesystem::path& path);
  void write_csv(const std::filesystem::path& path) const;

private:
  int width_ = 0;
  std::vector<DescriptorRow> rows_;
};

}  // namespace bifid::io

// SPDX-License-Identifier: Apache-2.0
//
// Labeled feature matrices: CSV loading, min-max normalization, Pearson
// channel ranking and seeded train/test splits.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eegcrypt/errors.hpp"
#include "eegcrypt/matrix.hpp"

namespace eegcrypt::data {

/// Correlation is undefined because one input is constant.
class UndefinedCorrelation : public DataError {
 public:
  using DataError::DataError;
};

/// Per-channel (min, max) recorded on the training data.
struct NormalizationStats {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t size() const { return min.size(); }
  bool operator==(const NormalizationStats&) const = default;
};

struct Dataset {
  Matrix features;                 // samples x channels
  std::vector<int> labels;         // 1..k
  std::vector<std::string> channel_names;
  std::optional<NormalizationStats> normalization;

  std::size_t size() const { return labels.size(); }
  std::size_t channels() const { return features.cols; }
  int max_label() const;
};

struct ChannelScore {
  std::size_t index = 0;           // column in the source dataset
  std::string name;
  std::optional<double> r;         // nullopt when the channel is constant
  std::size_t rank = 0;            // 0 = most correlated
};

/// Channels ordered by rank.
struct ChannelRanking {
  std::vector<ChannelScore> channels;
};

/// Reads a CSV with a header row. `label_column` names the integer label
/// column; every other column is a numeric feature. Labels must be >= 1 and,
/// when max_label > 0, <= max_label. Errors carry the 1-based file line.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column = "label",
                 int max_label = 0);
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column = "label");

/// Pearson correlation coefficient. Throws UndefinedCorrelation when either
/// input is constant and DataError on length mismatch or fewer than 2 points.
double pearson(std::span<const double> x, std::span<const double> y);

/// Ranks channels by |r| against the numeric label, keeps the top k.
std::pair<Dataset, ChannelRanking> select_channels(const Dataset& ds, std::size_t k);

/// Keeps the named channels in the given order.
Dataset select_by_name(const Dataset& ds, const std::vector<std::string>& names);

/// Min-max scaling to [0, 1]; constant channels map to 0.5.
std::pair<Dataset, NormalizationStats> normalize(const Dataset& ds);

/// Applies stored statistics, clamping to [0, 1].
Dataset apply_normalization(const NormalizationStats& stats, const Dataset& ds);
void apply_normalization(const NormalizationStats& stats, std::span<double> row);

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// Rows [first, first + count) as a new dataset.
Dataset slice(const Dataset& ds, std::size_t first, std::size_t count);

/// Gaussian class blobs: class means drawn N(0, separation^2) per feature,
/// unit-variance noise around them. Labels cycle 1..n_classes.
Dataset make_blobs(std::size_t n_samples, std::size_t n_features, int n_classes,
                   double separation, std::uint64_t seed);

}  // namespace eegcrypt::data

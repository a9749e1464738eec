// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace eegcrypt::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string row_error(std::size_t line, const std::string& what) {
  return "row " + std::to_string(line) + ": " + what;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset with_rows(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.channel_names = ds.channel_names;
  out.normalization = ds.normalization;
  out.features = Matrix(rows.size(), ds.channels());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = ds.features.row(rows[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.labels.push_back(ds.labels[rows[i]]);
  }
  return out;
}

Dataset with_columns(const Dataset& ds, std::span<const std::size_t> cols) {
  Dataset out;
  out.labels = ds.labels;
  out.features = Matrix(ds.size(), cols.size());
  for (std::size_t c : cols) out.channel_names.push_back(ds.channel_names[c]);
  for (std::size_t r = 0; r < ds.size(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) out.features(r, j) = ds.features(r, cols[j]);
  if (ds.normalization) {
    NormalizationStats stats;
    for (std::size_t c : cols) {
      stats.min.push_back(ds.normalization->min[c]);
      stats.max.push_back(ds.normalization->max[c]);
    }
    out.normalization = std::move(stats);
  }
  return out;
}

}  // namespace

int Dataset::max_label() const {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 int max_label) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = split_fields(line);

  Dataset ds;
  std::size_t label_index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column)
      label_index = i;
    else
      ds.channel_names.emplace_back(header[i]);
  }
  if (label_index == header.size())
    throw DataError(path.string() + ": no label column named '" + label_column + "'");
  if (ds.channel_names.empty()) throw DataError(path.string() + ": no feature columns");

  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw DataError(row_error(line_no, "expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(fields.size())));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string_view f = fields[i];
      if (f.empty())
        throw DataError(row_error(line_no, "missing value in column '" + std::string(header[i]) + "'"));
      if (i == label_index) {
        int label = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
        if (ec != std::errc() || ptr != f.data() + f.size())
          throw DataError(row_error(line_no, "label '" + std::string(f) + "' is not an integer"));
        if (label < 1 || (max_label > 0 && label > max_label))
          throw DataError(row_error(line_no, "label " + std::to_string(label) + " out of range"));
        ds.labels.push_back(label);
      } else {
        double v = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
          throw DataError(row_error(line_no, "non-numeric value '" + std::string(f) +
                                                 "' in column '" + std::string(header[i]) + "'"));
        values.push_back(v);
      }
    }
  }
  ds.features.rows = ds.labels.size();
  ds.features.cols = ds.channel_names.size();
  ds.features.data = std::move(values);
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& name : ds.channel_names) out << name << ',';
  out << label_column << '\n';
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.features.row(r)) out << format_double(v) << ',';
    out << ds.labels[r] << '\n';
  }
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  if (x.size() < 2) throw DataError("pearson: need at least two points");

  // Single-pass co-moment accumulation (Welford).
  double mean_x = 0, mean_y = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    mean_x += dx / k;
    mean_y += dy / k;
    sxx += dx * (x[i] - mean_x);
    syy += dy * (y[i] - mean_y);
    sxy += dx * (y[i] - mean_y);
  }
  if (sxx <= 0 || syy <= 0) throw UndefinedCorrelation("pearson: constant input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::pair<Dataset, ChannelRanking> select_channels(const Dataset& ds, std::size_t k) {
  const std::size_t channels = ds.channels();
  if (k < 1 || k > channels)
    throw UsageError("channel count k=" + std::to_string(k) + " outside [1, " +
                     std::to_string(channels) + "]");

  std::vector<double> labels(ds.labels.begin(), ds.labels.end());
  std::vector<double> column(ds.size());
  std::vector<ChannelScore> scores(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t r = 0; r < ds.size(); ++r) column[r] = ds.features(r, c);
    scores[c].index = c;
    scores[c].name = ds.channel_names[c];
    try {
      scores[c].r = pearson(column, labels);
    } catch (const UndefinedCorrelation&) {
      scores[c].r.reset();
    }
  }
  std::stable_sort(scores.begin(), scores.end(), [](const ChannelScore& a, const ChannelScore& b) {
    if (a.r.has_value() != b.r.has_value()) return a.r.has_value();
    if (!a.r) return false;
    return std::abs(*a.r) > std::abs(*b.r);
  });
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i].rank = i;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < k; ++i) keep.push_back(scores[i].index);
  return {with_columns(ds, keep), ChannelRanking{std::move(scores)}};
}

Dataset select_by_name(const Dataset& ds, const std::vector<std::string>& names) {
  std::vector<std::size_t> cols;
  for (const auto& name : names) {
    auto it = std::find(ds.channel_names.begin(), ds.channel_names.end(), name);
    if (it == ds.channel_names.end()) throw DataError("dataset has no channel '" + name + "'");
    cols.push_back(static_cast<std::size_t>(it - ds.channel_names.begin()));
  }
  return with_columns(ds, cols);
}

void apply_normalization(const NormalizationStats& stats, std::span<double> row) {
  if (row.size() != stats.size())
    throw DataError("normalization width " + std::to_string(stats.size()) +
                    " does not match sample width " + std::to_string(row.size()));
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double lo = stats.min[c], hi = stats.max[c];
    row[c] = hi > lo ? std::clamp((row[c] - lo) / (hi - lo), 0.0, 1.0) : 0.5;
  }
}

Dataset apply_normalization(const NormalizationStats& stats, const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t r = 0; r < out.size(); ++r) apply_normalization(stats, out.features.row(r));
  out.normalization = stats;
  return out;
}

std::pair<Dataset, NormalizationStats> normalize(const Dataset& ds) {
  NormalizationStats stats;
  stats.min.assign(ds.channels(), 0.0);
  stats.max.assign(ds.channels(), 0.0);
  for (std::size_t c = 0; c < ds.channels(); ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      lo = std::min(lo, ds.features(r, c));
      hi = std::max(hi, ds.features(r, c));
    }
    stats.min[c] = ds.size() ? lo : 0.0;
    stats.max[c] = ds.size() ? hi : 0.0;
  }
  return {apply_normalization(stats, ds), stats};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw UsageError("train fraction must lie strictly between 0 and 1");
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(ds.size())));
  if (n_train == 0 || n_train >= ds.size())
    throw DataError("train fraction leaves an empty partition for " +
                    std::to_string(ds.size()) + " samples");

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  std::shuffle(order.begin(), order.end(), gen);

  const std::span<const std::size_t> all(order);
  return {with_rows(ds, all.first(n_train)), with_rows(ds, all.subspan(n_train))};
}

Dataset slice(const Dataset& ds, std::size_t first, std::size_t count) {
  if (first > ds.size()) first = ds.size();
  count = std::min(count, ds.size() - first);
  std::vector<std::size_t> rows(count);
  std::iota(rows.begin(), rows.end(), first);
  return with_rows(ds, rows);
}

Dataset make_blobs(std::size_t n_samples, std::size_t n_features, int n_classes,
                   double separation, std::uint64_t seed) {
  if (n_classes < 1 || n_features < 1) throw UsageError("make_blobs: empty shape");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix means(static_cast<std::size_t>(n_classes), n_features);
  for (double& m : means.data) m = separation * normal(gen);

  Dataset ds;
  ds.features = Matrix(n_samples, n_features);
  for (std::size_t c = 0; c < n_features; ++c) ds.channel_names.push_back("ch" + std::to_string(c));
  for (std::size_t r = 0; r < n_samples; ++r) {
    const int label = static_cast<int>(r % static_cast<std::size_t>(n_classes)) + 1;
    ds.labels.push_back(label);
    for (std::size_t c = 0; c < n_features; ++c)
      ds.features(r, c) = means(static_cast<std::size_t>(label - 1), c) + normal(gen);
  }
  return ds;
}

}  // namespace eegcrypt::data

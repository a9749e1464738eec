// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eegcrypt/data.hpp"
#include "eegcrypt/encinfer.hpp"
#include "eegcrypt/paillier.hpp"

namespace eegcrypt::eval {

/// Rows are truth, columns are predictions; both 1-based labels map to
/// index label - 1.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;  // k x k row-major
  std::vector<std::string> class_names;

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
  std::size_t total() const;
  std::size_t row_sum(std::size_t c) const;
  std::size_t col_sum(std::size_t c) const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, std::size_t k,
                          std::vector<std::string> class_names = {});

/// Builds a matrix from explicit counts (row-major, k x k).
ConfusionMatrix from_counts(std::size_t k, std::vector<std::size_t> counts,
                            std::vector<std::string> class_names = {});

struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  /// Unweighted means over classes where the metric is defined.
  std::optional<double> mean_precision, mean_recall, mean_f1;
  double accuracy = 0.0;
  /// Classes with at least one undefined metric.
  std::vector<std::size_t> excluded;
};

MetricsReport metrics(const ConfusionMatrix& cm);

struct ErrorRate {
  double literal = 0.0;   // misclassified / train_size
  double standard = 0.0;  // misclassified / test_size
};

ErrorRate error_rate(std::size_t misclassified_test, std::size_t train_size, std::size_t test_size);

struct StageTiming {
  std::size_t samples = 0;
  double total_seconds = 0.0;
  double mean_seconds() const { return samples ? total_seconds / double(samples) : 0.0; }
};

struct TimingReport {
  StageTiming encode_encrypt;
  StageTiming inference;
  StageTiming decrypt_decode;
};

/// Times the three online stages back to back over the first n_samples rows
/// of `samples` (already normalized). Stages never overlap.
TimingReport bench(const paillier::KeyPair& keys, const encinfer::QuantizedModel& model,
                   const data::Dataset& samples, std::size_t n_samples,
                   paillier::RandomSource& rng, int workers = 1);

std::string format_confusion(const ConfusionMatrix& cm);
std::string format_heatmap(const ConfusionMatrix& cm);
std::string format_metrics(const ConfusionMatrix& cm, const MetricsReport& m);
/// class,precision,recall,f1 rows plus a mean row; undefined cells read "undefined".
std::string metrics_csv(const ConfusionMatrix& cm, const MetricsReport& m);
std::string confusion_csv(const ConfusionMatrix& cm);
std::string format_timing(const TimingReport& t);
std::string timing_csv(const TimingReport& t);

}  // namespace eegcrypt::eval

// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "eegcrypt/errors.hpp"

namespace eegcrypt::eval {

namespace {

std::vector<std::string> default_names(std::size_t k, std::vector<std::string> names) {
  if (names.empty())
    for (std::size_t c = 0; c < k; ++c) names.push_back(std::to_string(c + 1));
  if (names.size() != k) throw UsageError("class name count does not match k");
  return names;
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

std::string plain(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

std::optional<double> mean_of(const std::vector<ClassMetrics>& per_class,
                              std::optional<double> ClassMetrics::*field) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& m : per_class)
    if (m.*field) {
      total += *(m.*field);
      ++n;
    }
  if (n == 0) return std::nullopt;
  return total / double(n);
}

}  // namespace

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < k; ++p) s += at(c, p);
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t t = 0; t < k; ++t) s += at(t, c);
  return s;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> pred, std::size_t k,
                          std::vector<std::string> class_names) {
  if (truth.size() != pred.size())
    throw DataError("truth and prediction counts differ (" + std::to_string(truth.size()) +
                    " vs " + std::to_string(pred.size()) + ")");
  ConfusionMatrix cm;
  cm.k = k;
  cm.counts.assign(k * k, 0);
  cm.class_names = default_names(k, std::move(class_names));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = pred[i];
    if (t < 1 || p < 1 || std::size_t(t) > k || std::size_t(p) > k)
      throw DataError("sample " + std::to_string(i + 1) + ": label outside [1, " +
                      std::to_string(k) + "]");
    ++cm.counts[std::size_t(t - 1) * k + std::size_t(p - 1)];
  }
  return cm;
}

ConfusionMatrix from_counts(std::size_t k, std::vector<std::size_t> counts,
                            std::vector<std::string> class_names) {
  if (counts.size() != k * k) throw UsageError("confusion counts must be k x k");
  ConfusionMatrix cm;
  cm.k = k;
  cm.counts = std::move(counts);
  cm.class_names = default_names(k, std::move(class_names));
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  std::size_t diagonal = 0;
  for (std::size_t c = 0; c < cm.k; ++c) {
    const std::size_t tp = cm.at(c, c);
    diagonal += tp;
    ClassMetrics m;
    m.precision = ratio(tp, cm.col_sum(c));
    m.recall = ratio(tp, cm.row_sum(c));
    if (m.precision && m.recall) {
      const double denom = *m.precision + *m.recall;
      m.f1 = denom > 0.0 ? 2.0 * *m.precision * *m.recall / denom : 0.0;
    }
    if (!m.precision || !m.recall) r.excluded.push_back(c);
    r.per_class.push_back(m);
  }
  r.mean_precision = mean_of(r.per_class, &ClassMetrics::precision);
  r.mean_recall = mean_of(r.per_class, &ClassMetrics::recall);
  r.mean_f1 = mean_of(r.per_class, &ClassMetrics::f1);
  const std::size_t total = cm.total();
  r.accuracy = total ? double(diagonal) / double(total) : 0.0;
  return r;
}

ErrorRate error_rate(std::size_t misclassified_test, std::size_t train_size,
                     std::size_t test_size) {
  if (train_size == 0 || test_size == 0) throw UsageError("error_rate needs non-zero sizes");
  return {double(misclassified_test) / double(train_size),
          double(misclassified_test) / double(test_size)};
}

TimingReport bench(const paillier::KeyPair& keys, const encinfer::QuantizedModel& model,
                   const data::Dataset& samples, std::size_t n_samples,
                   paillier::RandomSource& rng, int workers) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  TimingReport report;
  n_samples = std::min(n_samples, samples.size());
  if (n_samples == 0) return report;

  const data::Dataset batch = data::slice(samples, 0, n_samples);
  const fixedpoint::FixedPointCodec codec(model.frac_bits, keys.pub.n);
  std::vector<std::uint64_t> seeds(n_samples);
  for (auto& s : seeds) s = rng.next_u64();

  auto t0 = clock::now();
  const auto encrypted = encinfer::encrypt_batch(keys.pub, codec, batch.features, seeds, workers);
  auto t1 = clock::now();
  const auto logits = encinfer::enc_forward_batch(keys.pub, model, encrypted, workers);
  auto t2 = clock::now();
  for (const auto& l : logits) (void)encinfer::decrypt_logits(keys.priv, codec, l);
  auto t3 = clock::now();

  report.encode_encrypt = {n_samples, seconds(t0, t1)};
  report.inference = {n_samples, seconds(t1, t2)};
  report.decrypt_decode = {n_samples, seconds(t2, t3)};
  return report;
}

std::string format_confusion(const ConfusionMatrix& cm) {
  std::size_t width = 10;
  for (const auto& n : cm.class_names) width = std::max(width, n.size() + 2);
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-*s", int(width), "truth\\pred");
  out << buf;
  for (const auto& n : cm.class_names) {
    std::snprintf(buf, sizeof buf, "%*s", int(width), n.c_str());
    out << buf;
  }
  out << '\n';
  for (std::size_t t = 0; t < cm.k; ++t) {
    std::snprintf(buf, sizeof buf, "%-*s", int(width), cm.class_names[t].c_str());
    out << buf;
    for (std::size_t p = 0; p < cm.k; ++p) {
      std::snprintf(buf, sizeof buf, "%*zu", int(width), cm.at(t, p));
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string format_heatmap(const ConfusionMatrix& cm) {
  // Shade by row-normalized frequency.
  static const char* shades[] = {" ", ".", ":", "-", "=", "+", "*", "#", "%", "@"};
  std::ostringstream out;
  for (std::size_t t = 0; t < cm.k; ++t) {
    const std::size_t row = cm.row_sum(t);
    out << '|';
    for (std::size_t p = 0; p < cm.k; ++p) {
      const double f = row ? double(cm.at(t, p)) / double(row) : 0.0;
      const int level = std::min(9, int(f * 10.0));
      out << shades[level] << shades[level];
    }
    out << "|  " << cm.class_names[t] << '\n';
  }
  return out.str();
}

std::string format_metrics(const ConfusionMatrix& cm, const MetricsReport& m) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s\n", "class", "precision", "recall", "f1");
  out << buf;
  for (std::size_t c = 0; c < cm.k; ++c) {
    const auto& pc = m.per_class[c];
    std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s\n", cm.class_names[c].c_str(),
                  percent(pc.precision).c_str(), percent(pc.recall).c_str(),
                  percent(pc.f1).c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-16s %12s %12s %12s\n", "mean", percent(m.mean_precision).c_str(),
                percent(m.mean_recall).c_str(), percent(m.mean_f1).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "accuracy: %.2f%%\n", m.accuracy * 100.0);
  out << buf;
  if (!m.excluded.empty()) {
    out << "excluded from means (undefined metric):";
    for (std::size_t c : m.excluded) out << ' ' << cm.class_names[c];
    out << '\n';
  }
  return out.str();
}

std::string metrics_csv(const ConfusionMatrix& cm, const MetricsReport& m) {
  std::ostringstream out;
  out << "class,precision,recall,f1\n";
  for (std::size_t c = 0; c < cm.k; ++c) {
    const auto& pc = m.per_class[c];
    out << cm.class_names[c] << ',' << plain(pc.precision) << ',' << plain(pc.recall) << ','
        << plain(pc.f1) << '\n';
  }
  out << "mean," << plain(m.mean_precision) << ',' << plain(m.mean_recall) << ','
      << plain(m.mean_f1) << '\n';
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "truth";
  for (const auto& n : cm.class_names) out << ',' << n;
  out << '\n';
  for (std::size_t t = 0; t < cm.k; ++t) {
    out << cm.class_names[t];
    for (std::size_t p = 0; p < cm.k; ++p) out << ',' << cm.at(t, p);
    out << '\n';
  }
  return out.str();
}

std::string format_timing(const TimingReport& t) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-18s %8s %14s %18s\n", "stage", "samples", "total (s)",
                "mean (s/sample)");
  out << buf;
  auto line = [&](const char* name, const StageTiming& s) {
    std::snprintf(buf, sizeof buf, "%-18s %8zu %14.6f %18.6f\n", name, s.samples, s.total_seconds,
                  s.mean_seconds());
    out << buf;
  };
  line("encode+encrypt", t.encode_encrypt);
  line("inference", t.inference);
  line("decrypt+decode", t.decrypt_decode);
  return out.str();
}

std::string timing_csv(const TimingReport& t) {
  std::ostringstream out;
  out << "stage,samples,total_seconds,mean_seconds\n";
  auto line = [&](const char* name, const StageTiming& s) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%zu,%.9f,%.9f\n", name, s.samples, s.total_seconds,
                  s.mean_seconds());
    out << buf;
  };
  line("encode_encrypt", t.encode_encrypt);
  line("inference", t.inference);
  line("decrypt_decode", t.decrypt_decode);
  return out.str();
}

}  // namespace eegcrypt::eval

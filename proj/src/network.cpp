// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>

#include "eegcrypt/errors.hpp"
#include "eegcrypt/fixedpoint.hpp"

namespace eegcrypt::network {

namespace {

std::atomic<std::uint64_t> g_excursions{0};

void check_input(const NetworkModel& model, std::span<const double> x) {
  if (x.size() != model.n_i)
    throw DataError("input width " + std::to_string(x.size()) + " does not match model width " +
                    std::to_string(model.n_i));
}

double activation_derivative(Activation act, double a) {
  return act == Activation::sigmoid ? a * (1.0 - a) : kApproxSlope;
}

}  // namespace

const char* to_string(Activation a) {
  return a == Activation::sigmoid ? "sigmoid" : "linear_approx";
}

Activation activation_from_string(const std::string& s) {
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "linear_approx") return Activation::linear_approx;
  throw UsageError("unknown activation mode '" + s + "'");
}

NetworkModel zero_model(std::size_t n_i, std::size_t n_d, std::size_t n_o, Activation act) {
  if (n_i == 0 || n_d == 0 || n_o == 0) throw UsageError("network dimensions must be positive");
  NetworkModel m;
  m.n_i = n_i;
  m.n_d = n_d;
  m.n_o = n_o;
  m.W1 = Matrix(n_i, n_d);
  m.b1.assign(n_d, 0.0);
  m.W2 = Matrix(n_d, n_o);
  m.b2.assign(n_o, 0.0);
  m.activation = act;
  return m;
}

NetworkModel init_model(std::size_t n_i, std::size_t n_d, std::size_t n_o, Activation act,
                        std::uint64_t seed) {
  NetworkModel m = zero_model(n_i, n_d, n_o, act);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u1(-1.0 / std::sqrt(double(n_i)), 1.0 / std::sqrt(double(n_i)));
  for (double& w : m.W1.data) w = u1(gen);
  std::uniform_real_distribution<double> u2(-1.0 / std::sqrt(double(n_d)), 1.0 / std::sqrt(double(n_d)));
  for (double& w : m.W2.data) w = u2(gen);
  return m;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double approx_activation(double z) {
  if (std::abs(z) > 1.0) g_excursions.fetch_add(1, std::memory_order_relaxed);
  return kApproxSlope * z + kApproxIntercept;
}

std::uint64_t approx_excursions() { return g_excursions.load(std::memory_order_relaxed); }
void reset_approx_excursions() { g_excursions.store(0, std::memory_order_relaxed); }

double activate(Activation act, double z) {
  return act == Activation::sigmoid ? sigmoid(z) : approx_activation(z);
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) total += out[k] = std::exp(logits[k] - top);
  for (double& p : out) p /= total;
  return out;
}

double cross_entropy(std::span<const double> logits, int label) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - top);
  return top + std::log(total) - logits[static_cast<std::size_t>(label - 1)];
}

int argmax_label(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin()) + 1;
}

ForwardResult forward(const NetworkModel& model, std::span<const double> x) {
  check_input(model, x);
  ForwardResult out;
  out.hidden_pre = model.b1;
  for (std::size_t i = 0; i < model.n_i; ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < model.n_d; ++j) out.hidden_pre[j] += model.W1(i, j) * xi;
  }
  out.hidden.resize(model.n_d);
  for (std::size_t j = 0; j < model.n_d; ++j)
    out.hidden[j] = activate(model.activation, out.hidden_pre[j]);
  out.logits = model.b2;
  for (std::size_t j = 0; j < model.n_d; ++j) {
    const double aj = out.hidden[j];
    for (std::size_t k = 0; k < model.n_o; ++k) out.logits[k] += model.W2(j, k) * aj;
  }
  out.probs = softmax(out.logits);
  return out;
}

int predict(const NetworkModel& model, std::span<const double> x) {
  return argmax_label(forward(model, x).logits);
}

double accuracy(const NetworkModel& model, const data::Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ds.size(); ++r)
    hits += predict(model, ds.features.row(r)) == ds.labels[r];
  return double(hits) / double(ds.size());
}

double mean_loss(const NetworkModel& model, const data::Dataset& ds) {
  if (ds.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < ds.size(); ++r)
    total += cross_entropy(forward(model, ds.features.row(r)).logits, ds.labels[r]);
  return total / double(ds.size());
}

Gradients backprop(const NetworkModel& model, const data::Dataset& ds,
                   std::span<const std::size_t> rows) {
  if (rows.empty()) throw DataError("backprop on an empty batch");
  Gradients g;
  g.W1 = Matrix(model.n_i, model.n_d);
  g.b1.assign(model.n_d, 0.0);
  g.W2 = Matrix(model.n_d, model.n_o);
  g.b2.assign(model.n_o, 0.0);

  std::vector<double> d_logits(model.n_o), d_hidden(model.n_d);
  for (std::size_t r : rows) {
    const auto x = ds.features.row(r);
    const int label = ds.labels[r];
    if (label < 1 || static_cast<std::size_t>(label) > model.n_o)
      throw DataError("label " + std::to_string(label) + " outside [1, " +
                      std::to_string(model.n_o) + "]");
    const ForwardResult f = forward(model, x);
    g.loss += cross_entropy(f.logits, label);

    for (std::size_t k = 0; k < model.n_o; ++k)
      d_logits[k] = f.probs[k] - (static_cast<int>(k) + 1 == label ? 1.0 : 0.0);
    for (std::size_t j = 0; j < model.n_d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < model.n_o; ++k) {
        g.W2(j, k) += f.hidden[j] * d_logits[k];
        acc += model.W2(j, k) * d_logits[k];
      }
      d_hidden[j] = acc * activation_derivative(model.activation, f.hidden[j]);
    }
    for (std::size_t k = 0; k < model.n_o; ++k) g.b2[k] += d_logits[k];
    for (std::size_t i = 0; i < model.n_i; ++i)
      for (std::size_t j = 0; j < model.n_d; ++j) g.W1(i, j) += x[i] * d_hidden[j];
    for (std::size_t j = 0; j < model.n_d; ++j) g.b1[j] += d_hidden[j];
  }

  const double inv = 1.0 / double(rows.size());
  for (double& v : g.W1.data) v *= inv;
  for (double& v : g.b1) v *= inv;
  for (double& v : g.W2.data) v *= inv;
  for (double& v : g.b2) v *= inv;
  g.loss *= inv;
  return g;
}

void sgd_step(NetworkModel& model, const Gradients& grads, double eta) {
  auto step = [eta](std::vector<double>& w, const std::vector<double>& dw) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * dw[i];
  };
  step(model.W1.data, grads.W1.data);
  step(model.b1, grads.b1);
  step(model.W2.data, grads.W2.data);
  step(model.b2, grads.b2);
}

double lr_schedule(const TrainConfig& cfg, std::size_t train_size, std::size_t epoch) {
  const double iter_per_epoch = double(train_size) / double(cfg.batch_size);
  // t0 / (20 i + t1) with t0 = eta0 * ipe and t1 = ipe, divided through by
  // ipe so epoch 0 yields eta0 without rounding.
  const double eta = cfg.eta0 / (1.0 + double(epoch) * 20.0 / iter_per_epoch);
  return eta < 0.011 ? cfg.eta_floor : eta;
}

TrainResult train(NetworkModel model, const data::Dataset& train_set, const TrainConfig& cfg) {
  const std::size_t n = train_set.size();
  if (n == 0) throw DataError("training set is empty");
  if (train_set.channels() != model.n_i)
    throw DataError("training set has " + std::to_string(train_set.channels()) +
                    " channels, model expects " + std::to_string(model.n_i));
  if (cfg.iters_num == 0) throw UsageError("iters_num must be positive");
  if (cfg.batch_size == 0 || cfg.batch_size > n)
    throw UsageError("batch size must lie in [1, train_size]");
  if (!(cfg.eta_floor > 0.0 && cfg.eta_floor < cfg.eta0))
    throw UsageError("learning rates must satisfy 0 < eta_floor < eta0");

  std::mt19937_64 gen(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> batch(cfg.batch_size);

  const double iter_per_epoch = double(n) / double(cfg.batch_size);
  std::size_t epoch = 0;
  double eta = lr_schedule(cfg, n, 0);
  auto boundary = [&](std::size_t e) {
    return static_cast<std::size_t>(std::floor(double(e + 1) * iter_per_epoch));
  };
  std::size_t next_boundary = boundary(epoch);

  TrainResult result;
  auto record = [&] {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.eta = eta;
    double loss = 0.0;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const ForwardResult f = forward(model, train_set.features.row(r));
      loss += cross_entropy(f.logits, train_set.labels[r]);
      hits += argmax_label(f.logits) == train_set.labels[r];
      for (double h : f.hidden_pre) rec.excursions += std::abs(h) > 1.0;
    }
    rec.loss = loss / double(n);
    rec.train_acc = double(hits) / double(n);
    result.history.push_back(rec);
  };

  for (std::size_t step = 0; step < cfg.iters_num; ++step) {
    for (auto& idx : batch) idx = pick(gen);
    const Gradients g = backprop(model, train_set, batch);
    if (!std::isfinite(g.loss))
      throw DataError("training diverged at step " + std::to_string(step) + " (loss is not finite)");
    sgd_step(model, g, eta);

    if (step + 1 >= next_boundary) {
      record();
      ++epoch;
      eta = lr_schedule(cfg, n, epoch);
      next_boundary = std::max(boundary(epoch), step + 2);
    } else if (step + 1 == cfg.iters_num) {
      record();
    }
  }
  result.model = std::move(model);
  return result;
}

HiddenSizeRange suggest_hidden_size(std::size_t n_i, std::size_t n_o) {
  if (n_i < 1 || n_o < 1) throw UsageError("layer widths must be at least 1");
  const auto base = static_cast<std::size_t>(std::ceil(std::sqrt(double(n_i + n_o))));
  return {base + 1, base + 10};
}

encinfer::QuantizedModel export_model(const NetworkModel& model, unsigned frac_bits) {
  using namespace encinfer;
  if (frac_bits < fixedpoint::kMinFracBits || frac_bits > fixedpoint::kMaxFracBits)
    throw UsageError("frac_bits must lie in [5, 64]");
  auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!all_finite(model.W1.data) || !all_finite(model.b1) || !all_finite(model.W2.data) ||
      !all_finite(model.b2))
    throw DataError("model contains non-finite weights");

  auto quantize_all = [frac_bits](const std::vector<double>& v, unsigned level) {
    std::vector<mpz_class> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(fixedpoint::quantize(x, frac_bits, level));
    return out;
  };
  QuantizedModel q;
  q.n_i = model.n_i;
  q.n_d = model.n_d;
  q.n_o = model.n_o;
  q.frac_bits = frac_bits;
  q.W1 = quantize_all(model.W1.data, kWeightLevel);
  q.b1 = quantize_all(model.b1, kHiddenBiasLevel);
  q.act_slope = fixedpoint::quantize(kApproxSlope, frac_bits, kSlopeLevel);
  q.act_intercept = fixedpoint::quantize(kApproxIntercept, frac_bits, kInterceptLevel);
  q.W2 = quantize_all(model.W2.data, kWeightLevel);
  q.b2 = quantize_all(model.b2, kOutputBiasLevel);
  return q;
}

}  // namespace eegcrypt::network

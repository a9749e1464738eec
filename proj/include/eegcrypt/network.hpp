// SPDX-License-Identifier: Apache-2.0
//
// One-hidden-layer feed-forward classifier trained in plaintext with
// softmax cross-entropy and minibatch SGD. The hidden activation is either
// the logistic sigmoid or its linear stand-in 0.238 z + 0.5, which is the
// form evaluated later over ciphertexts.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegcrypt/data.hpp"
#include "eegcrypt/matrix.hpp"
#include "eegcrypt/quantized.hpp"

namespace eegcrypt::network {

enum class Activation { sigmoid, linear_approx };

constexpr double kApproxSlope = 0.238;
constexpr double kApproxIntercept = 0.5;

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct NetworkModel {
  std::size_t n_i = 0, n_d = 0, n_o = 0;
  Matrix W1;               // n_i x n_d
  std::vector<double> b1;  // n_d
  Matrix W2;               // n_d x n_o
  std::vector<double> b2;  // n_o
  Activation activation = Activation::linear_approx;
  unsigned frac_bits = 10;

  bool operator==(const NetworkModel&) const = default;
};

/// Zero weights and biases.
NetworkModel zero_model(std::size_t n_i, std::size_t n_d, std::size_t n_o, Activation act);

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases.
NetworkModel init_model(std::size_t n_i, std::size_t n_d, std::size_t n_o, Activation act,
                        std::uint64_t seed);

double sigmoid(double z);

/// 0.238 z + 0.5. Counts calls with |z| > 1 (outside the fitted interval).
double approx_activation(double z);
std::uint64_t approx_excursions();
void reset_approx_excursions();

double activate(Activation act, double z);

struct ForwardResult {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;
};

ForwardResult forward(const NetworkModel& model, std::span<const double> x);

std::vector<double> softmax(std::span<const double> logits);

/// -log softmax(logits)[label - 1], computed via log-sum-exp.
double cross_entropy(std::span<const double> logits, int label);

/// argmax + 1, ties to the lowest index.
int argmax_label(std::span<const double> values);

int predict(const NetworkModel& model, std::span<const double> x);
double accuracy(const NetworkModel& model, const data::Dataset& ds);
double mean_loss(const NetworkModel& model, const data::Dataset& ds);

struct Gradients {
  Matrix W1;
  std::vector<double> b1;
  Matrix W2;
  std::vector<double> b2;
  double loss = 0.0;  // batch mean
};

/// Batch-mean cross-entropy gradients over the given rows of `ds`.
Gradients backprop(const NetworkModel& model, const data::Dataset& ds,
                   std::span<const std::size_t> rows);

void sgd_step(NetworkModel& model, const Gradients& grads, double eta);

struct TrainConfig {
  std::size_t iters_num = 20000;
  std::size_t batch_size = 100;
  double eta0 = 0.2;
  double eta_floor = 0.01;
  std::uint64_t seed = 42;
};

/// Annealed learning rate for epoch i:
///   ipe = train_size / batch_size, eta = eta0 * ipe / (20 i + ipe),
/// replaced by eta_floor once it drops below 0.011.
double lr_schedule(const TrainConfig& cfg, std::size_t train_size, std::size_t epoch);

struct EpochRecord {
  std::size_t epoch = 0;
  double eta = 0.0;
  double loss = 0.0;
  double train_acc = 0.0;
  std::uint64_t excursions = 0;  // hidden pre-activations with |h| > 1
};

struct TrainResult {
  NetworkModel model;
  std::vector<EpochRecord> history;
};

TrainResult train(NetworkModel model, const data::Dataset& train_set, const TrainConfig& cfg);

struct HiddenSizeRange {
  std::size_t lo = 0, hi = 0;
};

/// ceil(sqrt(n_i + n_o)) + a for a in [1, 10].
HiddenSizeRange suggest_hidden_size(std::size_t n_i, std::size_t n_o);

/// Quantizes weights and activation constants to their fixed scale levels.
encinfer::QuantizedModel export_model(const NetworkModel& model, unsigned frac_bits);

}  // namespace eegcrypt::network

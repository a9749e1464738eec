// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/encinfer.hpp"

#include <algorithm>
#include <exception>
#include <string>

#include <omp.h>

#include "eegcrypt/errors.hpp"

namespace eegcrypt::encinfer {

namespace {

using paillier::Ciphertext;
using paillier::PublicKey;

void require_level(const EncryptedVector& v, unsigned expected, const char* stage) {
  if (v.level != expected)
    throw ScaleMismatch(std::string(stage) + ": expected level " + std::to_string(expected) +
                        ", got " + std::to_string(v.level));
  for (const auto& c : v.cts)
    if (c.level != v.level) throw ScaleMismatch(std::string(stage) + ": mixed entry levels");
}

void check_shape(const QuantizedModel& m) {
  if (m.n_i == 0 || m.n_d == 0 || m.n_o == 0 || m.W1.size() != m.n_i * m.n_d ||
      m.b1.size() != m.n_d || m.W2.size() != m.n_d * m.n_o || m.b2.size() != m.n_o)
    throw DataError("quantized model vectors do not match its dimensions");
}

// Runs body(i) for i in [0, count) on `workers` threads. The first exception
// thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  std::exception_ptr error;
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(workers, 1))
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(eegcrypt_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

EncryptedVector encrypt_sample(const PublicKey& pk, const fixedpoint::FixedPointCodec& codec,
                               std::span<const double> x, paillier::RandomSource& rng) {
  EncryptedVector out;
  out.level = kInputLevel;
  out.cts.reserve(x.size());
  for (double xi : x) {
    Ciphertext c = paillier::encrypt(pk, codec.encode(xi, kInputLevel), rng);
    c.level = kInputLevel;
    out.cts.push_back(std::move(c));
  }
  return out;
}

EncryptedVector enc_weighted_sum(const PublicKey& pk, std::span<const mpz_class> W,
                                 std::size_t out_width, std::span<const mpz_class> bias,
                                 unsigned bias_level, const EncryptedVector& v, int workers) {
  const std::size_t in_width = v.width();
  if (in_width == 0 || W.size() != in_width * out_width || bias.size() != out_width)
    throw DataError("weighted sum: dimension mismatch");
  for (const auto& c : v.cts)
    if (c.level != v.level) throw ScaleMismatch("weighted sum: mixed entry levels");
  const unsigned out_level = v.level + kWeightLevel;
  if (bias_level != out_level)
    throw ScaleMismatch("weighted sum: bias at level " + std::to_string(bias_level) +
                        ", output at level " + std::to_string(out_level));

  EncryptedVector out;
  out.level = out_level;
  out.cts.resize(out_width);
  auto neuron = [&](std::size_t j) {
    Ciphertext acc = paillier::mul_plain(pk, v.cts[0], W[j]);
    for (std::size_t i = 1; i < in_width; ++i)
      acc = paillier::add_ct(pk, acc, paillier::mul_plain(pk, v.cts[i], W[i * out_width + j]));
    acc = paillier::add_plain(pk, acc, bias[j]);
    acc.level = out_level;
    out.cts[j] = std::move(acc);
  };
  if (workers > 1) {
    parallel_for(out_width, workers, neuron);
  } else {
    for (std::size_t j = 0; j < out_width; ++j) neuron(j);
  }
  return out;
}

EncryptedVector enc_activation(const PublicKey& pk, const mpz_class& slope,
                               const mpz_class& intercept, unsigned intercept_level,
                               const EncryptedVector& v) {
  const unsigned out_level = v.level + kSlopeLevel;
  if (intercept_level != out_level)
    throw ScaleMismatch("activation: intercept at level " + std::to_string(intercept_level) +
                        ", output at level " + std::to_string(out_level));
  EncryptedVector out;
  out.level = out_level;
  out.cts.reserve(v.width());
  for (const auto& c : v.cts) {
    if (c.level != v.level) throw ScaleMismatch("activation: mixed entry levels");
    Ciphertext r = paillier::add_plain(pk, paillier::mul_plain(pk, c, slope), intercept);
    r.level = out_level;
    out.cts.push_back(std::move(r));
  }
  return out;
}

EncryptedVector enc_forward(const PublicKey& pk, const QuantizedModel& model,
                            const EncryptedVector& v) {
  check_shape(model);
  if (v.width() != model.n_i)
    throw DataError("encrypted sample width " + std::to_string(v.width()) +
                    " does not match model input width " + std::to_string(model.n_i));
  require_level(v, kInputLevel, "enc_forward");
  const EncryptedVector hidden =
      enc_weighted_sum(pk, model.W1, model.n_d, model.b1, kHiddenBiasLevel, v);
  const EncryptedVector act =
      enc_activation(pk, model.act_slope, model.act_intercept, kInterceptLevel, hidden);
  return enc_weighted_sum(pk, model.W2, model.n_o, model.b2, kOutputBiasLevel, act);
}

std::vector<EncryptedVector> enc_forward_batch(const PublicKey& pk, const QuantizedModel& model,
                                               std::span<const EncryptedVector> inputs,
                                               int workers) {
  std::vector<EncryptedVector> out(inputs.size());
  parallel_for(inputs.size(), workers,
               [&](std::size_t s) { out[s] = enc_forward(pk, model, inputs[s]); });
  return out;
}

std::vector<EncryptedVector> encrypt_batch(const PublicKey& pk,
                                           const fixedpoint::FixedPointCodec& codec,
                                           const Matrix& samples,
                                           std::span<const std::uint64_t> seeds, int workers) {
  if (seeds.size() != samples.rows) throw UsageError("encrypt_batch needs one seed per sample");
  std::vector<EncryptedVector> out(samples.rows);
  parallel_for(samples.rows, workers, [&](std::size_t s) {
    auto rng = paillier::RandomSource::from_seed(seeds[s]);
    out[s] = encrypt_sample(pk, codec, samples.row(s), rng);
  });
  return out;
}

Decision decrypt_logits(const paillier::PrivateKey& sk, const fixedpoint::FixedPointCodec& codec,
                        const EncryptedVector& logits) {
  require_level(logits, kLogitLevel, "decrypt_logits");
  if (logits.width() == 0) throw DataError("no logits to decrypt");
  std::vector<mpz_class> signed_values;
  signed_values.reserve(logits.width());
  for (const auto& c : logits.cts) signed_values.push_back(codec.unwrap(paillier::decrypt(sk, c)));

  Decision d;
  std::size_t best = 0;
  for (std::size_t k = 0; k < signed_values.size(); ++k) {
    d.logits.push_back(codec.to_real(signed_values[k], kLogitLevel));
    if (signed_values[k] > signed_values[best]) best = k;
  }
  d.predicted_class = static_cast<int>(best) + 1;
  return d;
}

MagnitudeBound magnitude_bound(const QuantizedModel& m) {
  check_shape(m);
  // A level-1 input in [0, 1] has magnitude at most 2^frac_bits.
  const mpz_class input_max = mpz_class(1) << m.frac_bits;
  MagnitudeBound b;
  std::vector<mpz_class> act(m.n_d);
  for (std::size_t j = 0; j < m.n_d; ++j) {
    mpz_class h = abs(m.b1[j]);
    for (std::size_t i = 0; i < m.n_i; ++i) h += abs(m.W1[i * m.n_d + j]) * input_max;
    act[j] = abs(m.act_slope) * h + abs(m.act_intercept);
    b.hidden = std::max(b.hidden, h);
    b.activation = std::max(b.activation, act[j]);
  }
  for (std::size_t k = 0; k < m.n_o; ++k) {
    mpz_class z = abs(m.b2[k]);
    for (std::size_t j = 0; j < m.n_d; ++j) z += abs(m.W2[j * m.n_o + k]) * act[j];
    b.logits = std::max(b.logits, z);
  }
  return b;
}

void audit(const QuantizedModel& model, const PublicKey& pk) {
  const MagnitudeBound b = magnitude_bound(model);
  for (const mpz_class* v : {&b.hidden, &b.activation, &b.logits})
    if (2 * *v >= pk.n)
      throw OverflowError("model magnitude bound reaches n/2 for a " +
                          std::to_string(pk.bit_length) + "-bit key; use a larger key");
}

}  // namespace eegcrypt::encinfer

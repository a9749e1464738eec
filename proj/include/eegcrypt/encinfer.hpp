// SPDX-License-Identifier: Apache-2.0
//
// Inference of a quantized network over Paillier ciphertexts.
//
// Everything on the evaluation side takes a PublicKey only: weighted sums
// are products of ciphertexts raised to plaintext weights, biases and the
// activation intercept are plaintext additions, and the activation itself is
// the affine map 0.238 z + 0.5. Each multiplication by a level-1 constant
// raises the scale level by one, so logits come out at level 4 and are only
// rescaled after decryption.
//
// enc_forward is the serial reference. enc_forward_batch and encrypt_batch
// are the OpenMP kernels; they produce bit-identical results for any worker
// count.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "eegcrypt/fixedpoint.hpp"
#include "eegcrypt/matrix.hpp"
#include "eegcrypt/paillier.hpp"
#include "eegcrypt/quantized.hpp"

namespace eegcrypt::encinfer {

struct EncryptedVector {
  std::vector<paillier::Ciphertext> cts;
  unsigned level = 0;

  std::size_t width() const { return cts.size(); }
};

/// Encodes each feature at level 1 and encrypts it.
EncryptedVector encrypt_sample(const paillier::PublicKey& pk,
                               const fixedpoint::FixedPointCodec& codec,
                               std::span<const double> x, paillier::RandomSource& rng);

/// out_j = sum_i W[i][j] * v_i + b_j with W row-major (v.width() x out_width)
/// at level 1 and b at level v.level + 1. `workers` > 1 spreads the output
/// neurons over OpenMP threads.
EncryptedVector enc_weighted_sum(const paillier::PublicKey& pk, std::span<const mpz_class> W,
                                 std::size_t out_width, std::span<const mpz_class> bias,
                                 unsigned bias_level, const EncryptedVector& v, int workers = 1);

/// out_i = slope * v_i + intercept, slope at level 1, intercept at level
/// v.level + 1.
EncryptedVector enc_activation(const paillier::PublicKey& pk, const mpz_class& slope,
                               const mpz_class& intercept, unsigned intercept_level,
                               const EncryptedVector& v);

/// Full network on one level-1 sample; returns n_o logits at level 4.
EncryptedVector enc_forward(const paillier::PublicKey& pk, const QuantizedModel& model,
                            const EncryptedVector& v);

std::vector<EncryptedVector> enc_forward_batch(const paillier::PublicKey& pk,
                                               const QuantizedModel& model,
                                               std::span<const EncryptedVector> inputs,
                                               int workers);

/// Encrypts each row of `samples` with its own RandomSource seeded from
/// `seeds[row]`, so the output does not depend on the worker count.
std::vector<EncryptedVector> encrypt_batch(const paillier::PublicKey& pk,
                                           const fixedpoint::FixedPointCodec& codec,
                                           const Matrix& samples,
                                           std::span<const std::uint64_t> seeds, int workers);

struct Decision {
  std::vector<double> logits;
  int predicted_class = 0;  // 1-based; ties go to the lowest index
};

Decision decrypt_logits(const paillier::PrivateKey& sk, const fixedpoint::FixedPointCodec& codec,
                        const EncryptedVector& logits);

/// Worst-case signed magnitudes at each stage for inputs in [0, 1].
struct MagnitudeBound {
  mpz_class hidden;      // level 2
  mpz_class activation;  // level 3
  mpz_class logits;      // level 4
};

MagnitudeBound magnitude_bound(const QuantizedModel& model);

/// Throws OverflowError unless every stage bound is below n/2; throws
/// DataError when the model's vectors do not match its dimensions.
void audit(const QuantizedModel& model, const paillier::PublicKey& pk);

}  // namespace eegcrypt::encinfer

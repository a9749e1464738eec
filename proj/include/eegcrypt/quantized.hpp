// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include <gmpxx.h>

namespace eegcrypt::encinfer {

/// Scale levels of the encrypted pipeline. Inputs enter at level 1; each
/// plaintext-weight multiplication adds one level.
inline constexpr unsigned kInputLevel = 1;
inline constexpr unsigned kWeightLevel = 1;
inline constexpr unsigned kHiddenBiasLevel = 2;
inline constexpr unsigned kSlopeLevel = 1;
inline constexpr unsigned kInterceptLevel = 3;
inline constexpr unsigned kOutputBiasLevel = 4;
inline constexpr unsigned kLogitLevel = 4;

/// Integer image of a trained network. All values are signed integers; the
/// level of each field is fixed by the constants above.
struct QuantizedModel {
  std::size_t n_i = 0, n_d = 0, n_o = 0;
  unsigned frac_bits = 10;
  std::vector<mpz_class> W1;  // n_i x n_d, row-major
  std::vector<mpz_class> b1;  // n_d
  mpz_class act_slope;
  mpz_class act_intercept;
  std::vector<mpz_class> W2;  // n_d x n_o, row-major
  std::vector<mpz_class> b2;  // n_o

  bool operator==(const QuantizedModel&) const = default;
};

}  // namespace eegcrypt::encinfer

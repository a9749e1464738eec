// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <gmpxx.h>

namespace eegcrypt::fixedpoint {

constexpr unsigned kMinFracBits = 5;
constexpr unsigned kMaxFracBits = 64;
constexpr unsigned kDefaultFracBits = 10;

/// round(x * 2^(frac_bits*level)), half away from zero, as a signed integer.
mpz_class quantize(double x, unsigned frac_bits, unsigned level);
/// s / 2^(frac_bits*level).
double dequantize(const mpz_class& s, unsigned frac_bits, unsigned level);

/// Signed real <-> Z_n mapping with power-of-two scaling.
///
/// A value at scale level L carries the factor 2^(frac_bits * L). Negative
/// values occupy the upper half of Z_n (v -> n - |v|), so addition mod n is
/// signed addition as long as magnitudes stay below n/2.
class FixedPointCodec {
 public:
  FixedPointCodec(unsigned frac_bits, mpz_class modulus);

  unsigned frac_bits() const { return frac_bits_; }
  const mpz_class& modulus() const { return modulus_; }

  /// round(x * 2^(frac_bits*level)), half away from zero, unwrapped.
  mpz_class quantize(double x, unsigned level) const;
  /// quantize() followed by wrap(). Throws OverflowError past n/2.
  mpz_class encode(double x, unsigned level) const;
  double decode(const mpz_class& v, unsigned level) const;
  mpz_class rescale_plain(const mpz_class& v, unsigned from_level, unsigned to_level) const;

  /// Signed integer -> residue in [0, n). Throws OverflowError when |s| >= n/2.
  mpz_class wrap(const mpz_class& s) const;
  /// Residue in [0, n) -> signed integer; v > n/2 reads as v - n.
  mpz_class unwrap(const mpz_class& v) const;
  /// Divides a signed integer by 2^(frac_bits*level).
  double to_real(const mpz_class& s, unsigned level) const;

  bool fits(const mpz_class& s) const;

 private:
  unsigned frac_bits_;
  mpz_class modulus_;
  mpz_class half_;
};

}  // namespace eegcrypt::fixedpoint

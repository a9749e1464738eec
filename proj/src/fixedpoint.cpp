// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/fixedpoint.hpp"

#include <cmath>
#include <string>

#include "eegcrypt/errors.hpp"

namespace eegcrypt::fixedpoint {

mpz_class quantize(double x, unsigned frac_bits, unsigned level) {
  if (!std::isfinite(x)) throw OverflowError("cannot encode a non-finite value");
  // ldexp is exact; std::round breaks ties away from zero.
  const double scaled = std::round(std::ldexp(x, static_cast<int>(frac_bits * level)));
  return mpz_class(scaled);
}

double dequantize(const mpz_class& s, unsigned frac_bits, unsigned level) {
  // mpz_get_d_2exp keeps the exponent separate so huge values do not overflow.
  long exp = 0;
  const double mantissa = mpz_get_d_2exp(&exp, s.get_mpz_t());
  return std::ldexp(mantissa, static_cast<int>(exp - static_cast<long>(frac_bits * level)));
}

FixedPointCodec::FixedPointCodec(unsigned frac_bits, mpz_class modulus)
    : frac_bits_(frac_bits), modulus_(std::move(modulus)) {
  if (frac_bits_ < kMinFracBits || frac_bits_ > kMaxFracBits)
    throw UsageError("frac_bits must lie in [" + std::to_string(kMinFracBits) + ", " +
                     std::to_string(kMaxFracBits) + "], got " + std::to_string(frac_bits_));
  if (modulus_ <= 2) throw UsageError("codec modulus must exceed 2");
  half_ = modulus_ / 2;
}

bool FixedPointCodec::fits(const mpz_class& s) const {
  mpz_class mag = abs(s);
  // |s| < n/2, written without division: 2|s| < n.
  return 2 * mag < modulus_;
}

mpz_class FixedPointCodec::quantize(double x, unsigned level) const {
  return fixedpoint::quantize(x, frac_bits_, level);
}

mpz_class FixedPointCodec::wrap(const mpz_class& s) const {
  if (!fits(s)) throw OverflowError("fixed-point magnitude reaches n/2");
  return s < 0 ? mpz_class(modulus_ + s) : s;
}

mpz_class FixedPointCodec::unwrap(const mpz_class& v) const {
  return v > half_ ? mpz_class(v - modulus_) : v;
}

mpz_class FixedPointCodec::encode(double x, unsigned level) const {
  return wrap(quantize(x, level));
}

double FixedPointCodec::to_real(const mpz_class& s, unsigned level) const {
  return dequantize(s, frac_bits_, level);
}

double FixedPointCodec::decode(const mpz_class& v, unsigned level) const {
  return to_real(unwrap(v), level);
}

mpz_class FixedPointCodec::rescale_plain(const mpz_class& v, unsigned from_level,
                                         unsigned to_level) const {
  if (to_level < from_level)
    throw ScaleMismatch("rescale_plain cannot lower the scale level (no division in Z_n)");
  mpz_class s = unwrap(v);
  s <<= frac_bits_ * (to_level - from_level);
  return wrap(s);
}

}  // namespace eegcrypt::fixedpoint

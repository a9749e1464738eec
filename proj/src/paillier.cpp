// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/paillier.hpp"

#include <random>
#include <string>

#include "eegcrypt/errors.hpp"

namespace eegcrypt::paillier {

namespace {

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

bool invert(mpz_class& out, const mpz_class& a, const mpz_class& mod) {
  return mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) != 0;
}

mpz_class gcd_of(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

mpz_class lcm_of(const mpz_class& a, const mpz_class& b) {
  mpz_class out;
  mpz_lcm(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

bool is_prime(const mpz_class& x) {
  return mpz_probab_prime_p(x.get_mpz_t(), kMillerRabinRounds) != 0;
}

// Random prime with exactly `bits` bits and the top two bits set, so the
// product of two such primes has exactly the sum of their bit lengths.
mpz_class random_prime(unsigned bits, RandomSource& rng) {
  const unsigned max_attempts = 200 * bits;
  for (unsigned attempt = 0; attempt < max_attempts; ++attempt) {
    mpz_class candidate = rng.bits(bits);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    if (is_prime(candidate)) return candidate;
  }
  throw CryptoError("prime generation did not converge after " +
                    std::to_string(max_attempts) + " candidates");
}

void check_ciphertext(const PublicKey& pk, const Ciphertext& c) {
  if (c.value <= 0 || c.value >= pk.n_squared || gcd_of(c.value, pk.n) != 1)
    throw MalformedCiphertext("ciphertext is not an element of Z*_{n^2}");
}

// Encoding of g^m mod n^2 for m already reduced into [0, n).
mpz_class generator_power(const PublicKey& pk, const mpz_class& m) {
  if (pk.uses_simple_generator()) {
    // (1 + n)^m = 1 + m n (mod n^2)
    mpz_class out = 1 + m * pk.n;
    if (out >= pk.n_squared) out %= pk.n_squared;
    return out;
  }
  return powm(pk.g, m, pk.n_squared);
}

}  // namespace

// --- RandomSource -----------------------------------------------------------

RandomSource::RandomSource() : state_(std::make_unique<gmp_randclass>(gmp_randinit_mt)) {}
RandomSource::RandomSource(RandomSource&&) noexcept = default;
RandomSource& RandomSource::operator=(RandomSource&&) noexcept = default;
RandomSource::~RandomSource() = default;

RandomSource RandomSource::from_seed(std::uint64_t seed) {
  RandomSource rng;
  mpz_class s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  rng.state_->seed(s);
  return rng;
}

RandomSource RandomSource::from_os_entropy() {
  RandomSource rng;
  std::random_device dev;
  mpz_class s = 0;
  for (int i = 0; i < 8; ++i) {
    s <<= 32;
    s += static_cast<unsigned long>(dev());
  }
  rng.state_->seed(s);
  return rng;
}

mpz_class RandomSource::bits(unsigned bits) { return state_->get_z_bits(bits); }

mpz_class RandomSource::below(const mpz_class& bound) { return state_->get_z_range(bound); }

std::uint64_t RandomSource::next_u64() {
  mpz_class v = state_->get_z_bits(64);
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, 1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

// --- keys --------------------------------------------------------------------

mpz_class L(const mpz_class& x, const mpz_class& n) {
  mpz_class out = x - 1;
  mpz_divexact(out.get_mpz_t(), out.get_mpz_t(), n.get_mpz_t());
  return out;
}

mpz_class mod_floor(const mpz_class& k, const mpz_class& m) {
  mpz_class out;
  mpz_fdiv_r(out.get_mpz_t(), k.get_mpz_t(), m.get_mpz_t());
  return out;
}

PrivateKey make_private_key(const PublicKey& pub, const mpz_class& p, const mpz_class& q) {
  if (p == q) throw CryptoError("p and q must be distinct");
  if (p * q != pub.n) throw CryptoError("p * q does not match the public modulus");

  PrivateKey sk;
  sk.pub = pub;
  sk.p = p;
  sk.q = q;
  sk.lambda = lcm_of(p - 1, q - 1);

  const mpz_class u = L(powm(pub.g, sk.lambda, pub.n_squared), pub.n);
  if (!invert(sk.mu, u, pub.n))
    throw CryptoError("generator fails gcd(L(g^lambda mod n^2), n) = 1");

  sk.p_squared = p * p;
  sk.q_squared = q * q;
  if (!invert(sk.hp, L(powm(pub.g, p - 1, sk.p_squared), p), p) ||
      !invert(sk.hq, L(powm(pub.g, q - 1, sk.q_squared), q), q) ||
      !invert(sk.q_inv_mod_p, q, p))
    throw CryptoError("CRT constants are not invertible for this key");
  return sk;
}

KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q, const mpz_class& g) {
  PublicKey pub;
  pub.n = p * q;
  pub.n_squared = pub.n * pub.n;
  pub.g = g == 0 ? mpz_class(pub.n + 1) : g;
  pub.bit_length = static_cast<unsigned>(mpz_sizeinbase(pub.n.get_mpz_t(), 2));
  if (pub.g <= 0 || pub.g >= pub.n_squared || gcd_of(pub.g, pub.n) != 1)
    throw CryptoError("generator is not an element of Z*_{n^2}");
  PrivateKey priv = make_private_key(pub, p, q);
  return {pub, std::move(priv)};
}

KeyPair keygen(unsigned bit_length, RandomSource& rng, GeneratorMode mode) {
  if (bit_length < kMinKeyBits)
    throw UsageError("key size must be at least " + std::to_string(kMinKeyBits) +
                     " bits, got " + std::to_string(bit_length));

  const unsigned p_bits = bit_length / 2;
  const unsigned q_bits = bit_length - p_bits;
  for (int attempt = 0; attempt < 64; ++attempt) {
    mpz_class p = random_prime(p_bits, rng);
    mpz_class q = random_prime(q_bits, rng);
    if (p == q) continue;
    const mpz_class n = p * q;
    if (gcd_of(n, (p - 1) * (q - 1)) != 1) continue;

    if (mode == GeneratorMode::simple) return keypair_from_primes(p, q);

    const mpz_class n_squared = n * n;
    const mpz_class lambda = lcm_of(p - 1, q - 1);
    for (int draw = 0; draw < 1000; ++draw) {
      mpz_class g = rng.below(n_squared);
      if (g == 0 || gcd_of(g, n) != 1) continue;
      if (gcd_of(L(powm(g, lambda, n_squared), n), n) != 1) continue;
      return keypair_from_primes(p, q, g);
    }
  }
  throw CryptoError("key generation did not converge");
}

bool validate(const PrivateKey& sk) {
  const PublicKey& pk = sk.pub;
  if (!is_prime(sk.p) || !is_prime(sk.q) || sk.p == sk.q) return false;
  if (sk.p * sk.q != pk.n || pk.n_squared != pk.n * pk.n) return false;
  if (mpz_sizeinbase(pk.n.get_mpz_t(), 2) != pk.bit_length) return false;
  if (pk.g <= 0 || pk.g >= pk.n_squared || gcd_of(pk.g, pk.n) != 1) return false;
  if (sk.lambda != lcm_of(sk.p - 1, sk.q - 1)) return false;
  const mpz_class u = L(powm(pk.g, sk.lambda, pk.n_squared), pk.n);
  if (gcd_of(u, pk.n) != 1) return false;
  return mod_floor(sk.mu * u, pk.n) == 1;
}

// --- encryption ----------------------------------------------------------------

Ciphertext encrypt_with_r(const PublicKey& pk, const mpz_class& m, const mpz_class& r) {
  if (m < 0 || m >= pk.n) throw RangeError("plaintext outside [0, n)");
  if (r <= 0 || r >= pk.n || gcd_of(r, pk.n) != 1)
    throw CryptoError("randomizer r must lie in Z*_n");
  mpz_class c = generator_power(pk, m) * powm(r, pk.n, pk.n_squared);
  c %= pk.n_squared;
  return {std::move(c), 0};
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, RandomSource& rng) {
  if (m < 0 || m >= pk.n) throw RangeError("plaintext outside [0, n)");
  mpz_class r;
  do {
    r = rng.below(pk.n);
  } while (r == 0 || gcd_of(r, pk.n) != 1);
  return encrypt_with_r(pk, m, r);
}

mpz_class decrypt_direct(const PrivateKey& sk, const Ciphertext& c) {
  const PublicKey& pk = sk.pub;
  check_ciphertext(pk, c);
  return mod_floor(L(powm(c.value, sk.lambda, pk.n_squared), pk.n) * sk.mu, pk.n);
}

mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c) {
  check_ciphertext(sk.pub, c);
  const mpz_class mp =
      mod_floor(L(powm(c.value, sk.p - 1, sk.p_squared), sk.p) * sk.hp, sk.p);
  const mpz_class mq =
      mod_floor(L(powm(c.value, sk.q - 1, sk.q_squared), sk.q) * sk.hq, sk.q);
  const mpz_class h = mod_floor((mp - mq) * sk.q_inv_mod_p, sk.p);
  return mq + h * sk.q;
}

// --- homomorphic operations -------------------------------------------------------

Ciphertext add_ct(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  if (a.level != b.level)
    throw ScaleMismatch("add_ct operands at levels " + std::to_string(a.level) + " and " +
                        std::to_string(b.level));
  mpz_class c = a.value * b.value;
  c %= pk.n_squared;
  return {std::move(c), a.level};
}

Ciphertext mul_plain(const PublicKey& pk, const Ciphertext& a, const mpz_class& k) {
  check_ciphertext(pk, a);
  const mpz_class e = mod_floor(k, pk.n);
  // Residues above n/2 stand for negative scalars; raising the inverse to the
  // small magnitude decrypts identically and is far cheaper.
  if (2 * e > pk.n) {
    mpz_class inv;
    invert(inv, a.value, pk.n_squared);
    return {powm(inv, pk.n - e, pk.n_squared), a.level};
  }
  return {powm(a.value, e, pk.n_squared), a.level};
}

Ciphertext add_plain(const PublicKey& pk, const Ciphertext& a, const mpz_class& k) {
  check_ciphertext(pk, a);
  mpz_class c = a.value * generator_power(pk, mod_floor(k, pk.n));
  c %= pk.n_squared;
  return {std::move(c), a.level};
}

}  // namespace eegcrypt::paillier

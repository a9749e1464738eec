// SPDX-License-Identifier: Apache-2.0
//
// Paillier additively homomorphic encryption over GMP integers.
//
// Plaintexts live in Z_n, ciphertexts in Z*_{n^2}. Keys and ciphertexts are
// immutable values; every operation is a pure function of its arguments plus
// an explicit RandomSource where randomness is needed.
#pragma once

#include <cstdint>
#include <memory>

#include <gmpxx.h>

namespace eegcrypt::paillier {

/// Seedable random source backed by GMP's Mersenne twister.
///
/// A fixed seed gives reproducible keys and ciphertexts (tests, the
/// --deterministic-crypto flag). from_os_entropy() seeds from
/// std::random_device and is the production default.
class RandomSource {
 public:
  static RandomSource from_seed(std::uint64_t seed);
  static RandomSource from_os_entropy();

  RandomSource(RandomSource&&) noexcept;
  RandomSource& operator=(RandomSource&&) noexcept;
  ~RandomSource();

  /// Uniform integer with exactly `bits` random bits.
  mpz_class bits(unsigned bits);
  /// Uniform integer in [0, bound).
  mpz_class below(const mpz_class& bound);
  std::uint64_t next_u64();

 private:
  RandomSource();
  std::unique_ptr<gmp_randclass> state_;
};

struct PublicKey {
  mpz_class n;
  mpz_class g;
  mpz_class n_squared;
  unsigned bit_length = 0;

  bool uses_simple_generator() const { return g == n + 1; }
};

struct PrivateKey {
  mpz_class lambda;
  mpz_class mu;
  mpz_class p;
  mpz_class q;
  PublicKey pub;

  // CRT decryption constants, derived from p, q and g.
  mpz_class p_squared, q_squared;
  mpz_class hp, hq;       // L_p(g^(p-1) mod p^2)^-1 mod p, likewise for q
  mpz_class q_inv_mod_p;  // q^-1 mod p
};

struct Ciphertext {
  mpz_class value;
  /// Fixed-point scale level of the underlying plaintext (0 for raw integers).
  unsigned level = 0;
};

struct KeyPair {
  PublicKey pub;
  PrivateKey priv;
};

enum class GeneratorMode { simple, random };

constexpr unsigned kMinKeyBits = 64;
constexpr unsigned kDefaultKeyBits = 2048;
constexpr int kMillerRabinRounds = 40;

/// L(x) = (x - 1) / n.
mpz_class L(const mpz_class& x, const mpz_class& n);

/// Generates a key pair with an n of exactly `bit_length` bits.
/// Throws UsageError for bit_length < 64 and CryptoError if prime search
/// does not converge.
KeyPair keygen(unsigned bit_length, RandomSource& rng,
               GeneratorMode mode = GeneratorMode::simple);

/// Builds keys from known primes. `g` of 0 selects g = n + 1.
/// Accepts any distinct primes, including toy sizes used by tests.
KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q,
                            const mpz_class& g = 0);

/// Recomputes a private key from (p, q, g) and checks lambda/mu agree.
PrivateKey make_private_key(const PublicKey& pub, const mpz_class& p,
                            const mpz_class& q);

/// True when every key invariant holds (primality, lambda, mu, g range).
bool validate(const PrivateKey& sk);

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m, RandomSource& rng);
/// Encryption with a caller-chosen r in Z*_n.
Ciphertext encrypt_with_r(const PublicKey& pk, const mpz_class& m,
                          const mpz_class& r);

/// CRT-accelerated decryption.
mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c);
/// m = L(c^lambda mod n^2) * mu mod n, computed directly.
mpz_class decrypt_direct(const PrivateKey& sk, const Ciphertext& c);

Ciphertext add_ct(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);
Ciphertext mul_plain(const PublicKey& pk, const Ciphertext& a, const mpz_class& k);
Ciphertext add_plain(const PublicKey& pk, const Ciphertext& a, const mpz_class& k);

/// Non-negative residue of k modulo m.
mpz_class mod_floor(const mpz_class& k, const mpz_class& m);

}  // namespace eegcrypt::paillier

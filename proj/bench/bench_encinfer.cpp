// SPDX-License-Identifier: Apache-2.0
//
// Serial reference vs. OpenMP kernels for encrypted inference, plus CRT vs.
// direct decryption. Usage: bench_encinfer [samples] [workers] [bits]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include <omp.h>

#include "eegcrypt/encinfer.hpp"
#include "eegcrypt/network.hpp"

using namespace eegcrypt;
using clock_type = std::chrono::steady_clock;

template <class F>
double seconds(F&& f) {
  const auto t0 = clock_type::now();
  f();
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int main(int argc, char** argv) {
  const std::size_t samples = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 16;
  const int workers = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();
  const unsigned bits = argc > 3 ? unsigned(std::strtoul(argv[3], nullptr, 10)) : 1024;

  auto rng = paillier::RandomSource::from_seed(1);
  const auto keys = paillier::keygen(bits, rng);
  const auto model = network::export_model(
      network::init_model(44, 20, 4, network::Activation::linear_approx, 1), 10);
  const fixedpoint::FixedPointCodec codec(10, keys.pub.n);

  Matrix x(samples, 44);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : x.data) v = u(gen);
  std::vector<std::uint64_t> seeds(samples);
  for (auto& s : seeds) s = gen();

  std::printf("%zu samples, 44-20-4, %u-bit key, %d workers (%d hardware threads)\n", samples, bits,
              workers, omp_get_num_procs());

  std::vector<encinfer::EncryptedVector> enc;
  const double enc_serial = seconds([&] { enc = encinfer::encrypt_batch(keys.pub, codec, x, seeds, 1); });
  const double enc_par = seconds([&] { enc = encinfer::encrypt_batch(keys.pub, codec, x, seeds, workers); });

  std::vector<encinfer::EncryptedVector> ref;
  const double fwd_serial = seconds([&] {
    for (const auto& v : enc) ref.push_back(encinfer::enc_forward(keys.pub, model, v));
  });
  std::vector<encinfer::EncryptedVector> par;
  const double fwd_par = seconds([&] { par = encinfer::enc_forward_batch(keys.pub, model, enc, workers); });
  bool same = ref.size() == par.size();
  for (std::size_t s = 0; same && s < ref.size(); ++s)
    for (std::size_t k = 0; k < ref[s].width(); ++k) same &= ref[s].cts[k].value == par[s].cts[k].value;

  mpz_class sink = 0;
  const double dec_crt = seconds([&] {
    for (const auto& l : par)
      for (const auto& c : l.cts) sink += paillier::decrypt(keys.priv, c);
  });
  const double dec_direct = seconds([&] {
    for (const auto& l : par)
      for (const auto& c : l.cts) sink -= paillier::decrypt_direct(keys.priv, c);
  });

  std::printf("%-22s %12s %12s %9s\n", "kernel", "serial (s)", "parallel (s)", "speedup");
  std::printf("%-22s %12.4f %12.4f %8.2fx\n", "encrypt", enc_serial, enc_par, enc_serial / enc_par);
  std::printf("%-22s %12.4f %12.4f %8.2fx\n", "forward", fwd_serial, fwd_par, fwd_serial / fwd_par);
  std::printf("%-22s %12s %12s %9s\n", "", "direct (s)", "CRT (s)", "");
  std::printf("%-22s %12.4f %12.4f %8.2fx\n", "decrypt", dec_direct, dec_crt, dec_direct / dec_crt);
  std::printf("outputs identical: %s\n", same && sink == 0 ? "yes" : "NO");
  return same && sink == 0 ? 0 : 1;
}

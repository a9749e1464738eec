// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Measured numbers are printed next to each verdict.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "eegcrypt/data.hpp"
#include "eegcrypt/encinfer.hpp"
#include "eegcrypt/eval.hpp"
#include "eegcrypt/io.hpp"
#include "eegcrypt/network.hpp"
#include "eegcrypt/paillier.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace eegcrypt;
using paillier::RandomSource;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const paillier::KeyPair& key512() {
  static const paillier::KeyPair k = [] {
    auto rng = RandomSource::from_seed(0xAC);
    return paillier::keygen(512, rng);
  }();
  return k;
}

Verdict ac1_homomorphism() {
  const auto t0 = std::chrono::steady_clock::now();
  auto rng = RandomSource::from_seed(1);
  const auto& k = key512();
  const mpz_class& n = k.pub.n;
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const mpz_class a = rng.below(n), b = rng.below(n);
    const mpz_class s = rng.below(n) - n / 2;  // signed scalar over the full range
    const auto ca = paillier::encrypt(k.pub, a, rng);
    const auto cb = paillier::encrypt(k.pub, b, rng);
    failures += paillier::decrypt(k.priv, paillier::add_ct(k.pub, ca, cb)) != paillier::mod_floor(a + b, n);
    failures += paillier::decrypt(k.priv, paillier::mul_plain(k.pub, ca, s)) != paillier::mod_floor(s * a, n);
  }
  const double secs = elapsed(t0);
  return {failures == 0 && secs < 60.0,
          fmt("1000 pairs, 512-bit key: %d failures, %.2f s", failures, secs)};
}

Verdict ac2_activation() {
  const int points = 10000;
  double worst = 0.0;
  double sz = 0, ss = 0, szz = 0, szs = 0;
  for (int i = 0; i < points; ++i) {
    const double z = -1.0 + 2.0 * i / (points - 1);
    const double s = network::sigmoid(z);
    worst = std::max(worst, std::abs(network::kApproxSlope * z + network::kApproxIntercept - s));
    sz += z, ss += s, szz += z * z, szs += z * s;
  }
  // Ordinary least squares of sigmoid on z over the same grid.
  const double slope = (points * szs - sz * ss) / (points * szz - sz * sz);
  const double intercept = (ss - slope * sz) / points;
  const bool ok = worst <= 0.007 && std::abs(slope - 0.238) <= 0.002 && std::abs(intercept - 0.5) <= 0.001;
  return {ok, fmt("max error %.6f (bound 0.007); refit slope %.6f, intercept %.6f", worst, slope,
                  intercept)};
}

network::NetworkModel trained_44_20_4() {
  auto [ds, stats] = data::normalize(data::make_blobs(4000, 44, 4, 0.4, 31));
  network::TrainConfig cfg;
  cfg.iters_num = 3000;
  cfg.seed = 32;
  return network::train(network::init_model(44, 20, 4, network::Activation::linear_approx, 33), ds, cfg)
      .model;
}

Verdict ac3_exactness() {
  const auto& k = key512();
  const auto model = trained_44_20_4();
  const auto q = network::export_model(model, 10);
  encinfer::audit(q, k.pub);
  const fixedpoint::FixedPointCodec codec(10, k.pub.n);
  auto rng = RandomSource::from_seed(3);
  const auto samples = data::normalize(data::make_blobs(250, 44, 4, 0.4, 34)).first;

  const double margin = 2.0 * 10.0 * std::ldexp(1.0, -10);  // twice the per-logit quantization bound
  std::size_t exact = 0, eligible = 0, agree = 0;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto x = samples.features.row(s);
    const auto logits = encinfer::enc_forward(k.pub, q, encinfer::encrypt_sample(k.pub, codec, x, rng));
    std::vector<mpz_class> input;
    for (double v : x) input.push_back(oracles::scale_round(v, 10));
    const auto expect = oracles::quantized_forward(q, input);
    bool same = true;
    for (std::size_t j = 0; j < logits.width(); ++j)
      same &= codec.unwrap(paillier::decrypt(k.priv, logits.cts[j])) == expect[j];
    exact += same;

    const auto real = network::forward(model, x).logits;
    auto sorted = real;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] > margin) {
      ++eligible;
      agree += encinfer::decrypt_logits(k.priv, codec, logits).predicted_class ==
               network::argmax_label(real);
    }
  }
  const bool ok = exact == samples.size() && samples.size() >= 200 && eligible > 0 && agree == eligible;
  return {ok, fmt("44-20-4, f=10: %zu/%zu samples exact; argmax agreement %zu/%zu above margin %.4f",
                  exact, samples.size(), agree, eligible, margin)};
}

Verdict ac4_schedule() {
  network::TrainConfig cfg;
  cfg.batch_size = 100;
  const double eta0 = network::lr_schedule(cfg, 10240, 0);
  std::size_t first_below = 0;
  bool clamped = true;
  for (std::size_t e = 0; e <= 1000; ++e) {
    const double raw = cfg.eta0 / (1.0 + 20.0 * double(e) / 102.4);
    const double eta = network::lr_schedule(cfg, 10240, e);
    if (!first_below && raw < 0.011) first_below = e;
    if (first_below && eta != 0.01) clamped = false;
  }
  const bool ok = eta0 == 0.2 && first_below > 0 && first_below <= 100 && clamped;
  return {ok, fmt("eta(0)=%g (exactly 0.2: %s); raw schedule below 0.011 from epoch %zu; clamped to 0.01 after: %s",
                  eta0, eta0 == 0.2 ? "yes" : "no", first_below, clamped ? "yes" : "no")};
}

Verdict ac5_gradients() {
  double worst = 0.0;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto act : {network::Activation::sigmoid, network::Activation::linear_approx}) {
    auto m = network::init_model(4, 2, 3, act, 55);
    for (double& b : m.b1) b = u(gen) - 0.5;
    for (double& b : m.b2) b = u(gen) - 0.5;
    data::Dataset ds;
    ds.features = Matrix(8, 4);
    for (double& v : ds.features.data) v = u(gen);
    ds.labels = {1, 2, 3, 1, 2, 3, 1, 2};
    ds.channel_names = {"a", "b", "c", "d"};
    std::vector<std::size_t> rows(8);
    for (std::size_t i = 0; i < 8; ++i) rows[i] = i;

    const auto g = network::backprop(m, ds, rows);
    std::vector<double> analytic;
    for (const auto* v : {&g.W1.data, &g.b1, &g.W2.data, &g.b2})
      analytic.insert(analytic.end(), v->begin(), v->end());
    const auto numeric = oracles::finite_difference_gradient(m, ds, rows);
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
  }
  return {worst <= 1e-4, fmt("4-2-3, both modes: worst relative error %.3g", worst)};
}

Verdict ac6_metrics() {
  const auto cm = eval::from_counts(4, {620, 65, 4, 13, 10, 578, 64, 3, 7, 51, 661, 11, 17, 21, 31, 644});
  const auto m = eval::metrics(cm);
  const double P[] = {94.80, 80.83, 86.98, 95.98}, R[] = {88.32, 88.24, 90.55, 90.32},
               F[] = {91.45, 84.38, 88.72, 93.06};
  double worst = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    worst = std::max(worst, std::abs(*m.per_class[c].precision * 100 - P[c]));
    worst = std::max(worst, std::abs(*m.per_class[c].recall * 100 - R[c]));
    worst = std::max(worst, std::abs(*m.per_class[c].f1 * 100 - F[c]));
  }
  worst = std::max({worst, std::abs(*m.mean_precision * 100 - 89.65),
                    std::abs(*m.mean_recall * 100 - 89.36), std::abs(*m.mean_f1 * 100 - 89.40)});
  return {worst <= 0.15, fmt("class 1: %.2f/%.2f/%.2f; worst deviation %.3f points",
                             *m.per_class[0].precision * 100, *m.per_class[0].recall * 100,
                             *m.per_class[0].f1 * 100, worst)};
}

Verdict ac7_accuracy() {
  const auto blobs = data::make_blobs(12800, 44, 4, 0.45, 2024);
  const auto [train_raw, test_raw] = data::split(blobs, 0.8, 7);
  const auto [train_set, stats] = data::normalize(train_raw);
  const auto test_set = data::apply_normalization(stats, test_raw);
  network::TrainConfig cfg;  // 20000 iterations, batch 100, eta0 0.2
  double acc[2];
  int i = 0;
  for (auto act : {network::Activation::sigmoid, network::Activation::linear_approx}) {
    const auto r = network::train(network::init_model(44, 20, 4, act, 11), train_set, cfg);
    acc[i++] = network::accuracy(r.model, test_set);
  }
  const double gap = std::abs(acc[0] - acc[1]) * 100;
  return {acc[0] >= 0.90 && gap <= 2.0,
          fmt("12800 x 44 blobs, 10240/2560 split: sigmoid %.2f%%, linear_approx %.2f%%, gap %.2f points",
              acc[0] * 100, acc[1] * 100, gap)};
}

Verdict ac8_timing() {
  auto rng = RandomSource::from_seed(8);
  const auto keys = paillier::keygen(1024, rng);
  const auto q = network::export_model(trained_44_20_4(), 10);
  const auto samples = data::normalize(data::make_blobs(20, 44, 4, 0.4, 35)).first;
  const auto t = eval::bench(keys, q, samples, 20, rng);
  return {t.encode_encrypt.mean_seconds() > t.decrypt_decode.mean_seconds(),
          fmt("1024-bit key, 20 samples, per-sample means: encode+encrypt %.4f s, inference %.4f s, "
              "decrypt+decode %.4f s",
              t.encode_encrypt.mean_seconds(), t.inference.mean_seconds(),
              t.decrypt_decode.mean_seconds())};
}

int run(const fs::path& dir, const std::string& args) {
  const std::string cmd =
      "cd '" + dir.string() + "' && '" EEGCRYPT_CLI "' " + args + " >> acceptance.log 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Verdict ac9_key_separation() {
  const fs::path dir = EEGCRYPT_ACCEPT_TMP;
  fs::remove_all(dir);
  fs::create_directories(dir);
  if (run(dir, "synth --out data.csv --samples 500 --channels 10 --separation 0.8 --seed 1") ||
      run(dir, "keygen --keys-dir owner --bit-length 512") ||
      run(dir, "keygen --keys-dir other --bit-length 512") ||
      run(dir, "train --data data.csv --out model --channels-k 6 --hidden 5 --iters 500 --batch 50") ||
      run(dir, "encrypt --keys-dir owner --model model/model.json --data model/test.csv --out enc.jsonl"))
    return {false, "setup failed; see " + (dir / "acceptance.log").string()};

  // The evaluator's directory holds the public key and nothing else.
  fs::create_directories(dir / "evaluator");
  fs::copy_file(dir / "owner/public.key", dir / "evaluator/public.key");
  const bool no_private = !fs::exists(dir / "evaluator/private.key");
  const int predict_rc = run(dir, "predict --keys-dir evaluator --model model/model.json "
                                  "--data enc.jsonl --out logits.jsonl");
  const int owner_rc = run(dir, "decrypt --keys-dir owner --data logits.jsonl --out owner.csv");
  const int other_rc = run(dir, "decrypt --keys-dir other --data logits.jsonl --out other.csv");

  bool wrong_key_blocked = other_rc != 0;
  if (!wrong_key_blocked && owner_rc == 0)
    wrong_key_blocked = io::load_predictions(dir / "other.csv") != io::load_predictions(dir / "owner.csv");
  // Owner decryption matches the plaintext model on the same rows.
  bool owner_ok = false;
  if (owner_rc == 0) {
    const auto bundle = io::load_model(dir / "model/model.json");
    const auto stats = io::load_normalization(dir / "model/normalization.json");
    const auto test = data::apply_normalization(stats, data::load_csv(dir / "model/test.csv"));
    const auto pred = io::load_predictions(dir / "owner.csv");
    std::size_t same = 0;
    for (std::size_t r = 0; r < test.size(); ++r)
      same += pred[r] == network::predict(bundle.model, test.features.row(r));
    owner_ok = pred.size() == test.size() && same * 100 >= test.size() * 95;
  }
  const bool ok = no_private && predict_rc == 0 && owner_rc == 0 && owner_ok && wrong_key_blocked;
  return {ok, fmt("predict without private key: exit %d; owner decrypt: exit %d%s; wrong key: exit %d%s",
                  predict_rc, owner_rc, owner_ok ? " (matches plaintext model)" : "", other_rc,
                  wrong_key_blocked ? " (refused or mismatched)" : " (NOT blocked)")};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"AC1 homomorphism suite", ac1_homomorphism},
      {"AC2 activation approximation", ac2_activation},
      {"AC3 encrypted-inference exactness", ac3_exactness},
      {"AC4 learning-rate schedule", ac4_schedule},
      {"AC5 gradient correctness", ac5_gradients},
      {"AC6 metrics fidelity", ac6_metrics},
      {"AC7 synthetic accuracy analog", ac7_accuracy},
      {"AC8 timing shape", ac8_timing},
      {"AC9 key separation", ac9_key_separation},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
  return failed ? 1 : 0;
}

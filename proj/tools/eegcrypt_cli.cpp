// SPDX-License-Identifier: Apache-2.0
//
// eegcrypt: train on plaintext, classify encrypted samples.
//
//   offline   keygen, train
//   online    encrypt (data owner), predict (evaluator, public key only),
//             decrypt (key owner)
//   analysis  evaluate, bench, synth
//
// Exit codes: 0 ok, 1 internal, 2 usage, 3 data, 4 crypto.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eegcrypt/data.hpp"
#include "eegcrypt/encinfer.hpp"
#include "eegcrypt/errors.hpp"
#include "eegcrypt/eval.hpp"
#include "eegcrypt/io.hpp"
#include "eegcrypt/network.hpp"
#include "eegcrypt/paillier.hpp"

namespace fs = std::filesystem;
using namespace eegcrypt;

namespace {

constexpr int kExitInternal = 1, kExitUsage = 2, kExitData = 3, kExitCrypto = 4;

constexpr const char* kPublicKeyFile = "public.key";
constexpr const char* kPrivateKeyFile = "private.key";

struct Options {
  std::string keys_dir = "keys";
  std::string model;
  std::string data;
  std::string out;
  std::string predictions;
  std::string normalization;
  unsigned frac_bits = fixedpoint::kDefaultFracBits;
  bool frac_bits_set = false;
  unsigned bit_length = 2048;
  bool random_generator = false;
  std::size_t channels_k = 44;
  double train_fraction = 0.8;
  std::size_t hidden = 20;
  std::string activation = "linear_approx";
  std::size_t iters = 20000;
  std::size_t batch = 100;
  double eta0 = 0.2;
  std::uint64_t seed = 42;
  int workers = 1;
  bool deterministic_crypto = false;
  std::size_t samples = 100;
  std::size_t synth_channels = 64;
  int classes = 4;
  double separation = 0.4;
  std::size_t train_size = 0;
};

void say(const std::string& s) { std::cout << s << '\n'; }

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw UsageError(std::string("missing ") + what + " path");
  if (!fs::exists(p)) throw DataError(std::string(what) + " not found: " + p.string());
}

fs::path require_out(const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
  const fs::path p(out);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

// Crypto randomness is OS entropy unless --deterministic-crypto asks for the
// (insecure, reproducible) seeded stream.
paillier::RandomSource crypto_rng(const Options& o) {
  return o.deterministic_crypto ? paillier::RandomSource::from_seed(o.seed)
                                : paillier::RandomSource::from_os_entropy();
}

fs::path normalization_path(const Options& o) {
  if (!o.normalization.empty()) return o.normalization;
  return fs::path(o.model).parent_path() / "normalization.json";
}

// Loads a CSV and brings it into the model's channel order and scale.
data::Dataset prepared_samples(const Options& o, const io::ModelBundle& bundle) {
  require_file(o.data, "data CSV");
  const fs::path norm = normalization_path(o);
  require_file(norm, "normalization file");
  const auto stats = io::load_normalization(norm);
  data::Dataset ds = data::select_by_name(data::load_csv(o.data), bundle.channels);
  return data::apply_normalization(stats, ds);
}

io::ModelBundle load_bundle(const Options& o) {
  require_file(o.model, "model file");
  io::ModelBundle b = io::load_model(o.model);
  if (o.frac_bits_set && o.frac_bits != b.quantized.frac_bits)
    throw UsageError("--frac-bits " + std::to_string(o.frac_bits) + " does not match the model (" +
                     std::to_string(b.quantized.frac_bits) + ")");
  return b;
}

// --- subcommands -----------------------------------------------------------------

void cmd_keygen(const Options& o) {
  auto rng = crypto_rng(o);
  const auto mode =
      o.random_generator ? paillier::GeneratorMode::random : paillier::GeneratorMode::simple;
  const auto keys = paillier::keygen(o.bit_length, rng, mode);
  if (!paillier::validate(keys.priv)) throw CryptoError("generated key failed validation");
  const fs::path dir(o.keys_dir);
  fs::create_directories(dir);
  io::save_public_key(keys.pub, dir / kPublicKeyFile);
  io::save_private_key(keys.priv, dir / kPrivateKeyFile);
  say("wrote " + (dir / kPublicKeyFile).string() + " and " + (dir / kPrivateKeyFile).string() +
      " (" + std::to_string(keys.pub.bit_length) + "-bit n)");
}

void cmd_synth(const Options& o) {
  const auto ds = data::make_blobs(o.samples, o.synth_channels, o.classes, o.separation, o.seed);
  data::write_csv(ds, require_out(o.out));
  say("wrote " + std::to_string(ds.size()) + " samples x " + std::to_string(ds.channels()) +
      " channels to " + o.out);
}

void cmd_train(const Options& o) {
  require_file(o.data, "data CSV");
  if (o.out.empty()) throw UsageError("--out (model directory) is required");
  const fs::path dir(o.out);
  fs::create_directories(dir);

  const data::Dataset full = data::load_csv(o.data);
  const auto [selected, ranking] = data::select_channels(full, o.channels_k);
  const auto [train_raw, test_raw] = data::split(selected, o.train_fraction, o.seed);
  const auto [train_set, stats] = data::normalize(train_raw);
  const data::Dataset test_set = data::apply_normalization(stats, test_raw);

  const int n_o = full.max_label();
  const auto act = network::activation_from_string(o.activation);
  network::NetworkModel init = network::init_model(o.channels_k, o.hidden, std::size_t(n_o), act, o.seed);
  init.frac_bits = o.frac_bits;

  network::TrainConfig cfg;
  cfg.iters_num = o.iters;
  cfg.batch_size = o.batch;
  cfg.eta0 = o.eta0;
  cfg.seed = o.seed;
  const network::TrainResult result = network::train(init, train_set, cfg);

  io::ModelBundle bundle{result.model, network::export_model(result.model, o.frac_bits),
                         selected.channel_names};
  io::save_model(bundle, dir / "model.json");
  io::save_normalization(stats, selected.channel_names, dir / "normalization.json");
  io::save_ranking(ranking, dir / "ranking.json");
  io::save_history(result.history, dir / "history.csv");
  data::write_csv(test_raw, dir / "test.csv");

  char buf[160];
  std::snprintf(buf, sizeof buf, "train accuracy %.4f, test accuracy %.4f (%zu / %zu samples)",
                network::accuracy(result.model, train_set), network::accuracy(result.model, test_set),
                train_set.size(), test_set.size());
  say(buf);
  say("wrote model.json, normalization.json, ranking.json, history.csv, test.csv to " + dir.string());
}

void cmd_encrypt(const Options& o) {
  const fs::path pub_path = fs::path(o.keys_dir) / kPublicKeyFile;
  require_file(pub_path, "public key");
  const auto pk = io::load_public_key(pub_path);
  const io::ModelBundle bundle = load_bundle(o);
  const data::Dataset ds = prepared_samples(o, bundle);
  const fixedpoint::FixedPointCodec codec(bundle.quantized.frac_bits, pk.n);

  auto rng = crypto_rng(o);
  std::vector<std::uint64_t> seeds(ds.size());
  for (auto& s : seeds) s = rng.next_u64();
  const auto records = encinfer::encrypt_batch(pk, codec, ds.features, seeds, o.workers);
  io::save_encrypted(records, codec.frac_bits(), require_out(o.out));
  say("encrypted " + std::to_string(records.size()) + " samples to " + o.out);
}

// Reads the public key only; the private key file is never opened here.
void cmd_predict(const Options& o) {
  const fs::path pub_path = fs::path(o.keys_dir) / kPublicKeyFile;
  require_file(pub_path, "public key");
  const auto pk = io::load_public_key(pub_path);
  const io::ModelBundle bundle = load_bundle(o);
  encinfer::audit(bundle.quantized, pk);

  require_file(o.data, "ciphertext file");
  const io::EncryptedFile in = io::load_encrypted(o.data);
  if (in.frac_bits != bundle.quantized.frac_bits)
    throw UsageError("ciphertexts use frac_bits " + std::to_string(in.frac_bits) +
                     " but the model uses " + std::to_string(bundle.quantized.frac_bits));
  const auto logits = encinfer::enc_forward_batch(pk, bundle.quantized, in.records, o.workers);
  io::save_encrypted(logits, in.frac_bits, require_out(o.out));
  say("wrote encrypted logits for " + std::to_string(logits.size()) + " samples to " + o.out);
}

void cmd_decrypt(const Options& o) {
  const fs::path priv_path = fs::path(o.keys_dir) / kPrivateKeyFile;
  require_file(priv_path, "private key");
  const auto sk = io::load_private_key(priv_path);
  require_file(o.data, "logits file");
  const io::EncryptedFile in = io::load_encrypted(o.data);
  const fixedpoint::FixedPointCodec codec(in.frac_bits, sk.pub.n);

  std::vector<encinfer::Decision> decisions;
  for (std::size_t i = 0; i < in.records.size(); ++i) {
    try {
      decisions.push_back(encinfer::decrypt_logits(sk, codec, in.records[i]));
    } catch (const CryptoError& e) {
      throw CryptoError("record " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  io::save_predictions(decisions, require_out(o.out));
  say("wrote " + std::to_string(decisions.size()) + " predictions to " + o.out);
}

void cmd_evaluate(const Options& o) {
  require_file(o.data, "truth CSV");
  require_file(o.predictions, "predictions CSV");
  const data::Dataset truth = data::load_csv(o.data);
  const std::vector<int> pred = io::load_predictions(o.predictions);
  int k = truth.max_label();
  for (int p : pred) k = std::max(k, p);
  const auto cm = eval::confusion(truth.labels, pred, std::size_t(k));
  const auto m = eval::metrics(cm);

  std::cout << eval::format_confusion(cm) << '\n'
            << eval::format_heatmap(cm) << '\n'
            << eval::format_metrics(cm, m);
  const std::size_t wrong = cm.total() - std::size_t(std::llround(m.accuracy * double(cm.total())));
  char buf[160];
  if (o.train_size > 0) {
    const auto e = eval::error_rate(wrong, o.train_size, cm.total());
    std::snprintf(buf, sizeof buf,
                  "error rate: %.2f%% of test samples; %.2f%% relative to %zu training samples",
                  e.standard * 100, e.literal * 100, o.train_size);
  } else {
    std::snprintf(buf, sizeof buf, "error rate: %.2f%% of test samples",
                  100.0 * double(wrong) / double(cm.total()));
  }
  say(buf);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    fs::create_directories(dir);
    io::write_text(dir / "metrics.csv", eval::metrics_csv(cm, m));
    io::write_text(dir / "confusion.csv", eval::confusion_csv(cm));
  }
}

void cmd_bench(const Options& o) {
  const fs::path dir(o.keys_dir);
  require_file(dir / kPublicKeyFile, "public key");
  require_file(dir / kPrivateKeyFile, "private key");
  const paillier::KeyPair keys{io::load_public_key(dir / kPublicKeyFile),
                               io::load_private_key(dir / kPrivateKeyFile)};
  const io::ModelBundle bundle = load_bundle(o);
  encinfer::audit(bundle.quantized, keys.pub);
  const data::Dataset ds = prepared_samples(o, bundle);
  auto rng = crypto_rng(o);
  const auto report = eval::bench(keys, bundle.quantized, ds, o.samples, rng, o.workers);
  std::cout << eval::format_timing(report);
  if (!o.out.empty()) io::write_text(require_out(o.out), eval::timing_csv(report));
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::data: return kExitData;
    case ErrorKind::crypto: return kExitCrypto;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train on plaintext EEG features, classify Paillier-encrypted samples."};
  app.require_subcommand(1);
  Options o;

  auto seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Seed for all non-crypto randomness"); };
  auto crypto = [&](CLI::App* c) {
    seed(c);
    c->add_flag("--deterministic-crypto", o.deterministic_crypto,
                "Draw crypto randomness from --seed (reproducible, INSECURE; tests only)");
  };
  auto keys_dir = [&](CLI::App* c) {
    c->add_option("--keys-dir", o.keys_dir, "Directory holding public.key / private.key")
        ->capture_default_str();
  };
  auto workers = [&](CLI::App* c) {
    c->add_option("--workers", o.workers, "Parallel workers across samples")
        ->check(CLI::Range(1, 1024))
        ->capture_default_str();
  };
  auto frac_bits = [&](CLI::App* c) {
    c->add_option_function<unsigned>(
         "--frac-bits", [&](unsigned v) { o.frac_bits = v, o.frac_bits_set = true; },
         "Fixed-point fractional bits")
        ->check(CLI::Range(fixedpoint::kMinFracBits, fixedpoint::kMaxFracBits));
  };

  auto* keygen = app.add_subcommand("keygen", "Generate a Paillier key pair");
  keys_dir(keygen);
  keygen->add_option("--bit-length", o.bit_length, "Modulus size in bits")->capture_default_str();
  keygen->add_flag("--random-generator", o.random_generator, "Use a random g instead of n + 1");
  crypto(keygen);

  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-blob dataset");
  synth->add_option("--out", o.out, "Output CSV")->required();
  synth->add_option("--samples", o.samples, "Sample count")->capture_default_str();
  synth->add_option("--channels", o.synth_channels, "Feature count")->capture_default_str();
  synth->add_option("--classes", o.classes, "Class count")->capture_default_str();
  synth->add_option("--separation", o.separation, "Std-dev of class means")->capture_default_str();
  seed(synth);

  auto* train = app.add_subcommand("train", "Select channels, normalize, split, train and export");
  train->add_option("--data", o.data, "Labeled CSV")->required();
  train->add_option("--out", o.out, "Model directory")->required();
  train->add_option("--channels-k", o.channels_k, "Channels kept after ranking")->capture_default_str();
  train->add_option("--train-fraction", o.train_fraction)->capture_default_str();
  train->add_option("--hidden", o.hidden, "Hidden neurons")->capture_default_str();
  train->add_option("--activation", o.activation, "sigmoid or linear_approx")
      ->check(CLI::IsMember({"sigmoid", "linear_approx"}))
      ->capture_default_str();
  train->add_option("--iters", o.iters)->capture_default_str();
  train->add_option("--batch", o.batch)->capture_default_str();
  train->add_option("--eta0", o.eta0)->capture_default_str();
  frac_bits(train);
  seed(train);

  auto* encrypt = app.add_subcommand("encrypt", "Normalize and encrypt samples with the public key");
  keys_dir(encrypt);
  encrypt->add_option("--model", o.model, "model.json")->required();
  encrypt->add_option("--normalization", o.normalization,
                      "Normalization file (default: next to the model)");
  encrypt->add_option("--data", o.data, "CSV of samples")->required();
  encrypt->add_option("--out", o.out, "Ciphertext file (JSONL)")->required();
  frac_bits(encrypt);
  workers(encrypt);
  crypto(encrypt);

  auto* predict = app.add_subcommand("predict", "Run the network on ciphertexts (public key only)");
  keys_dir(predict);
  predict->add_option("--model", o.model, "model.json")->required();
  predict->add_option("--data", o.data, "Ciphertext file from encrypt")->required();
  predict->add_option("--out", o.out, "Encrypted logits file")->required();
  frac_bits(predict);
  workers(predict);

  auto* decrypt = app.add_subcommand("decrypt", "Decrypt logits into class predictions");
  keys_dir(decrypt);
  decrypt->add_option("--data", o.data, "Encrypted logits from predict")->required();
  decrypt->add_option("--out", o.out, "Predictions CSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Confusion matrix and per-class metrics");
  evaluate->add_option("--data", o.data, "CSV with true labels")->required();
  evaluate->add_option("--predictions", o.predictions, "Predictions CSV from decrypt")->required();
  evaluate->add_option("--out", o.out, "Directory for metrics.csv and confusion.csv");
  evaluate->add_option("--train-size", o.train_size,
                       "Also report misclassifications relative to this training-set size");

  auto* bench = app.add_subcommand("bench", "Time encrypt, inference and decrypt per sample");
  keys_dir(bench);
  bench->add_option("--model", o.model, "model.json")->required();
  bench->add_option("--normalization", o.normalization);
  bench->add_option("--data", o.data, "CSV of samples")->required();
  bench->add_option("--samples", o.samples, "Samples to time")->capture_default_str();
  bench->add_option("--out", o.out, "Timing CSV");
  workers(bench);
  crypto(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*keygen) cmd_keygen(o);
    else if (*synth) cmd_synth(o);
    else if (*train) cmd_train(o);
    else if (*encrypt) cmd_encrypt(o);
    else if (*predict) cmd_predict(o);
    else if (*decrypt) cmd_decrypt(o);
    else if (*evaluate) cmd_evaluate(o);
    else if (*bench) cmd_bench(o);
  } catch (const Error& e) {
    std::cerr << "eegcrypt: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "eegcrypt: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return 0;
}

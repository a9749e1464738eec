// SPDX-License-Identifier: Apache-2.0
#include "eegcrypt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eegcrypt/errors.hpp"

namespace eegcrypt::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPublicKind = "paillier-public";
constexpr const char* kPrivateKind = "paillier-private";

std::string hex(const mpz_class& v) { return v.get_str(16); }

mpz_class parse_int(const std::string& s, int base, const std::string& what) {
  mpz_class v;
  if (s.empty() || v.set_str(s, base) != 0) throw DataError("invalid integer in " + what);
  return v;
}

std::string decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("invalid real number in " + what);
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void check_version(const json& doc, const std::string& where) {
  if (!doc.contains("version") || doc["version"] != kFormatVersion)
    throw DataError(where + ": unsupported or missing format version");
}

json public_fields(const paillier::PublicKey& pk) {
  return {{"version", kFormatVersion},
          {"kind", kPublicKind},
          {"bit_length", pk.bit_length},
          {"n", hex(pk.n)},
          {"g", hex(pk.g)}};
}

paillier::PublicKey public_from(const json& doc, const std::string& where) {
  paillier::PublicKey pk;
  pk.n = parse_int(doc.at("n").get<std::string>(), 16, where);
  pk.g = parse_int(doc.at("g").get<std::string>(), 16, where);
  pk.n_squared = pk.n * pk.n;
  pk.bit_length = doc.at("bit_length").get<unsigned>();
  if (pk.n <= 1 || mpz_sizeinbase(pk.n.get_mpz_t(), 2) != pk.bit_length)
    throw DataError(where + ": bit_length does not match n");
  return pk;
}

json int_array(const std::vector<mpz_class>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(x.get_str(10));
  return out;
}

std::vector<mpz_class> int_vector(const json& arr, const std::string& what) {
  std::vector<mpz_class> out;
  for (const auto& x : arr) out.push_back(parse_int(x.get<std::string>(), 10, what));
  return out;
}

json real_array(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(decimal(x));
  return out;
}

std::vector<double> real_vector(const json& arr, const std::string& what) {
  std::vector<double> out;
  for (const auto& x : arr) out.push_back(parse_double(x.get<std::string>(), what));
  return out;
}

json quantized_entry(const std::vector<mpz_class>& v, unsigned level) {
  return {{"level", level}, {"values", int_array(v)}};
}

std::vector<mpz_class> quantized_field(const json& q, const char* name, unsigned level,
                                       std::size_t size) {
  const json& entry = q.at(name);
  if (entry.at("level").get<unsigned>() != level)
    throw DataError(std::string("model: quantized ") + name + " has the wrong scale level");
  auto out = int_vector(entry.at("values"), std::string("model quantized ") + name);
  if (out.size() != size) throw DataError(std::string("model: quantized ") + name + " has the wrong size");
  return out;
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

// --- keys ----------------------------------------------------------------------

void save_public_key(const paillier::PublicKey& pk, const fs::path& path) {
  write_json(path, public_fields(pk));
}

void save_private_key(const paillier::PrivateKey& sk, const fs::path& path) {
  json doc = public_fields(sk.pub);
  doc["kind"] = kPrivateKind;
  doc["lambda"] = hex(sk.lambda);
  doc["mu"] = hex(sk.mu);
  doc["p"] = hex(sk.p);
  doc["q"] = hex(sk.q);
  {
    std::ofstream touch(path, std::ios::trunc);
    if (!touch) throw DataError("cannot write " + path.string());
  }
  std::error_code ec;
  fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace,
                  ec);
  write_json(path, doc);
}

paillier::PublicKey load_public_key(const fs::path& path) {
  const json doc = read_json(path);
  const std::string where = path.string();
  check_version(doc, where);
  const std::string kind = doc.value("kind", "");
  if (kind == kPrivateKind)
    throw UsageError(where + " is a private key; the evaluation side only accepts public keys");
  if (kind != kPublicKind) throw DataError(where + " is not a Paillier public key");
  try {
    return public_from(doc, where);
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
}

paillier::PrivateKey load_private_key(const fs::path& path) {
  const json doc = read_json(path);
  const std::string where = path.string();
  check_version(doc, where);
  if (doc.value("kind", "") != kPrivateKind) throw DataError(where + " is not a Paillier private key");
  try {
    const paillier::PublicKey pk = public_from(doc, where);
    const mpz_class p = parse_int(doc.at("p").get<std::string>(), 16, where);
    const mpz_class q = parse_int(doc.at("q").get<std::string>(), 16, where);
    paillier::PrivateKey sk = paillier::make_private_key(pk, p, q);
    if (sk.lambda != parse_int(doc.at("lambda").get<std::string>(), 16, where) ||
        sk.mu != parse_int(doc.at("mu").get<std::string>(), 16, where))
      throw CryptoError(where + ": stored lambda/mu do not match p, q and g");
    return sk;
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
}

// --- model -------------------------------------------------------------------------

void save_model(const ModelBundle& b, const fs::path& path) {
  const auto& m = b.model;
  const auto& q = b.quantized;
  json doc = {
      {"version", kFormatVersion},
      {"kind", "eegcrypt-model"},
      {"dims", {{"n_i", m.n_i}, {"n_d", m.n_d}, {"n_o", m.n_o}}},
      {"activation_mode", network::to_string(m.activation)},
      {"frac_bits", q.frac_bits},
      {"channels", b.channels},
      {"weights",
       {{"W1", real_array(m.W1.data)},
        {"b1", real_array(m.b1)},
        {"W2", real_array(m.W2.data)},
        {"b2", real_array(m.b2)}}},
      {"quantized",
       {{"W1", quantized_entry(q.W1, encinfer::kWeightLevel)},
        {"b1", quantized_entry(q.b1, encinfer::kHiddenBiasLevel)},
        {"act_slope", quantized_entry({q.act_slope}, encinfer::kSlopeLevel)},
        {"act_intercept", quantized_entry({q.act_intercept}, encinfer::kInterceptLevel)},
        {"W2", quantized_entry(q.W2, encinfer::kWeightLevel)},
        {"b2", quantized_entry(q.b2, encinfer::kOutputBiasLevel)}}},
  };
  write_json(path, doc);
}

ModelBundle load_model(const fs::path& path) {
  const json doc = read_json(path);
  const std::string where = path.string();
  check_version(doc, where);
  try {
    ModelBundle b;
    const json& dims = doc.at("dims");
    const auto n_i = dims.at("n_i").get<std::size_t>();
    const auto n_d = dims.at("n_d").get<std::size_t>();
    const auto n_o = dims.at("n_o").get<std::size_t>();
    b.model = network::zero_model(
        n_i, n_d, n_o, network::activation_from_string(doc.at("activation_mode").get<std::string>()));
    b.model.frac_bits = doc.at("frac_bits").get<unsigned>();
    b.channels = doc.at("channels").get<std::vector<std::string>>();
    if (b.channels.size() != n_i) throw DataError(where + ": channel list does not match n_i");

    const json& w = doc.at("weights");
    b.model.W1.data = real_vector(w.at("W1"), where);
    b.model.b1 = real_vector(w.at("b1"), where);
    b.model.W2.data = real_vector(w.at("W2"), where);
    b.model.b2 = real_vector(w.at("b2"), where);
    if (b.model.W1.data.size() != n_i * n_d || b.model.b1.size() != n_d ||
        b.model.W2.data.size() != n_d * n_o || b.model.b2.size() != n_o)
      throw DataError(where + ": weight sizes do not match dims");

    const json& q = doc.at("quantized");
    auto& qm = b.quantized;
    qm.n_i = n_i;
    qm.n_d = n_d;
    qm.n_o = n_o;
    qm.frac_bits = b.model.frac_bits;
    qm.W1 = quantized_field(q, "W1", encinfer::kWeightLevel, n_i * n_d);
    qm.b1 = quantized_field(q, "b1", encinfer::kHiddenBiasLevel, n_d);
    qm.act_slope = quantized_field(q, "act_slope", encinfer::kSlopeLevel, 1)[0];
    qm.act_intercept = quantized_field(q, "act_intercept", encinfer::kInterceptLevel, 1)[0];
    qm.W2 = quantized_field(q, "W2", encinfer::kWeightLevel, n_d * n_o);
    qm.b2 = quantized_field(q, "b2", encinfer::kOutputBiasLevel, n_o);
    return b;
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
}

// --- preprocessing artifacts -----------------------------------------------------------

void save_normalization(const data::NormalizationStats& stats,
                        const std::vector<std::string>& channels, const fs::path& path) {
  write_json(path, {{"version", kFormatVersion},
                    {"kind", "minmax-normalization"},
                    {"channels", channels},
                    {"min", real_array(stats.min)},
                    {"max", real_array(stats.max)}});
}

data::NormalizationStats load_normalization(const fs::path& path) {
  const json doc = read_json(path);
  const std::string where = path.string();
  check_version(doc, where);
  try {
    data::NormalizationStats stats;
    stats.min = real_vector(doc.at("min"), where);
    stats.max = real_vector(doc.at("max"), where);
    if (stats.min.size() != stats.max.size()) throw DataError(where + ": min/max size mismatch");
    return stats;
  } catch (const json::exception& e) {
    throw DataError(where + ": " + e.what());
  }
}

void save_ranking(const data::ChannelRanking& ranking, const fs::path& path) {
  json channels = json::array();
  for (const auto& c : ranking.channels) {
    json entry = {{"name", c.name}, {"index", c.index}, {"rank", c.rank}};
    entry["r"] = c.r ? json(decimal(*c.r)) : json(nullptr);
    channels.push_back(entry);
  }
  write_json(path, {{"version", kFormatVersion}, {"kind", "channel-ranking"}, {"channels", channels}});
}

void save_history(const std::vector<network::EpochRecord>& history, const fs::path& path) {
  std::ostringstream out;
  out << "epoch,eta,loss,train_acc,excursions\n";
  for (const auto& h : history) {
    out << h.epoch << ',' << decimal(h.eta) << ',' << decimal(h.loss) << ','
        << decimal(h.train_acc) << ',' << h.excursions << '\n';
  }
  write_text(path, out.str());
}

// --- ciphertext records ---------------------------------------------------------------------

void save_encrypted(const std::vector<encinfer::EncryptedVector>& records, unsigned frac_bits,
                    const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) {
    json values = json::array();
    for (const auto& c : r.cts) values.push_back(hex(c.value));
    json rec = {{"version", kFormatVersion},
                {"scale_level", r.level},
                {"frac_bits", frac_bits},
                {"width", r.width()},
                {"values", values}};
    out << rec.dump() << '\n';
  }
}

EncryptedFile load_encrypted(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  EncryptedFile file;
  std::string line;
  std::size_t record_no = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++record_no;
    const std::string where = path.string() + ": record " + std::to_string(record_no);
    try {
      const json rec = json::parse(line);
      check_version(rec, where);
      encinfer::EncryptedVector v;
      v.level = rec.at("scale_level").get<unsigned>();
      const auto frac_bits = rec.at("frac_bits").get<unsigned>();
      if (record_no == 1) file.frac_bits = frac_bits;
      if (frac_bits != file.frac_bits) throw DataError(where + ": frac_bits differs from record 1");
      for (const auto& x : rec.at("values"))
        v.cts.push_back({parse_int(x.get<std::string>(), 16, where), v.level});
      if (v.width() != rec.at("width").get<std::size_t>())
        throw DataError(where + ": width does not match value count");
      file.records.push_back(std::move(v));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return file;
}

void save_predictions(const std::vector<encinfer::Decision>& decisions, const fs::path& path) {
  std::ostringstream out;
  out << "sample,predicted";
  const std::size_t k = decisions.empty() ? 0 : decisions.front().logits.size();
  for (std::size_t c = 0; c < k; ++c) out << ",logit_" << c + 1;
  out << '\n';
  for (std::size_t s = 0; s < decisions.size(); ++s) {
    out << s + 1 << ',' << decisions[s].predicted_class;
    for (double z : decisions[s].logits) out << ',' << decimal(z);
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<int> load_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("sample,predicted", 0) != 0)
    throw DataError(path.string() + ": missing predictions header");
  std::vector<int> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string sample, predicted;
    if (!std::getline(row, sample, ',') || !std::getline(row, predicted, ','))
      throw DataError(path.string() + ": row " + std::to_string(line_no) + " is malformed");
    try {
      out.push_back(std::stoi(predicted));
    } catch (const std::exception&) {
      throw DataError(path.string() + ": row " + std::to_string(line_no) +
                      " has a non-integer prediction");
    }
  }
  return out;
}

}  // namespace eegcrypt::io

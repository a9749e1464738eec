// SPDX-License-Identifier: Apache-2.0
//
// On-disk formats. Every document carries a "version" field; big integers
// in key and ciphertext files are lowercase hex, quantized weights are signed
// decimal.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegcrypt/data.hpp"
#include "eegcrypt/encinfer.hpp"
#include "eegcrypt/network.hpp"
#include "eegcrypt/paillier.hpp"

namespace eegcrypt::io {

inline constexpr int kFormatVersion = 1;

void save_public_key(const paillier::PublicKey& pk, const std::filesystem::path& path);
/// Writes with owner-only permissions.
void save_private_key(const paillier::PrivateKey& sk, const std::filesystem::path& path);
/// Refuses private key documents.
paillier::PublicKey load_public_key(const std::filesystem::path& path);
paillier::PrivateKey load_private_key(const std::filesystem::path& path);

struct ModelBundle {
  network::NetworkModel model;
  encinfer::QuantizedModel quantized;
  std::vector<std::string> channels;  // input channel names in model order
};

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

void save_normalization(const data::NormalizationStats& stats,
                        const std::vector<std::string>& channels,
                        const std::filesystem::path& path);
data::NormalizationStats load_normalization(const std::filesystem::path& path);

void save_ranking(const data::ChannelRanking& ranking, const std::filesystem::path& path);

void save_history(const std::vector<network::EpochRecord>& history,
                  const std::filesystem::path& path);

/// One JSON record per line: {version, scale_level, frac_bits, width, values}.
void save_encrypted(const std::vector<encinfer::EncryptedVector>& records, unsigned frac_bits,
                    const std::filesystem::path& path);

struct EncryptedFile {
  std::vector<encinfer::EncryptedVector> records;
  unsigned frac_bits = 0;
};

/// Errors name the 1-based record (line) number.
EncryptedFile load_encrypted(const std::filesystem::path& path);

/// sample,predicted,logit_1..logit_k
void save_predictions(const std::vector<encinfer::Decision>& decisions,
                      const std::filesystem::path& path);
std::vector<int> load_predictions(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace eegcrypt::io

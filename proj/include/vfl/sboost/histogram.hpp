#pragma once

#include "vfl/he/paillier.hpp"
#include "vfl/sboost/binning.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace vfl::sboost {

// Per-bin ciphertext sums of the node's layout-encoded gradients, computed by
// the passive party without decrypting. Counts travel with the sums.
struct EncryptedHistogram {
  std::size_t feature = 0;
  std::vector<he::Ciphertext> g;
  std::vector<he::Ciphertext> h;
  std::vector<std::uint64_t> count;
};

// Plaintext per-bin sums in quantized units.
struct FeatureHistogram {
  std::vector<std::int64_t> g;
  std::vector<std::int64_t> h;
  std::vector<std::uint64_t> count;
};

// Throws std::invalid_argument when a bin count exceeds max_count.
EncryptedHistogram aggregate_encrypted(const he::PublicKey& pk, std::span<const he::Ciphertext> enc_g,
                                       std::span<const he::Ciphertext> enc_h, const BinPartition& partition,
                                       std::span<const std::size_t> members, std::uint64_t max_count);

// All features of one node. The OpenMP version splits work by feature; the
// serial one is the reference.
std::vector<EncryptedHistogram> aggregate_features(const he::PublicKey& pk, std::span<const he::Ciphertext> enc_g,
                                                   std::span<const he::Ciphertext> enc_h,
                                                   std::span<const BinPartition> partitions,
                                                   std::span<const std::size_t> members, std::uint64_t max_count);
std::vector<EncryptedHistogram> aggregate_features_serial(const he::PublicKey& pk,
                                                          std::span<const he::Ciphertext> enc_g,
                                                          std::span<const he::Ciphertext> enc_h,
                                                          std::span<const BinPartition> partitions,
                                                          std::span<const std::size_t> members,
                                                          std::uint64_t max_count);

FeatureHistogram plain_histogram(std::span<const std::int64_t> g_units, std::span<const std::int64_t> h_units,
                                 const BinPartition& partition, std::span<const std::size_t> members);

}  // namespace vfl::sboost

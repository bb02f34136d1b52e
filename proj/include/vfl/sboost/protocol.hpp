#pragma once

#include "vfl/common/dataset.hpp"
#include "vfl/he/codec.hpp"
#include "vfl/he/paillier.hpp"
#include "vfl/sboost/tree.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace vfl::sboost {

struct BoostConfig {
  int trees = 1;
  int max_depth = 3;
  int bins = 32;
  double lambda = 1.0;
  double gamma = 0.0;
  double shrinkage = 0.3;
  int min_samples = 2;
  Objective objective = Objective::kLogistic;
  int key_bits = 2048;
  std::uint64_t seed = 0;
  he::CodecParams codec = he::CodecParams::layout_default();

  // Throws ConfigError.
  void validate(std::size_t n_samples) const;
  SplitParams split_params() const { return {lambda, gamma, codec.frac_bits}; }
};

// Low-region content A places under each sample's g and h for one tree.
// Empty vectors mean zero padding.
struct MagicAssignment {
  int target_tree = 0;
  std::vector<mpz_class> g_magic;
  std::vector<mpz_class> h_magic;
};

// One decrypted bin sum as A sees it.
struct BinSums {
  mpz_class g_units;
  mpz_class h_units;
  mpz_class g_low;  // low 960 bits of the decrypted g sum
  mpz_class h_low;
  std::uint64_t count = 0;
};

// A's view of one node whose passive histograms were computed.
struct NodeView {
  int tree = 0;
  int node = 0;
  int depth = 0;
  std::vector<std::size_t> members;             // instance space, known to A
  std::vector<std::vector<BinSums>> features;   // [B feature][bin]
};

struct BoostTranscript {
  std::vector<NodeView> nodes;
  std::size_t decryptions = 0;
};

struct BoostResult {
  TreeModel model;
  std::vector<BinPartition> a_partitions;
  std::vector<BinPartition> b_partitions;  // B's private table
  BoostTranscript transcript;
  Vector train_margin;
};

std::vector<BinPartition> bin_features(const Matrix& x, int bins, std::vector<std::string>* warnings = nullptr);

// Encrypted two-party training. A holds labels and the key pair; B only
// aggregates ciphertexts. magic (optional) is padded into the target tree's
// gradient words.
BoostResult train_ensemble(const VerticalDataset& data, const BoostConfig& config,
                           const MagicAssignment* magic = nullptr);

}  // namespace vfl::sboost

#pragma once

#include "vfl/sboost/protocol.hpp"

namespace vfl::sboost {

struct ReferenceResult {
  TreeModel model;
  std::vector<BinPartition> a_partitions;
  std::vector<BinPartition> b_partitions;
  Vector train_margin;
};

// Centralized plaintext trainer over the same bins and quantized gradients.
// It evaluates every (feature, bin) candidate by scanning member samples
// directly instead of building histograms.
ReferenceResult train_reference(const VerticalDataset& data, const BoostConfig& config);

}  // namespace vfl::sboost

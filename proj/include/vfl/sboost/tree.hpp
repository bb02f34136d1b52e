#pragma once

#include "vfl/common/dataset.hpp"
#include "vfl/sboost/binning.hpp"
#include "vfl/sboost/gradients.hpp"
#include "vfl/sboost/split.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace vfl::sboost {

struct TreeNode {
  int id = 0;
  int depth = 0;
  bool is_leaf = true;
  Owner owner = Owner::kActive;
  int feature = -1;
  int bin = -1;            // passive splits: left iff bin id <= bin
  double threshold = 0.0;  // active splits: left iff x <= threshold
  int left = -1;
  int right = -1;
  double gain = 0.0;
  double weight = 0.0;
  std::int64_t g_units = 0;
  std::int64_t h_units = 0;
  std::size_t count = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; children follow in creation order
  friend bool operator==(const Tree&, const Tree&) = default;
};

struct TreeModel {
  std::vector<Tree> trees;
  double lambda = 1.0;
  double gamma = 0.0;
  double shrinkage = 0.3;
  Objective objective = Objective::kLogistic;
  int frac_bits = 24;
};

// -G / (H + lambda) * shrinkage
double leaf_weight(std::int64_t g_units, std::int64_t h_units, int frac_bits, double lambda, double shrinkage);

// Passive nodes are routed by B's bin assignment for x_b; the partitions are
// B's private lookup table.
double predict_score(const TreeModel& model, const Eigen::Ref<const Vector>& x_a, const Eigen::Ref<const Vector>& x_b,
                     const std::vector<BinPartition>& b_partitions);
Vector predict_scores(const TreeModel& model, const Matrix& x_a, const Matrix& x_b,
                      const std::vector<BinPartition>& b_partitions);
// Logistic: label 1 iff sigmoid(score) >= 0.5. Squared: rounds the score.
std::vector<int> predict_labels(const TreeModel& model, const Matrix& x_a, const Matrix& x_b,
                                const std::vector<BinPartition>& b_partitions);
double accuracy(const std::vector<int>& predicted, const Vector& y);

// Node-by-node comparison. weight_tol bounds leaf weight differences;
// everything else must match exactly.
bool same_structure(const TreeModel& a, const TreeModel& b, double weight_tol = 0.0);

nlohmann::json to_json(const TreeModel& model);

}  // namespace vfl::sboost

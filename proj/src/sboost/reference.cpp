#include "vfl/sboost/reference.hpp"

#include <cmath>
#include <numeric>

namespace vfl::sboost {
namespace {

struct Candidate {
  bool valid = false;
  Owner owner = Owner::kActive;
  int feature = -1;
  int bin = -1;
  double gain = 0.0;
};

void scan_party(const std::vector<BinPartition>& parts, Owner owner, const std::vector<std::size_t>& members,
                const QuantizedGradients& q, std::int64_t g_total, std::int64_t h_total, const BoostConfig& config,
                Candidate& best) {
  const double unit = std::ldexp(1.0, -config.codec.frac_bits);
  for (std::size_t f = 0; f < parts.size(); ++f) {
    const auto& part = parts[f];
    for (int k = 0; k + 1 < part.bin_count(); ++k) {
      std::int64_t gl = 0;
      std::int64_t hl = 0;
      std::size_t cl = 0;
      for (const auto i : members) {
        if (part.assignment[i] > k) continue;
        gl += q.g[i];
        hl += q.h[i];
        ++cl;
      }
      if (cl == 0 || cl == members.size()) continue;
      const double gain = split_gain(static_cast<double>(gl) * unit, static_cast<double>(hl) * unit,
                                     static_cast<double>(g_total) * unit, static_cast<double>(h_total) * unit,
                                     config.lambda, config.gamma);
      if (gain > best.gain) best = {true, owner, static_cast<int>(f), k, gain};
    }
  }
}

}  // namespace

ReferenceResult train_reference(const VerticalDataset& data, const BoostConfig& config) {
  data.validate();
  config.validate(data.size());
  const std::size_t n = data.size();
  const int frac = config.codec.frac_bits;

  ReferenceResult result;
  result.a_partitions = bin_features(data.x_a, config.bins);
  result.b_partitions = bin_features(data.x_b, config.bins);
  result.model.lambda = config.lambda;
  result.model.gamma = config.gamma;
  result.model.shrinkage = config.shrinkage;
  result.model.objective = config.objective;
  result.model.frac_bits = frac;

  Vector margin = Vector::Zero(static_cast<Eigen::Index>(n));
  for (int t = 0; t < config.trees; ++t) {
    const auto q = quantize_gradients(compute_gradients(data.y, margin, config.objective), frac);
    Tree tree;
    std::vector<std::vector<std::size_t>> node_members;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree.nodes.push_back(TreeNode{});
    node_members.push_back(std::move(all));

    for (std::size_t idx = 0; idx < tree.nodes.size(); ++idx) {
      const auto members = node_members[idx];
      TreeNode node = tree.nodes[idx];
      node.id = static_cast<int>(idx);
      node.count = members.size();
      node.g_units = 0;
      node.h_units = 0;
      for (const auto i : members) {
        node.g_units += q.g[i];
        node.h_units += q.h[i];
      }
      if (static_cast<int>(members.size()) >= config.min_samples && node.depth < config.max_depth) {
        Candidate best;
        scan_party(result.a_partitions, Owner::kActive, members, q, node.g_units, node.h_units, config, best);
        scan_party(result.b_partitions, Owner::kPassive, members, q, node.g_units, node.h_units, config, best);
        if (best.valid) {
          node.is_leaf = false;
          node.owner = best.owner;
          node.feature = best.feature;
          node.bin = best.bin;
          node.gain = best.gain;
          const auto& part = best.owner == Owner::kActive ? result.a_partitions[static_cast<std::size_t>(best.feature)]
                                                          : result.b_partitions[static_cast<std::size_t>(best.feature)];
          if (best.owner == Owner::kActive) node.threshold = part.upper[static_cast<std::size_t>(best.bin)];
          std::vector<std::size_t> left;
          std::vector<std::size_t> right;
          for (const auto i : members) (part.assignment[i] <= best.bin ? left : right).push_back(i);
          node.left = static_cast<int>(tree.nodes.size());
          node.right = node.left + 1;
          TreeNode child;
          child.depth = node.depth + 1;
          tree.nodes.push_back(child);
          tree.nodes.push_back(child);
          node_members.push_back(std::move(left));
          node_members.push_back(std::move(right));
        }
      }
      if (node.is_leaf) {
        node.weight = leaf_weight(node.g_units, node.h_units, frac, config.lambda, config.shrinkage);
        for (const auto i : members) margin(static_cast<Eigen::Index>(i)) += node.weight;
      }
      tree.nodes[idx] = node;
    }
    result.model.trees.push_back(std::move(tree));
  }
  result.train_margin = margin;
  return result;
}

}  // namespace vfl::sboost

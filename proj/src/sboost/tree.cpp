#include "vfl/sboost/tree.hpp"

#include <cmath>
#include <stdexcept>

namespace vfl::sboost {

double leaf_weight(std::int64_t g_units, std::int64_t h_units, int frac_bits, double lambda, double shrinkage) {
  const double g = std::ldexp(static_cast<double>(g_units), -frac_bits);
  const double h = std::ldexp(static_cast<double>(h_units), -frac_bits);
  return -g / (h + lambda) * shrinkage;
}

double predict_score(const TreeModel& model, const Eigen::Ref<const Vector>& x_a, const Eigen::Ref<const Vector>& x_b,
                     const std::vector<BinPartition>& b_partitions) {
  double score = 0.0;
  for (const auto& tree : model.trees) {
    int id = 0;
    while (!tree.nodes[static_cast<std::size_t>(id)].is_leaf) {
      const auto& node = tree.nodes[static_cast<std::size_t>(id)];
      bool left = false;
      if (node.owner == Owner::kActive) {
        left = x_a(node.feature) <= node.threshold;
      } else {
        const auto& part = b_partitions.at(static_cast<std::size_t>(node.feature));
        left = part.bin_of(x_b(node.feature)) <= node.bin;
      }
      id = left ? node.left : node.right;
    }
    score += tree.nodes[static_cast<std::size_t>(id)].weight;
  }
  return score;
}

Vector predict_scores(const TreeModel& model, const Matrix& x_a, const Matrix& x_b,
                      const std::vector<BinPartition>& b_partitions) {
  if (x_a.rows() != x_b.rows()) throw std::invalid_argument("predict: party row counts differ");
  Vector out(x_a.rows());
  for (Eigen::Index i = 0; i < x_a.rows(); ++i)
    out(i) = predict_score(model, x_a.row(i).transpose(), x_b.row(i).transpose(), b_partitions);
  return out;
}

std::vector<int> predict_labels(const TreeModel& model, const Matrix& x_a, const Matrix& x_b,
                                const std::vector<BinPartition>& b_partitions) {
  const Vector scores = predict_scores(model, x_a, x_b, b_partitions);
  std::vector<int> out(static_cast<std::size_t>(scores.size()));
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (model.objective == Objective::kLogistic)
      out[static_cast<std::size_t>(i)] = scores(i) >= 0.0 ? 1 : 0;
    else
      out[static_cast<std::size_t>(i)] = static_cast<int>(std::lround(scores(i)));
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const Vector& y) {
  if (predicted.size() != static_cast<std::size_t>(y.size())) throw std::invalid_argument("accuracy: length mismatch");
  if (predicted.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == static_cast<int>(std::lround(y(static_cast<Eigen::Index>(i))))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

bool same_structure(const TreeModel& a, const TreeModel& b, double weight_tol) {
  if (a.trees.size() != b.trees.size()) return false;
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    const auto& na = a.trees[t].nodes;
    const auto& nb = b.trees[t].nodes;
    if (na.size() != nb.size()) return false;
    for (std::size_t i = 0; i < na.size(); ++i) {
      TreeNode x = na[i];
      TreeNode y = nb[i];
      if (std::fabs(x.weight - y.weight) > weight_tol) return false;
      x.weight = y.weight = 0.0;
      if (!(x == y)) return false;
    }
  }
  return true;
}

nlohmann::json to_json(const TreeModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) {
      nlohmann::json j = {{"id", n.id}, {"depth", n.depth}, {"leaf", n.is_leaf}, {"count", n.count}};
      if (n.is_leaf) {
        j["weight"] = n.weight;
      } else {
        j["owner"] = n.owner == Owner::kActive ? "A" : "B";
        j["feature"] = n.feature;
        if (n.owner == Owner::kActive)
          j["threshold"] = n.threshold;
        else
          j["bin"] = n.bin;
        j["gain"] = n.gain;
        j["left"] = n.left;
        j["right"] = n.right;
      }
      nodes.push_back(j);
    }
    trees.push_back({{"nodes", nodes}});
  }
  return {{"lambda", model.lambda},
          {"gamma", model.gamma},
          {"shrinkage", model.shrinkage},
          {"objective", model.objective == Objective::kLogistic ? "logistic" : "squared"},
          {"trees", trees}};
}

}  // namespace vfl::sboost

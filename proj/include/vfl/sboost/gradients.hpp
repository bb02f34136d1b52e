#pragma once

#include "vfl/common/dataset.hpp"

#include <cstdint>
#include <vector>

namespace vfl::sboost {

enum class Objective { kLogistic, kSquared };

struct GradientPair {
  double g = 0.0;
  double h = 0.0;
};

double sigmoid(double x);

// Logistic: p = sigmoid(y_hat), g = p - y, h = p (1 - p). Squared: g = y_hat - y, h = 1.
// Throws std::invalid_argument when lengths differ.
std::vector<GradientPair> compute_gradients(const Vector& y, const Vector& y_hat, Objective objective);

// Gradients as integers round(x * 2^F); both trainers work on these.
struct QuantizedGradients {
  std::vector<std::int64_t> g;
  std::vector<std::int64_t> h;
};
QuantizedGradients quantize_gradients(const std::vector<GradientPair>& grads, int frac_bits);

}  // namespace vfl::sboost

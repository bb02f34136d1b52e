#include "vfl/sboost/gradients.hpp"

#include "vfl/he/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace vfl::sboost {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<GradientPair> compute_gradients(const Vector& y, const Vector& y_hat, Objective objective) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("compute_gradients: label and margin lengths differ");
  std::vector<GradientPair> out(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    auto& gp = out[static_cast<std::size_t>(i)];
    if (objective == Objective::kLogistic) {
      const double p = sigmoid(y_hat(i));
      gp.g = p - y(i);
      gp.h = p * (1.0 - p);
    } else {
      gp.g = y_hat(i) - y(i);
      gp.h = 1.0;
    }
  }
  return out;
}

QuantizedGradients quantize_gradients(const std::vector<GradientPair>& grads, int frac_bits) {
  QuantizedGradients q;
  q.g.reserve(grads.size());
  q.h.reserve(grads.size());
  for (const auto& gp : grads) {
    q.g.push_back(he::quantize(gp.g, frac_bits));
    q.h.push_back(he::quantize(gp.h, frac_bits));
  }
  return q;
}

}  // namespace vfl::sboost

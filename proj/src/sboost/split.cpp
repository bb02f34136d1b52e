#include "vfl/sboost/split.hpp"

#include <cmath>

namespace vfl::sboost {

double split_gain(double g_left, double h_left, double g_total, double h_total, double lambda, double gamma) {
  const double g_right = g_total - g_left;
  const double h_right = h_total - h_left;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g_total * g_total / (h_total + lambda)) -
         gamma;
}

namespace {

void scan(const std::vector<FeatureHistogram>& features, Owner owner, std::int64_t g_total, std::int64_t h_total,
          const SplitParams& params, SplitDecision& best) {
  const double unit = std::ldexp(1.0, -params.frac_bits);
  const double g = static_cast<double>(g_total) * unit;
  const double h = static_cast<double>(h_total) * unit;
  std::uint64_t total_count = 0;
  for (int f = 0; f < static_cast<int>(features.size()); ++f) {
    const auto& hist = features[static_cast<std::size_t>(f)];
    total_count = 0;
    for (const auto c : hist.count) total_count += c;
    std::int64_t gl = 0;
    std::int64_t hl = 0;
    std::uint64_t cl = 0;
    for (std::size_t k = 0; k + 1 < hist.count.size(); ++k) {
      gl += hist.g[k];
      hl += hist.h[k];
      cl += hist.count[k];
      if (cl == 0 || cl == total_count) continue;
      const double gain =
          split_gain(static_cast<double>(gl) * unit, static_cast<double>(hl) * unit, g, h, params.lambda, params.gamma);
      if (gain > best.gain) best = {true, owner, f, static_cast<int>(k), gain};
    }
  }
}

}  // namespace

SplitDecision find_best_split(const std::vector<FeatureHistogram>& active, const std::vector<FeatureHistogram>& passive,
                              std::int64_t g_total, std::int64_t h_total, const SplitParams& params) {
  SplitDecision best;
  scan(active, Owner::kActive, g_total, h_total, params, best);
  scan(passive, Owner::kPassive, g_total, h_total, params, best);
  return best;
}

}  // namespace vfl::sboost

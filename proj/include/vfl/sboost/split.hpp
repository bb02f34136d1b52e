#pragma once

#include "vfl/sboost/histogram.hpp"

#include <cstdint>
#include <vector>

namespace vfl::sboost {

enum class Owner { kActive, kPassive };

// 1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma
double split_gain(double g_left, double h_left, double g_total, double h_total, double lambda, double gamma);

struct SplitParams {
  double lambda = 1.0;
  double gamma = 0.0;
  int frac_bits = 24;
};

struct SplitDecision {
  bool valid = false;
  Owner owner = Owner::kActive;
  int feature = -1;
  int bin = -1;  // left child takes bins <= bin
  double gain = 0.0;
};

// Scans cumulative bin sums of every feature, A's first. A candidate replaces
// the incumbent only with strictly larger gain, which gives the tie order
// (A before B, lower feature, lower bin). Splits leaving a child empty are
// skipped. Returns an invalid decision when no gain is positive.
SplitDecision find_best_split(const std::vector<FeatureHistogram>& active, const std::vector<FeatureHistogram>& passive,
                              std::int64_t g_total, std::int64_t h_total, const SplitParams& params);

}  // namespace vfl::sboost

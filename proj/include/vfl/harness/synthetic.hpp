#pragma once

#include "vfl/common/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vfl::harness {

enum class DistKind { kNormal, kBernoulli, kExponential, kUniform };

// normal(mu, sigma), bernoulli(p), exponential(lambda), uniform(a, b)
struct DistributionSpec {
  DistKind kind = DistKind::kNormal;
  double p1 = 0.0;
  double p2 = 1.0;

  // Throws ConfigError on malformed text or invalid parameters.
  static DistributionSpec parse(const std::string& text);
  std::string to_string() const;
  void validate() const;
  double mean() const;
  double stddev() const;
};

std::vector<double> sample_column(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t n = 2000;
  std::size_t d_a = 4;
  std::size_t d_b = 4;
  DistributionSpec a_dist;
  DistributionSpec b_dist;
  double label_noise = 0.5;  // scale of the logistic noise added to the teacher score
  std::uint64_t seed = 0;
};

// Features drawn per column; labels from a seeded linear teacher on the
// standardized features plus logistic noise, y = 1 iff the noisy score > 0.
VerticalDataset gen_synthetic(const SyntheticSpec& spec);

struct TrainTestSplit {
  VerticalDataset train;
  VerticalDataset test;
};

// Seeded shuffle; the first round(train_fraction * n) rows train.
TrainTestSplit split_train_test(const VerticalDataset& data, double train_fraction, std::uint64_t seed);

}  // namespace vfl::harness

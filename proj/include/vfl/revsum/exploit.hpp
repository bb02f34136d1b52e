#pragma once

#include "vfl/revsum/reversion.hpp"
#include "vfl/sboost/protocol.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace vfl::revsum {

struct BinBound {
  bool known = false;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t support = 0;  // leaked aux samples behind the estimate
};

struct BinBounds {
  std::size_t feature = 0;
  std::vector<BinBound> bins;
  double inferred_fraction = 0.0;  // bins with an estimate / bin count
};

// lo, hi = min, max of the feature over leaked members of the bin that are
// also in aux. values holds B's true feature column; only aux rows are read.
BinBounds infer_bin_bounds(const PartialOrder& order, int bin_count, std::span<const std::size_t> aux,
                           std::span<const double> values);

// Fraction of bins whose estimate equals the true (min, max) exactly.
double exact_bound_fraction(const BinBounds& bounds, const std::vector<std::pair<double, double>>& true_extremes);

struct AlternativeReport {
  double original_accuracy = 0.0;
  double alternative_accuracy = 0.0;
  bool identical_predictions = false;
  std::vector<std::size_t> used_features;
  std::vector<std::size_t> excluded_features;
  std::vector<int> original_predictions;
  std::vector<int> alternative_predictions;
};

// Trains a boosted model on A's raw features plus, for each B feature with
// complete coverage, the midpoint of each sample's leaked bin. Test rows map
// to the first bin with x <= hi. Features lacking a leaked bin for some
// training sample or an estimate for some bin are excluded.
AlternativeReport evaluate_alternative(const VerticalDataset& train, const VerticalDataset& test,
                                       const sboost::BoostResult& original, const std::vector<PartialOrder>& orders,
                                       const std::vector<BinBounds>& bounds, const sboost::BoostConfig& config);

nlohmann::json to_json(const BinBounds& bounds);
nlohmann::json to_json(const AlternativeReport& report);

}  // namespace vfl::revsum

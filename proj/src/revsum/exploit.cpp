#include "vfl/revsum/exploit.hpp"

#include "vfl/sboost/reference.hpp"

#include <algorithm>
#include <stdexcept>

namespace vfl::revsum {

BinBounds infer_bin_bounds(const PartialOrder& order, int bin_count, std::span<const std::size_t> aux,
                           std::span<const double> values) {
  BinBounds out;
  out.feature = order.feature;
  out.bins.assign(static_cast<std::size_t>(bin_count), BinBound{});
  for (const auto i : aux) {
    if (i >= order.bin_of.size() || i >= values.size()) throw std::out_of_range("infer_bin_bounds: aux index");
    const int k = order.bin_of[i];
    if (k < 0 || k >= bin_count) continue;
    auto& b = out.bins[static_cast<std::size_t>(k)];
    const double x = values[i];
    if (!b.known) {
      b.known = true;
      b.lo = b.hi = x;
    } else {
      b.lo = std::min(b.lo, x);
      b.hi = std::max(b.hi, x);
    }
    ++b.support;
  }
  std::size_t known = 0;
  for (const auto& b : out.bins) known += b.known ? 1 : 0;
  out.inferred_fraction = bin_count > 0 ? static_cast<double>(known) / static_cast<double>(bin_count) : 0.0;
  return out;
}

double exact_bound_fraction(const BinBounds& bounds, const std::vector<std::pair<double, double>>& true_extremes) {
  if (bounds.bins.empty()) return 0.0;
  std::size_t exact = 0;
  for (std::size_t k = 0; k < bounds.bins.size() && k < true_extremes.size(); ++k) {
    const auto& b = bounds.bins[k];
    if (b.known && b.lo == true_extremes[k].first && b.hi == true_extremes[k].second) ++exact;
  }
  return static_cast<double>(exact) / static_cast<double>(bounds.bins.size());
}

namespace {

double midpoint(const BinBound& b) { return 0.5 * (b.lo + b.hi); }

// Representative value of a raw test value: midpoint of the first bin whose
// upper estimate covers it, else the last bin.
double map_value(const BinBounds& bounds, double x) {
  for (const auto& b : bounds.bins)
    if (x <= b.hi) return midpoint(b);
  return midpoint(bounds.bins.back());
}

}  // namespace

AlternativeReport evaluate_alternative(const VerticalDataset& train, const VerticalDataset& test,
                                       const sboost::BoostResult& original, const std::vector<PartialOrder>& orders,
                                       const std::vector<BinBounds>& bounds, const sboost::BoostConfig& config) {
  AlternativeReport rep;
  const std::size_t n = train.size();
  for (std::size_t j = 0; j < train.d_b(); ++j) {
    const auto order = std::find_if(orders.begin(), orders.end(), [&](const PartialOrder& o) { return o.feature == j; });
    const auto bb = std::find_if(bounds.begin(), bounds.end(), [&](const BinBounds& b) { return b.feature == j; });
    bool usable = order != orders.end() && bb != bounds.end() && !bb->bins.empty();
    if (usable)
      for (const auto& b : bb->bins) usable = usable && b.known;
    if (usable)
      for (std::size_t i = 0; i < n; ++i) usable = usable && i < order->bin_of.size() && order->bin_of[i] >= 0;
    (usable ? rep.used_features : rep.excluded_features).push_back(j);
  }

  VerticalDataset alt_train = train;
  VerticalDataset alt_test = test;
  const auto used = static_cast<Eigen::Index>(rep.used_features.size());
  // A constant column stands in when nothing leaked; it never yields a split.
  alt_train.x_b = Matrix::Zero(static_cast<Eigen::Index>(n), std::max<Eigen::Index>(used, 1));
  alt_test.x_b = Matrix::Zero(test.x_a.rows(), std::max<Eigen::Index>(used, 1));
  for (Eigen::Index c = 0; c < used; ++c) {
    const std::size_t j = rep.used_features[static_cast<std::size_t>(c)];
    const auto& order = *std::find_if(orders.begin(), orders.end(), [&](const PartialOrder& o) { return o.feature == j; });
    const auto& bb = *std::find_if(bounds.begin(), bounds.end(), [&](const BinBounds& b) { return b.feature == j; });
    for (std::size_t i = 0; i < n; ++i)
      alt_train.x_b(static_cast<Eigen::Index>(i), c) = midpoint(bb.bins[static_cast<std::size_t>(order.bin_of[i])]);
    for (Eigen::Index i = 0; i < test.x_b.rows(); ++i)
      alt_test.x_b(i, c) = map_value(bb, test.x_b(i, static_cast<Eigen::Index>(j)));
  }

  const auto alt = sboost::train_reference(alt_train, config);
  rep.original_predictions = sboost::predict_labels(original.model, test.x_a, test.x_b, original.b_partitions);
  rep.alternative_predictions = sboost::predict_labels(alt.model, alt_test.x_a, alt_test.x_b, alt.b_partitions);
  rep.original_accuracy = sboost::accuracy(rep.original_predictions, test.y);
  rep.alternative_accuracy = sboost::accuracy(rep.alternative_predictions, test.y);
  rep.identical_predictions = rep.original_predictions == rep.alternative_predictions;
  return rep;
}

nlohmann::json to_json(const BinBounds& bounds) {
  nlohmann::json bins = nlohmann::json::array();
  for (std::size_t k = 0; k < bounds.bins.size(); ++k) {
    const auto& b = bounds.bins[k];
    bins.push_back({{"bin", k}, {"known", b.known}, {"lo", b.lo}, {"hi", b.hi}, {"support", b.support}});
  }
  return {{"feature", bounds.feature}, {"inferred_fraction", bounds.inferred_fraction}, {"bins", bins}};
}

nlohmann::json to_json(const AlternativeReport& r) {
  return {{"original_accuracy", r.original_accuracy},
          {"alternative_accuracy", r.alternative_accuracy},
          {"identical_predictions", r.identical_predictions},
          {"used_features", r.used_features},
          {"excluded_features", r.excluded_features}};
}

}  // namespace vfl::revsum

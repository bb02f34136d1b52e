#include "vfl/sboost/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vfl::sboost {

int BinPartition::bin_of(double x) const {
  return static_cast<int>(std::lower_bound(upper.begin(), upper.end(), x) - upper.begin());
}

std::vector<std::pair<double, double>> BinPartition::extremes(std::span<const double> column) const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(bin_count()), {nan, nan});
  for (std::size_t i = 0; i < column.size(); ++i) {
    auto& [lo, hi] = out[static_cast<std::size_t>(assignment[i])];
    if (std::isnan(lo) || column[i] < lo) lo = column[i];
    if (std::isnan(hi) || column[i] > hi) hi = column[i];
  }
  return out;
}

std::vector<std::size_t> BinPartition::counts() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(bin_count()), 0);
  for (const int b : assignment) ++out[static_cast<std::size_t>(b)];
  return out;
}

BinPartition build_bins(std::span<const double> column, int bin_count, std::size_t feature,
                        std::vector<std::string>* warnings) {
  if (bin_count < 2) throw std::invalid_argument("build_bins: bin_count must be >= 2");
  if (column.empty()) throw std::invalid_argument("build_bins: empty column");
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double top = sorted.back();

  BinPartition part;
  part.feature = feature;
  for (int q = 1; q < bin_count; ++q) {
    const std::size_t rank = (static_cast<std::size_t>(q) * n + static_cast<std::size_t>(bin_count) - 1) /
                             static_cast<std::size_t>(bin_count);
    const double edge = sorted[rank == 0 ? 0 : rank - 1];
    if (edge >= top) break;
    if (part.upper.empty() || edge > part.upper.back()) part.upper.push_back(edge);
  }
  if (part.upper.empty() && warnings)
    warnings->push_back("feature " + std::to_string(feature) + ": constant column, single bin");

  part.assignment.reserve(n);
  for (const double x : column) part.assignment.push_back(part.bin_of(x));
  return part;
}

}  // namespace vfl::sboost

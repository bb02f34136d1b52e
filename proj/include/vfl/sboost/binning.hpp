#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace vfl::sboost {

// Equal-frequency bins over one feature column. Bin k holds values in
// (upper[k-1], upper[k]]; the last bin is unbounded above.
struct BinPartition {
  std::size_t feature = 0;
  std::vector<double> upper;
  std::vector<int> assignment;  // sample -> bin

  int bin_count() const { return static_cast<int>(upper.size()) + 1; }
  int bin_of(double x) const;
  // Smallest and largest member value per bin; NaN for an empty bin.
  std::vector<std::pair<double, double>> extremes(std::span<const double> column) const;
  std::vector<std::size_t> counts() const;
};

// Boundaries are sorted[ceil(q n / K) - 1] for q = 1..K-1, deduplicated, and
// dropped when they reach the column maximum. Equal values share a bin. A
// constant column yields one bin and a warning. Throws std::invalid_argument
// for bin_count < 2 or an empty column.
BinPartition build_bins(std::span<const double> column, int bin_count, std::size_t feature = 0,
                        std::vector<std::string>* warnings = nullptr);

}  // namespace vfl::sboost

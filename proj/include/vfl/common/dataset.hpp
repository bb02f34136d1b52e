#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Two-party vertical split: identical sample order on both sides, labels live
// with the active party A.
struct VerticalDataset {
  std::vector<std::string> ids;
  Matrix x_a;  // n x d_A
  Matrix x_b;  // n x d_B
  Vector y;    // n labels, {0,1} for classification
  std::vector<std::string> a_names;
  std::vector<std::string> b_names;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  std::size_t d_a() const { return static_cast<std::size_t>(x_a.cols()); }
  std::size_t d_b() const { return static_cast<std::size_t>(x_b.cols()); }

  // Throws std::invalid_argument when shapes disagree or a side has no features.
  void validate() const;

  VerticalDataset subset(const std::vector<std::size_t>& rows) const;
};

inline void VerticalDataset::validate() const {
  const auto n = y.size();
  if (x_a.rows() != n || x_b.rows() != n)
    throw std::invalid_argument("vertical dataset: row counts differ between parties");
  if (x_a.cols() < 1 || x_b.cols() < 1)
    throw std::invalid_argument("vertical dataset: each party needs at least one feature");
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != n)
    throw std::invalid_argument("vertical dataset: id list length differs from row count");
}

inline VerticalDataset VerticalDataset::subset(const std::vector<std::size_t>& rows) const {
  VerticalDataset out;
  out.a_names = a_names;
  out.b_names = b_names;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.x_a.resize(m, x_a.cols());
  out.x_b.resize(m, x_b.cols());
  out.y.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto src = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    out.x_a.row(r) = x_a.row(src);
    out.x_b.row(r) = x_b.row(src);
    out.y(r) = y(src);
    if (!ids.empty()) out.ids.push_back(ids[static_cast<std::size_t>(src)]);
  }
  return out;
}

}  // namespace vfl

#pragma once

#include "vfl/logreg/protocol.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace vfl::revmul {

// Reverse multiplication: A colludes with C, decrypts [[v_t]] = [[u_t + 1/4 theta_B_t X_S^B]],
// strips its own u_t and stacks the resulting linear equations in the
// unknown X_S^B over rounds that reuse batch S.

// What the adversary (A) can see. Decryption needs the corruption flag.
class CorruptionView {
 public:
  static CorruptionView honest(const logreg::Transcript& t) { return CorruptionView(t, std::nullopt); }
  static CorruptionView corrupted(const logreg::Transcript& t, const he::SecretKey& sk) { return CorruptionView(t, sk); }

  const logreg::Transcript& transcript() const { return *transcript_; }
  bool is_corrupted() const { return sk_.has_value(); }
  // Throws CapabilityError without the corruption flag.
  const he::SecretKey& secret_key() const;

 private:
  CorruptionView(const logreg::Transcript& t, std::optional<he::SecretKey> sk) : transcript_(&t), sk_(std::move(sk)) {}
  const logreg::Transcript* transcript_;
  std::optional<he::SecretKey> sk_;
};

struct ProductRound {
  std::size_t round = 0;
  Vector values;  // 1/4 theta_B_t x_i for i in S, in batch order
};

// Rounds whose batch equals S, in round order.
std::vector<ProductRound> extract_products(const CorruptionView& view, const std::vector<std::size_t>& batch,
                                           std::vector<std::string>* warnings = nullptr);

struct LinearSystem {
  std::vector<std::size_t> batch;
  std::vector<std::size_t> rounds;  // round of the later equation in each row
  Matrix m;                         // T x d_B
  Matrix rhs;                       // T x |S|, one column per sample
  double eps_rank = 1e-10;
};

// Gradient-return mode: for consecutive appearances t' < t of S,
//   row = sum_{r in [t', t)} g^B_r,  rhs = (v_t - v_t') * (-4 / eta).
// Coordinator-updates mode: row = theta_B used in round t, rhs = 4 v_t.
// Throws std::invalid_argument when S has too few usable rounds.
LinearSystem build_system(const CorruptionView& view, const std::vector<std::size_t>& batch,
                          double eps_rank = 1e-10);

// Count of singular values above eps * sigma_max.
int numerical_rank(const Matrix& m, double eps = 1e-10);

struct Solution {
  Matrix x_hat;     // d_B x |S|; column i is the estimate of x_i^B
  Matrix residual;  // M x_hat - rhs
  int rank = 0;
  double leakage_fraction = 0.0;
  Matrix row_space;  // d_B x rank orthonormal basis of the recovered subspace
};

// Minimum-norm least squares through a truncated SVD. With rank < d_B the
// estimate is the projection of the truth onto M's row space.
Solution solve_system(const LinearSystem& sys);

struct BatchReport {
  std::vector<std::size_t> batch;
  std::size_t equations = 0;
  int rank = 0;
  std::size_t d_b = 0;
  std::size_t recovered_samples = 0;
  double leakage_fraction = 0.0;
  double max_error = -1.0;             // vs ground truth, -1 when unavailable
  double max_projection_error = -1.0;  // vs the truth projected on the row space
};

struct LeakageReport {
  std::vector<BatchReport> batches;
  Matrix x_hat;  // n x d_B, NaN where a sample was never solved
  std::size_t d_b = 0;
  int min_rank = 0;
  double leakage_fraction = 0.0;  // sum r|S| / sum d_B|S|
  std::size_t recovered_samples = 0;
  double max_error = -1.0;
  double max_projection_error = -1.0;
  std::vector<std::string> warnings;
};

// Throws CapabilityError without the corruption flag. ground_truth (n x d_B)
// only feeds the error columns.
LeakageReport attack(const CorruptionView& view, std::size_t n_samples, const Matrix* ground_truth = nullptr,
                     double eps_rank = 1e-10);

nlohmann::json to_json(const LeakageReport& report);

}  // namespace vfl::revmul

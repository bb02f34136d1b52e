#include "vfl/revmul/attack.hpp"

#include "vfl/common/error.hpp"
#include "vfl/he/codec.hpp"
#include "vfl/he/kernels.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace vfl::revmul {
namespace {

std::vector<std::size_t> rounds_with_batch(const logreg::Transcript& t, const std::vector<std::size_t>& batch) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < t.rounds.size(); ++r)
    if (t.rounds[r].batch == batch) out.push_back(r);
  return out;
}

}  // namespace

const he::SecretKey& CorruptionView::secret_key() const {
  if (!sk_) throw CapabilityError("decryption requires a corrupted coordinator");
  return *sk_;
}

std::vector<ProductRound> extract_products(const CorruptionView& view, const std::vector<std::size_t>& batch,
                                           std::vector<std::string>* warnings) {
  const auto& sk = view.secret_key();
  const auto& t = view.transcript();
  std::vector<ProductRound> out;
  for (const auto r : rounds_with_batch(t, batch)) {
    const auto& rec = t.rounds[r];
    if (rec.a_u_units.size() != rec.enc_v.size()) {
      if (warnings) warnings->push_back("round " + std::to_string(r) + ": u and v lengths differ, skipped");
      continue;
    }
    const auto words = he::decrypt_batch(sk, rec.enc_v);
    ProductRound pr;
    pr.round = r;
    pr.values.resize(static_cast<Eigen::Index>(words.size()));
    bool ok = true;
    for (std::size_t k = 0; k < words.size(); ++k) {
      mpz_class u;
      mpz_set_si(u.get_mpz_t(), rec.a_u_units[k]);
      mpz_class w = (words[k].raw - u) % t.pk.n;
      if (w < 0) w += t.pk.n;
      const double x = he::decode_signed(t.pk, {w}, t.codec, 1);
      if (!std::isfinite(x) || std::fabs(x) > 1e15) {
        ok = false;
        break;
      }
      pr.values(static_cast<Eigen::Index>(k)) = x;
    }
    if (!ok) {
      if (warnings) warnings->push_back("round " + std::to_string(r) + ": decode overflow, skipped");
      continue;
    }
    out.push_back(std::move(pr));
  }
  return out;
}

LinearSystem build_system(const CorruptionView& view, const std::vector<std::size_t>& batch, double eps_rank) {
  const auto& t = view.transcript();
  const auto products = extract_products(view, batch);
  const auto d_b = static_cast<Eigen::Index>(t.d_b);
  const auto s = static_cast<Eigen::Index>(batch.size());

  LinearSystem sys;
  sys.batch = batch;
  sys.eps_rank = eps_rank;

  if (t.coordinator_updates) {
    // theta_B used in round t is what C returned in round t - 1.
    std::vector<std::pair<Vector, Vector>> rows;
    for (const auto& p : products) {
      if (p.round == 0) continue;
      rows.emplace_back(t.rounds[p.round - 1].theta_b_returned, 4.0 * p.values);
      sys.rounds.push_back(p.round);
    }
    if (rows.empty()) throw std::invalid_argument("build_system: batch has no round with a known theta_B");
    sys.m.resize(static_cast<Eigen::Index>(rows.size()), d_b);
    sys.rhs.resize(static_cast<Eigen::Index>(rows.size()), s);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sys.m.row(static_cast<Eigen::Index>(i)) = rows[i].first.transpose();
      sys.rhs.row(static_cast<Eigen::Index>(i)) = rows[i].second.transpose();
    }
    return sys;
  }

  if (products.size() < 2) throw std::invalid_argument("build_system: fewer than 2 rounds touch the batch");
  if (!(t.learning_rate > 0.0)) throw std::invalid_argument("build_system: learning rate must be positive");

  // prefix[r] = sum of g^B over rounds [0, r)
  std::vector<Vector> prefix(t.rounds.size() + 1, Vector::Zero(d_b));
  for (std::size_t r = 0; r < t.rounds.size(); ++r) prefix[r + 1] = prefix[r] + t.rounds[r].grad_b;

  const auto rows = static_cast<Eigen::Index>(products.size() - 1);
  sys.m.resize(rows, d_b);
  sys.rhs.resize(rows, s);
  const double scale = -4.0 / t.learning_rate;
  for (std::size_t i = 1; i < products.size(); ++i) {
    const auto& prev = products[i - 1];
    const auto& cur = products[i];
    sys.m.row(static_cast<Eigen::Index>(i - 1)) = (prefix[cur.round] - prefix[prev.round]).transpose();
    sys.rhs.row(static_cast<Eigen::Index>(i - 1)) = ((cur.values - prev.values) * scale).transpose();
    sys.rounds.push_back(cur.round);
  }
  return sys;
}

int numerical_rank(const Matrix& m, double eps) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > eps * sv(0)) ++rank;
  return rank;
}

Solution solve_system(const LinearSystem& sys) {
  const auto d_b = sys.m.cols();
  Solution sol;
  Eigen::JacobiSVD<Matrix> svd(sys.m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0)
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > sys.eps_rank * sv(0)) ++rank;
  sol.rank = rank;
  sol.leakage_fraction = d_b > 0 ? static_cast<double>(rank) / static_cast<double>(d_b) : 0.0;

  const Matrix u = svd.matrixU().leftCols(rank);
  const Matrix v = svd.matrixV().leftCols(rank);
  const Vector inv = sv.head(rank).cwiseInverse();
  sol.x_hat = v * inv.asDiagonal() * (u.transpose() * sys.rhs);
  sol.residual = sys.m * sol.x_hat - sys.rhs;
  sol.row_space = v;
  return sol;
}

LeakageReport attack(const CorruptionView& view, std::size_t n_samples, const Matrix* ground_truth, double eps_rank) {
  view.secret_key();
  const auto& t = view.transcript();
  LeakageReport report;
  report.d_b = t.d_b;
  report.x_hat = Matrix::Constant(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(t.d_b),
                                  std::numeric_limits<double>::quiet_NaN());
  if (ground_truth && (ground_truth->rows() != static_cast<Eigen::Index>(n_samples) ||
                       ground_truth->cols() != static_cast<Eigen::Index>(t.d_b)))
    throw std::invalid_argument("attack: ground truth shape differs from n x d_B");

  std::map<std::vector<std::size_t>, std::size_t> seen;
  std::vector<std::vector<std::size_t>> batches;
  for (const auto& r : t.rounds)
    if (seen.emplace(r.batch, batches.size()).second) batches.push_back(r.batch);

  double leaked = 0.0;
  double total = 0.0;
  report.min_rank = static_cast<int>(t.d_b);
  for (const auto& batch : batches) {
    BatchReport br;
    br.batch = batch;
    br.d_b = t.d_b;
    total += static_cast<double>(t.d_b * batch.size());
    LinearSystem sys;
    try {
      sys = build_system(view, batch, eps_rank);
    } catch (const std::invalid_argument& e) {
      report.warnings.push_back(e.what());
      report.min_rank = 0;
      report.batches.push_back(br);
      continue;
    }
    const Solution sol = solve_system(sys);
    br.equations = static_cast<std::size_t>(sys.m.rows());
    br.rank = sol.rank;
    br.leakage_fraction = sol.leakage_fraction;
    br.recovered_samples = sol.rank == static_cast<int>(t.d_b) ? batch.size() : 0;
    leaked += static_cast<double>(sol.rank) * static_cast<double>(batch.size());
    report.min_rank = std::min(report.min_rank, sol.rank);
    report.recovered_samples += br.recovered_samples;

    for (std::size_t k = 0; k < batch.size(); ++k)
      report.x_hat.row(static_cast<Eigen::Index>(batch[k])) = sol.x_hat.col(static_cast<Eigen::Index>(k)).transpose();

    if (ground_truth) {
      double err = 0.0;
      double proj_err = 0.0;
      const Matrix p = sol.row_space * sol.row_space.transpose();
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const Vector truth = ground_truth->row(static_cast<Eigen::Index>(batch[k])).transpose();
        const Vector est = sol.x_hat.col(static_cast<Eigen::Index>(k));
        err = std::max(err, (est - truth).cwiseAbs().maxCoeff());
        proj_err = std::max(proj_err, (est - p * truth).cwiseAbs().maxCoeff());
      }
      br.max_error = err;
      br.max_projection_error = proj_err;
      report.max_error = std::max(report.max_error, err);
      report.max_projection_error = std::max(report.max_projection_error, proj_err);
    }
    report.batches.push_back(br);
  }
  report.leakage_fraction = total > 0.0 ? leaked / total : 0.0;
  if (batches.empty()) report.min_rank = 0;
  return report;
}

nlohmann::json to_json(const LeakageReport& report) {
  nlohmann::json batches = nlohmann::json::array();
  for (const auto& b : report.batches) {
    batches.push_back({{"size", b.batch.size()},
                       {"first_index", b.batch.empty() ? 0 : b.batch.front()},
                       {"equations", b.equations},
                       {"rank", b.rank},
                       {"d_b", b.d_b},
                       {"leakage_fraction", b.leakage_fraction},
                       {"recovered_samples", b.recovered_samples},
                       {"max_error", b.max_error},
                       {"max_projection_error", b.max_projection_error}});
  }
  return {{"d_b", report.d_b},
          {"min_rank", report.min_rank},
          {"leakage_fraction", report.leakage_fraction},
          {"recovered_samples", report.recovered_samples},
          {"max_error", report.max_error},
          {"max_projection_error", report.max_projection_error},
          {"warnings", report.warnings},
          {"batches", batches}};
}

}  // namespace vfl::revmul

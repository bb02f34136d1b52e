#pragma once

#include "vfl/common/dataset.hpp"
#include "vfl/he/codec.hpp"
#include "vfl/he/paillier.hpp"

#include <cstdint>
#include <vector>

namespace vfl::logreg {

// Two-party logistic regression with a third-party coordinator C.
//
// Per round on mini-batch S:
//   A: [[u]] = [[1/4 theta_A X_S^A - 1/2 Y_S]]                  -> B
//   B: [[v]] = [[1/4 theta_B X_S^B]] + [[u]], [[v]] X_S^B         -> C
//      [[v]]                                                      -> A
//   A: [[v]] X_S^A                                                -> C
//   C: g^A = dec([[v]] X_S^A) / |S|, g^B likewise                 -> A, B
//   A, B: theta <- theta - eta * g

enum class Role { kActive, kPassive, kCoordinator };

// How the label enters u. kZeroOne uses y as given. kPlusMinusOne maps
// y -> 2y - 1, which makes sign(theta x) the natural decision rule.
enum class LabelEncoding { kZeroOne, kPlusMinusOne };

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 50;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  int key_bits = 2048;
  // C keeps theta and returns updated coefficients instead of gradients.
  bool coordinator_updates = false;
  bool random_init = false;
  // Default: one seeded partition reused every epoch, so each batch set
  // recurs. With reshuffling the partition is redrawn per epoch.
  bool reshuffle_each_epoch = false;
  LabelEncoding labels = LabelEncoding::kZeroOne;
  he::CodecParams codec = he::CodecParams::signed_default();

  // Throws ConfigError.
  void validate(std::size_t n_samples) const;
};

struct PartyState {
  Role role = Role::kActive;
  Vector theta;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  std::size_t batch_size = 0;
};

struct RoundRecord {
  std::size_t round = 0;
  int epoch = 0;
  std::vector<std::size_t> batch;

  std::vector<he::Ciphertext> enc_u;    // A -> B
  std::vector<he::Ciphertext> enc_v;    // B -> A
  std::vector<he::Ciphertext> enc_vxa;  // A -> C
  std::vector<he::Ciphertext> enc_vxb;  // B -> C
  // A's own quantized u, kept in A's local view.
  std::vector<std::int64_t> a_u_units;

  Vector grad_a;  // C -> A
  Vector grad_b;  // C -> B
  // Only in coordinator-updates mode.
  Vector theta_a_returned;
  Vector theta_b_returned;

  // Ground truth for evaluation. Attack code never reads this.
  struct Oracle {
    Vector theta_a;  // before the round
    Vector theta_b;
  } oracle;
};

struct Transcript {
  he::PublicKey pk;
  double learning_rate = 0.0;
  bool coordinator_updates = false;
  LabelEncoding labels = LabelEncoding::kZeroOne;
  he::CodecParams codec;
  std::size_t d_a = 0;
  std::size_t d_b = 0;
  std::vector<RoundRecord> rounds;
};

class ActiveParty {
 public:
  ActiveParty(const he::PublicKey& pk, const Matrix& x_a, const Vector& y, PartyState state,
              const TrainConfig& config);

  const PartyState& state() const { return state_; }
  void set_theta(const Vector& theta) { state_.theta = theta; }

  std::vector<he::Ciphertext> encrypt_u(const std::vector<std::size_t>& batch, std::uint64_t round_seed,
                                        std::vector<std::int64_t>& units_out) const;
  std::vector<he::Ciphertext> products(const std::vector<he::Ciphertext>& enc_v,
                                       const std::vector<std::size_t>& batch) const;
  void apply_gradient(const Vector& g);

 private:
  const he::PublicKey& pk_;
  const Matrix& x_;
  Vector label_term_;  // y or 2y - 1
  PartyState state_;
  he::CodecParams codec_;
};

class PassiveParty {
 public:
  PassiveParty(const he::PublicKey& pk, const Matrix& x_b, PartyState state, const TrainConfig& config);

  const PartyState& state() const { return state_; }
  void set_theta(const Vector& theta) { state_.theta = theta; }

  std::vector<he::Ciphertext> compute_v(const std::vector<he::Ciphertext>& enc_u, const std::vector<std::size_t>& batch,
                                        std::uint64_t round_seed) const;
  std::vector<he::Ciphertext> products(const std::vector<he::Ciphertext>& enc_v,
                                       const std::vector<std::size_t>& batch) const;
  void apply_gradient(const Vector& g);

 private:
  const he::PublicKey& pk_;
  const Matrix& x_;
  PartyState state_;
  he::CodecParams codec_;
};

class Coordinator {
 public:
  Coordinator(he::Keypair keys, const TrainConfig& config);

  const he::PublicKey& public_key() const { return keys_.pk; }
  const he::Keypair& keys() const { return keys_; }

  Vector gradient(const std::vector<he::Ciphertext>& products, std::size_t batch_size) const;

  // Coordinator-updates mode.
  void init_theta(const Vector& theta_a, const Vector& theta_b);
  std::pair<Vector, Vector> update(const Vector& g_a, const Vector& g_b);

 private:
  he::Keypair keys_;
  he::CodecParams codec_;
  double learning_rate_;
  Vector theta_a_;
  Vector theta_b_;
};

// Encryption-free Taylor gradient on batch S; throws std::invalid_argument
// for an empty batch.
std::pair<Vector, Vector> plaintext_gradient(const Vector& theta_a, const Vector& theta_b, const Matrix& x_a,
                                             const Matrix& x_b, const Vector& label_term,
                                             const std::vector<std::size_t>& batch);

Vector label_term(const Vector& y, LabelEncoding encoding);

// Batches for one epoch. Partition of [0, n) into chunks of batch_size.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed, int epoch,
                                                   bool reshuffle_each_epoch);

Vector initial_theta(std::size_t dim, const TrainConfig& config, Role role);

// One protocol round on batch S, appended to transcript.
void run_round(ActiveParty& a, PassiveParty& b, Coordinator& c, const std::vector<std::size_t>& batch, int epoch,
               std::uint64_t round_seed, Transcript& transcript);

struct TrainResult {
  Vector theta_a;
  Vector theta_b;
  Transcript transcript;
  he::Keypair coordinator_keys;
};

TrainResult train(const VerticalDataset& data, const TrainConfig& config);

// Pure plaintext Taylor-SGD over the same batch schedule. Returns theta
// before every round plus the final pair (rounds + 1 snapshots).
struct PlainTrajectory {
  std::vector<Vector> theta_a;
  std::vector<Vector> theta_b;
};
PlainTrajectory train_plaintext(const VerticalDataset& data, const TrainConfig& config);

// theta_A x_A + theta_B x_B
double predict_score(const Vector& theta_a, const Vector& theta_b, const Vector& x_a, const Vector& x_b);
Vector predict_scores(const Vector& theta_a, const Vector& theta_b, const Matrix& x_a, const Matrix& x_b);
// 1 iff 1/4 * score + 1/2 >= threshold.
int predict_label(double score, double threshold = 0.5);
double accuracy(const Vector& theta_a, const Vector& theta_b, const VerticalDataset& data, double threshold = 0.5);

}  // namespace vfl::logreg

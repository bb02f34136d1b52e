#include "vfl/logreg/protocol.hpp"

#include "vfl/common/error.hpp"
#include "vfl/common/rng.hpp"
#include "vfl/he/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace vfl::logreg {
namespace {

he::PlaintextWord word_from_units(const he::PublicKey& pk, std::int64_t units) {
  mpz_class v;
  mpz_set_si(v.get_mpz_t(), units);
  if (v < 0) v += pk.n;
  return {v};
}

std::int64_t quantize_or_abort(double x, int frac_bits, const std::string& step) {
  try {
    return he::quantize(x, frac_bits);
  } catch (const std::overflow_error& e) {
    throw ProtocolAbort(step, e.what());
  }
}

he::IntMatrix quantize_rows(const Matrix& x, const std::vector<std::size_t>& batch, int frac_bits,
                            const std::string& step) {
  he::IntMatrix w(static_cast<Eigen::Index>(batch.size()), x.cols());
  for (std::size_t r = 0; r < batch.size(); ++r)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      w(static_cast<Eigen::Index>(r), j) =
          quantize_or_abort(x(static_cast<Eigen::Index>(batch[r]), j), frac_bits, step);
  return w;
}

void check_batch(const std::vector<std::size_t>& batch, Eigen::Index rows) {
  if (batch.empty()) throw std::invalid_argument("empty mini-batch");
  for (const auto i : batch)
    if (static_cast<Eigen::Index>(i) >= rows) throw std::out_of_range("batch index outside the dataset");
}

}  // namespace

void TrainConfig::validate(std::size_t n_samples) const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (batch_size > n_samples)
    throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds the " + std::to_string(n_samples) +
                      " training samples");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (key_bits < he::kMinKeyBits || key_bits % 2 != 0) throw ConfigError("key_bits must be even and >= 1088");
  try {
    codec.validate(key_bits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

Vector label_term(const Vector& y, LabelEncoding encoding) {
  if (encoding == LabelEncoding::kZeroOne) return y;
  return (2.0 * y.array() - 1.0).matrix();
}

std::pair<Vector, Vector> plaintext_gradient(const Vector& theta_a, const Vector& theta_b, const Matrix& x_a,
                                             const Matrix& x_b, const Vector& labels,
                                             const std::vector<std::size_t>& batch) {
  check_batch(batch, x_a.rows());
  Vector ga = Vector::Zero(x_a.cols());
  Vector gb = Vector::Zero(x_b.cols());
  for (const auto i : batch) {
    const auto r = static_cast<Eigen::Index>(i);
    const double residual = 0.25 * x_a.row(r).dot(theta_a) + 0.25 * x_b.row(r).dot(theta_b) - 0.5 * labels(r);
    ga += residual * x_a.row(r).transpose();
    gb += residual * x_b.row(r).transpose();
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  return {ga * inv, gb * inv};
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed, int epoch,
                                                   bool reshuffle_each_epoch) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto rng = make_rng(seed, "logreg.batches", reshuffle_each_epoch ? static_cast<std::uint64_t>(epoch) : 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(batch.begin(), batch.end());
    out.push_back(std::move(batch));
  }
  return out;
}

Vector initial_theta(std::size_t dim, const TrainConfig& config, Role role) {
  if (!config.random_init) return Vector::Zero(static_cast<Eigen::Index>(dim));
  auto rng = make_rng(config.seed, "logreg.init", static_cast<std::uint64_t>(role));
  std::normal_distribution<double> dist(0.0, 0.01);
  Vector theta(static_cast<Eigen::Index>(dim));
  for (auto& t : theta) t = dist(rng);
  return theta;
}

// ---------------------------------------------------------------- parties

ActiveParty::ActiveParty(const he::PublicKey& pk, const Matrix& x_a, const Vector& y, PartyState state,
                         const TrainConfig& config)
    : pk_(pk), x_(x_a), label_term_(label_term(y, config.labels)), state_(std::move(state)), codec_(config.codec) {}

std::vector<he::Ciphertext> ActiveParty::encrypt_u(const std::vector<std::size_t>& batch, std::uint64_t round_seed,
                                                   std::vector<std::int64_t>& units_out) const {
  units_out.clear();
  std::vector<he::PlaintextWord> words;
  words.reserve(batch.size());
  for (const auto i : batch) {
    const auto r = static_cast<Eigen::Index>(i);
    const double u = 0.25 * x_.row(r).dot(state_.theta) - 0.5 * label_term_(r);
    const std::int64_t q = quantize_or_abort(u, codec_.frac_bits, "A: encode u");
    units_out.push_back(q);
    words.push_back(word_from_units(pk_, q));
  }
  return he::encrypt_batch(pk_, words, derive_seed(round_seed, fnv1a("A.u")));
}

std::vector<he::Ciphertext> ActiveParty::products(const std::vector<he::Ciphertext>& enc_v,
                                                  const std::vector<std::size_t>& batch) const {
  return he::cipher_matvec(pk_, enc_v, quantize_rows(x_, batch, codec_.frac_bits, "A: encode X_A"));
}

void ActiveParty::apply_gradient(const Vector& g) { state_.theta -= state_.learning_rate * g; }

PassiveParty::PassiveParty(const he::PublicKey& pk, const Matrix& x_b, PartyState state, const TrainConfig& config)
    : pk_(pk), x_(x_b), state_(std::move(state)), codec_(config.codec) {}

std::vector<he::Ciphertext> PassiveParty::compute_v(const std::vector<he::Ciphertext>& enc_u,
                                                    const std::vector<std::size_t>& batch,
                                                    std::uint64_t round_seed) const {
  if (enc_u.size() != batch.size()) throw ProtocolAbort("B: compute v", "u length differs from batch size");
  std::vector<he::PlaintextWord> words;
  words.reserve(batch.size());
  for (const auto i : batch) {
    const double w = 0.25 * x_.row(static_cast<Eigen::Index>(i)).dot(state_.theta);
    words.push_back(word_from_units(pk_, quantize_or_abort(w, codec_.frac_bits, "B: encode theta_B x")));
  }
  auto enc = he::encrypt_batch(pk_, words, derive_seed(round_seed, fnv1a("B.v")));
  for (std::size_t k = 0; k < enc.size(); ++k) enc[k] = he::add_cipher(pk_, enc[k], enc_u[k]);
  return enc;
}

std::vector<he::Ciphertext> PassiveParty::products(const std::vector<he::Ciphertext>& enc_v,
                                                   const std::vector<std::size_t>& batch) const {
  return he::cipher_matvec(pk_, enc_v, quantize_rows(x_, batch, codec_.frac_bits, "B: encode X_B"));
}

void PassiveParty::apply_gradient(const Vector& g) { state_.theta -= state_.learning_rate * g; }

Coordinator::Coordinator(he::Keypair keys, const TrainConfig& config)
    : keys_(std::move(keys)), codec_(config.codec), learning_rate_(config.learning_rate) {}

Vector Coordinator::gradient(const std::vector<he::Ciphertext>& products, std::size_t batch_size) const {
  const auto words = he::decrypt_batch(keys_.sk, products);
  Vector g(static_cast<Eigen::Index>(words.size()));
  for (std::size_t j = 0; j < words.size(); ++j)
    g(static_cast<Eigen::Index>(j)) =
        he::decode_signed(keys_.pk, words[j], codec_, 2) / static_cast<double>(batch_size);
  return g;
}

void Coordinator::init_theta(const Vector& theta_a, const Vector& theta_b) {
  theta_a_ = theta_a;
  theta_b_ = theta_b;
}

std::pair<Vector, Vector> Coordinator::update(const Vector& g_a, const Vector& g_b) {
  theta_a_ -= learning_rate_ * g_a;
  theta_b_ -= learning_rate_ * g_b;
  return {theta_a_, theta_b_};
}

// ---------------------------------------------------------------- rounds

void run_round(ActiveParty& a, PassiveParty& b, Coordinator& c, const std::vector<std::size_t>& batch, int epoch,
               std::uint64_t round_seed, Transcript& transcript) {
  if (batch.empty()) throw ProtocolAbort("A: select batch", "empty mini-batch");
  RoundRecord rec;
  rec.round = transcript.rounds.size();
  rec.epoch = epoch;
  rec.batch = batch;
  rec.oracle.theta_a = a.state().theta;
  rec.oracle.theta_b = b.state().theta;

  rec.enc_u = a.encrypt_u(batch, round_seed, rec.a_u_units);
  rec.enc_v = b.compute_v(rec.enc_u, batch, round_seed);
  rec.enc_vxb = b.products(rec.enc_v, batch);
  rec.enc_vxa = a.products(rec.enc_v, batch);

  rec.grad_a = c.gradient(rec.enc_vxa, batch.size());
  rec.grad_b = c.gradient(rec.enc_vxb, batch.size());

  if (transcript.coordinator_updates) {
    auto [ta, tb] = c.update(rec.grad_a, rec.grad_b);
    a.set_theta(ta);
    b.set_theta(tb);
    rec.theta_a_returned = std::move(ta);
    rec.theta_b_returned = std::move(tb);
  } else {
    a.apply_gradient(rec.grad_a);
    b.apply_gradient(rec.grad_b);
  }
  transcript.rounds.push_back(std::move(rec));
}

TrainResult train(const VerticalDataset& data, const TrainConfig& config) {
  data.validate();
  config.validate(data.size());

  TrainResult result;
  result.coordinator_keys = he::keygen(config.key_bits, derive_seed(config.seed, fnv1a("logreg.keygen")));
  Coordinator c(result.coordinator_keys, config);
  const he::PublicKey& pk = c.public_key();

  PartyState sa{Role::kActive, initial_theta(data.d_a(), config, Role::kActive), config.seed, config.learning_rate,
                config.batch_size};
  PartyState sb{Role::kPassive, initial_theta(data.d_b(), config, Role::kPassive), config.seed, config.learning_rate,
                config.batch_size};
  c.init_theta(sa.theta, sb.theta);
  ActiveParty a(pk, data.x_a, data.y, std::move(sa), config);
  PassiveParty b(pk, data.x_b, std::move(sb), config);

  Transcript& t = result.transcript;
  t.pk = pk;
  t.learning_rate = config.learning_rate;
  t.coordinator_updates = config.coordinator_updates;
  t.labels = config.labels;
  t.codec = config.codec;
  t.d_a = data.d_a();
  t.d_b = data.d_b();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : make_batches(data.size(), config.batch_size, config.seed, epoch,
                                          config.reshuffle_each_epoch)) {
      const std::uint64_t round_seed = derive_seed(config.seed, fnv1a("logreg.round"), t.rounds.size());
      run_round(a, b, c, batch, epoch, round_seed, t);
    }
  }
  result.theta_a = a.state().theta;
  result.theta_b = b.state().theta;
  return result;
}

PlainTrajectory train_plaintext(const VerticalDataset& data, const TrainConfig& config) {
  data.validate();
  config.validate(data.size());
  const Vector labels = label_term(data.y, config.labels);
  PlainTrajectory out;
  Vector ta = initial_theta(data.d_a(), config, Role::kActive);
  Vector tb = initial_theta(data.d_b(), config, Role::kPassive);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& batch : make_batches(data.size(), config.batch_size, config.seed, epoch,
                                          config.reshuffle_each_epoch)) {
      out.theta_a.push_back(ta);
      out.theta_b.push_back(tb);
      const auto [ga, gb] = plaintext_gradient(ta, tb, data.x_a, data.x_b, labels, batch);
      ta -= config.learning_rate * ga;
      tb -= config.learning_rate * gb;
    }
  }
  out.theta_a.push_back(ta);
  out.theta_b.push_back(tb);
  return out;
}

double predict_score(const Vector& theta_a, const Vector& theta_b, const Vector& x_a, const Vector& x_b) {
  if (theta_a.size() != x_a.size() || theta_b.size() != x_b.size())
    throw std::invalid_argument("predict: coefficient and feature dimensions differ");
  return theta_a.dot(x_a) + theta_b.dot(x_b);
}

Vector predict_scores(const Vector& theta_a, const Vector& theta_b, const Matrix& x_a, const Matrix& x_b) {
  if (theta_a.size() != x_a.cols() || theta_b.size() != x_b.cols() || x_a.rows() != x_b.rows())
    throw std::invalid_argument("predict: coefficient and feature dimensions differ");
  return x_a * theta_a + x_b * theta_b;
}

int predict_label(double score, double threshold) { return 0.25 * score + 0.5 >= threshold ? 1 : 0; }

double accuracy(const Vector& theta_a, const Vector& theta_b, const VerticalDataset& data, double threshold) {
  if (data.size() == 0) return 0.0;
  const Vector scores = predict_scores(theta_a, theta_b, data.x_a, data.x_b);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (predict_label(scores(i), threshold) == static_cast<int>(data.y(i))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace vfl::logreg

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vfl/common/error.hpp"
#include "vfl/harness/synthetic.hpp"
#include "vfl/logreg/protocol.hpp"
#include "vfl/logreg/transcript_io.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

using namespace vfl;
using namespace vfl::logreg;

namespace {

VerticalDataset small_data(std::size_t n, std::size_t d_a, std::size_t d_b, std::uint64_t seed) {
  harness::SyntheticSpec s;
  s.n = n;
  s.d_a = d_a;
  s.d_b = d_b;
  s.seed = seed;
  return harness::gen_synthetic(s);
}

// Taylor surrogate loss whose gradient the protocol computes.
double surrogate(const Vector& ta, const Vector& tb, const VerticalDataset& d, const Vector& t,
                 const std::vector<std::size_t>& batch) {
  double sum = 0.0;
  for (const auto i : batch) {
    const auto r = static_cast<Eigen::Index>(i);
    const double s = d.x_a.row(r).dot(ta) + d.x_b.row(r).dot(tb);
    sum += s * s / 8.0 - 0.5 * t(r) * s;
  }
  return sum / static_cast<double>(batch.size());
}

TrainConfig fast_config() {
  TrainConfig c;
  c.key_bits = he::kMinKeyBits;
  c.epochs = 3;
  c.batch_size = 10;
  c.learning_rate = 0.05;
  c.seed = 21;
  return c;
}

}  // namespace

TEST_CASE("plaintext gradient matches central finite differences") {
  const auto d = small_data(30, 3, 2, 1);
  const Vector t = label_term(d.y, LabelEncoding::kZeroOne);
  Vector ta(3), tb(2);
  ta << 0.3, -0.2, 0.1;
  tb << -0.4, 0.25;
  const std::vector<std::size_t> batch{1, 4, 7, 9, 15, 22, 29};
  const auto [ga, gb] = plaintext_gradient(ta, tb, d.x_a, d.x_b, t, batch);
  const double h = 1e-6;
  for (Eigen::Index j = 0; j < 3; ++j) {
    Vector p = ta, m = ta;
    p(j) += h;
    m(j) -= h;
    CHECK(ga(j) == doctest::Approx((surrogate(p, tb, d, t, batch) - surrogate(m, tb, d, t, batch)) / (2 * h)).epsilon(1e-6));
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    Vector p = tb, m = tb;
    p(j) += h;
    m(j) -= h;
    CHECK(gb(j) == doctest::Approx((surrogate(ta, p, d, t, batch) - surrogate(ta, m, d, t, batch)) / (2 * h)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(plaintext_gradient(ta, tb, d.x_a, d.x_b, t, {}), std::invalid_argument);
}

TEST_CASE("label encodings") {
  Vector y(3);
  y << 0, 1, 1;
  CHECK(label_term(y, LabelEncoding::kZeroOne) == y);
  Vector pm(3);
  pm << -1, 1, 1;
  CHECK(label_term(y, LabelEncoding::kPlusMinusOne) == pm);
}

TEST_CASE("batches partition the samples and recur across epochs") {
  const auto e0 = make_batches(23, 5, 9, 0, false);
  const auto e1 = make_batches(23, 5, 9, 1, false);
  CHECK(e0 == e1);
  REQUIRE(e0.size() == 5);
  CHECK(e0.back().size() == 3);
  std::set<std::size_t> seen;
  for (const auto& b : e0) {
    CHECK(std::is_sorted(b.begin(), b.end()));
    for (const auto i : b) CHECK(seen.insert(i).second);
  }
  CHECK(seen.size() == 23);
  const auto r0 = make_batches(23, 5, 9, 0, true);
  const auto r1 = make_batches(23, 5, 9, 1, true);
  CHECK(r0 != r1);
}

TEST_CASE("config validation") {
  auto c = fast_config();
  CHECK_NOTHROW(c.validate(40));
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(40), ConfigError);
  c = fast_config();
  c.batch_size = 41;
  CHECK_THROWS_AS(c.validate(40), ConfigError);
  c = fast_config();
  c.key_bits = 1024;
  CHECK_THROWS_AS(c.validate(40), ConfigError);
  c = fast_config();
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(40), ConfigError);
}

TEST_CASE("encrypted training follows plaintext Taylor SGD round by round") {
  const auto d = small_data(40, 2, 3, 2);
  const auto cfg = fast_config();
  const auto enc = train(d, cfg);
  const auto plain = train_plaintext(d, cfg);
  REQUIRE(enc.transcript.rounds.size() == 12);
  REQUIRE(plain.theta_a.size() == 13);
  double worst = 0.0;
  for (std::size_t r = 0; r < enc.transcript.rounds.size(); ++r) {
    const auto& o = enc.transcript.rounds[r].oracle;
    worst = std::max(worst, (o.theta_a - plain.theta_a[r]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (o.theta_b - plain.theta_b[r]).cwiseAbs().maxCoeff());
  }
  worst = std::max(worst, (enc.theta_a - plain.theta_a.back()).cwiseAbs().maxCoeff());
  worst = std::max(worst, (enc.theta_b - plain.theta_b.back()).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-9);
}

TEST_CASE("coordinator-updates mode trains the same coefficients") {
  const auto d = small_data(30, 2, 2, 3);
  auto cfg = fast_config();
  cfg.epochs = 2;
  const auto base = train(d, cfg);
  cfg.coordinator_updates = true;
  const auto upd = train(d, cfg);
  CHECK((base.theta_a - upd.theta_a).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((base.theta_b - upd.theta_b).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(upd.transcript.rounds.front().theta_b_returned.size() == 2);
}

TEST_CASE("training is deterministic per seed") {
  const auto d = small_data(20, 2, 2, 4);
  auto cfg = fast_config();
  cfg.epochs = 1;
  const auto a = train(d, cfg);
  const auto b = train(d, cfg);
  CHECK(a.theta_a == b.theta_a);
  CHECK(a.transcript.rounds[0].enc_v == b.transcript.rounds[0].enc_v);
}

TEST_CASE("transcript round trip") {
  const auto d = small_data(20, 2, 2, 5);
  auto cfg = fast_config();
  cfg.epochs = 1;
  const auto res = train(d, cfg);
  std::stringstream io;
  write_transcript(io, res.transcript, true);
  const auto back = read_transcript(io);
  CHECK(back.pk.n == res.transcript.pk.n);
  CHECK(back.learning_rate == res.transcript.learning_rate);
  CHECK(back.d_b == 2);
  REQUIRE(back.rounds.size() == res.transcript.rounds.size());
  for (std::size_t r = 0; r < back.rounds.size(); ++r) {
    CHECK(back.rounds[r].batch == res.transcript.rounds[r].batch);
    CHECK(back.rounds[r].enc_v == res.transcript.rounds[r].enc_v);
    CHECK(back.rounds[r].a_u_units == res.transcript.rounds[r].a_u_units);
    CHECK(back.rounds[r].grad_b == res.transcript.rounds[r].grad_b);
  }
}

TEST_CASE("malformed transcripts are rejected") {
  std::stringstream empty;
  CHECK_THROWS_AS(read_transcript(empty), ConfigError);
  std::stringstream junk("{not json\n");
  CHECK_THROWS_AS(read_transcript(junk), ConfigError);
}

TEST_CASE("prediction threshold") {
  CHECK(predict_label(0.0) == 1);
  CHECK(predict_label(-1e-9) == 0);
  CHECK(predict_label(4.0, 1.5) == 1);
  CHECK(predict_label(3.9, 1.5) == 0);
}

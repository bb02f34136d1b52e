#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "vfl/common/error.hpp"
#include "vfl/harness/synthetic.hpp"
#include "vfl/he/kernels.hpp"
#include "vfl/sboost/binning.hpp"
#include "vfl/sboost/gradients.hpp"
#include "vfl/sboost/histogram.hpp"
#include "vfl/sboost/protocol.hpp"
#include "vfl/sboost/reference.hpp"
#include "vfl/sboost/split.hpp"
#include "vfl/sboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace vfl;
using namespace vfl::sboost;

namespace {

// Equal-frequency boundaries straight from the sorted column.
std::vector<double> oracle_bounds(std::vector<double> col, int k) {
  std::sort(col.begin(), col.end());
  const double n = static_cast<double>(col.size());
  std::vector<double> out;
  for (int q = 1; q < k; ++q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * n / k)) - 1;
    const double v = col[idx];
    if (v >= col.back()) continue;
    if (!out.empty() && out.back() == v) continue;
    out.push_back(v);
  }
  return out;
}

VerticalDataset data(std::size_t n, std::uint64_t seed) {
  harness::SyntheticSpec s;
  s.n = n;
  s.d_a = 3;
  s.d_b = 3;
  s.seed = seed;
  return harness::gen_synthetic(s);
}

BoostConfig small_config() {
  BoostConfig c;
  c.key_bits = he::kMinKeyBits;
  c.trees = 2;
  c.max_depth = 3;
  c.bins = 8;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("equal-frequency bins on a small column") {
  const std::vector<double> col{5, 1, 4, 2, 3, 9, 7, 8, 6, 10};
  const auto p = build_bins(col, 4);
  CHECK(p.upper == std::vector<double>{3, 5, 8});
  CHECK(p.bin_count() == 4);
  CHECK(p.assignment == std::vector<int>{1, 0, 1, 0, 0, 3, 2, 2, 2, 3});
  CHECK(p.bin_of(3.0) == 0);
  CHECK(p.bin_of(3.5) == 1);
  CHECK(p.bin_of(100.0) == 3);
  CHECK(p.counts() == std::vector<std::size_t>{3, 2, 3, 2});
}

TEST_CASE("bins agree with the sorted-quantile oracle") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> small(0, 6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> col(200 + 37 * trial);
    for (auto& v : col) v = trial % 2 ? nd(rng) : static_cast<double>(small(rng));
    for (const int k : {4, 8, 32}) {
      const auto p = build_bins(col, k);
      CHECK(p.upper == oracle_bounds(col, k));
      for (std::size_t i = 0; i < col.size(); ++i) CHECK(p.assignment[i] == p.bin_of(col[i]));
    }
  }
}

TEST_CASE("extremes are the min and max of each bin") {
  const std::vector<double> col{5, 1, 4, 2, 3, 9, 7, 8, 6, 10};
  const auto ext = build_bins(col, 4).extremes(col);
  CHECK(ext[0] == std::make_pair(1.0, 3.0));
  CHECK(ext[1] == std::make_pair(4.0, 5.0));
  CHECK(ext[3] == std::make_pair(9.0, 10.0));
}

TEST_CASE("constant columns collapse to one bin with a warning") {
  std::vector<std::string> warnings;
  const std::vector<double> col(20, 1.5);
  const auto p = build_bins(col, 8, 0, &warnings);
  CHECK(p.bin_count() == 1);
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(build_bins(col, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_bins(std::vector<double>{}, 4), std::invalid_argument);
}

TEST_CASE("logistic and squared gradients") {
  Vector y(2), yh(2);
  y << 1, 0;
  yh << 0, std::log(3.0);
  const auto g = compute_gradients(y, yh, Objective::kLogistic);
  CHECK(g[0].g == doctest::Approx(-0.5));
  CHECK(g[0].h == doctest::Approx(0.25));
  CHECK(g[1].g == doctest::Approx(0.75));
  CHECK(g[1].h == doctest::Approx(0.1875));
  const auto s = compute_gradients(y, yh, Objective::kSquared);
  CHECK(s[0].g == doctest::Approx(-1.0));
  CHECK(s[1].h == 1.0);
  const auto q = quantize_gradients(g, 24);
  CHECK(q.g[0] == -8388608);
  CHECK(q.h[0] == 4194304);
}

TEST_CASE("split gain") {
  CHECK(split_gain(-2.0, 3.0, -1.0, 5.0, 1.0, 0.0) == doctest::Approx(0.5833333333));
  CHECK(split_gain(-2.0, 3.0, -1.0, 5.0, 1.0, 0.5) == doctest::Approx(0.0833333333));
  CHECK(split_gain(1.0, 2.0, 2.0, 4.0, 1.0, 0.0) == doctest::Approx(-1.0 / 15.0));
}

TEST_CASE("best split prefers A on ties and skips empty children") {
  const int f = 0;
  const std::int64_t u = std::int64_t{1} << f;
  FeatureHistogram h;
  h.g = {-2 * u, 0, 1 * u};
  h.h = {3 * u, 0, 2 * u};
  h.count = {3, 0, 2};
  const SplitParams params{1.0, 0.0, f};
  const auto a = find_best_split({h}, {h}, -1 * u, 5 * u, params);
  CHECK(a.valid);
  CHECK(a.owner == Owner::kActive);
  CHECK(a.bin == 0);
  CHECK(a.gain == doctest::Approx(0.5833333333));

  FeatureHistogram better = h;
  better.g = {-3 * u, 0, 2 * u};
  const auto b = find_best_split({h}, {better}, -1 * u, 5 * u, params);
  CHECK(b.owner == Owner::kPassive);

  FeatureHistogram flat;
  flat.g = {0, 0};
  flat.h = {u, u};
  flat.count = {1, 1};
  CHECK_FALSE(find_best_split({flat}, {}, 0, 2 * u, params).valid);
}

TEST_CASE("leaf weight") {
  const std::int64_t one = std::int64_t{1} << 24;
  CHECK(leaf_weight(-2 * one, 3 * one, 24, 1.0, 0.3) == doctest::Approx(0.15));
  CHECK(leaf_weight(0, one, 24, 1.0, 0.3) == 0.0);
}

TEST_CASE("parallel histogram aggregation matches the serial reference") {
  const auto& keys = test::small_keys();
  const auto d = data(60, 1);
  const auto parts = bin_features(d.x_b, 8);
  std::vector<he::PlaintextWord> g, h;
  const auto codec = he::CodecParams::layout_default();
  for (std::size_t i = 0; i < d.size(); ++i) {
    g.push_back(he::encode_layout(keys.pk, 0.01 * static_cast<double>(i) - 0.3, 0, codec));
    h.push_back(he::encode_layout(keys.pk, 0.25, 0, codec));
  }
  const auto eg = he::encrypt_batch(keys.pk, g, 1);
  const auto eh = he::encrypt_batch(keys.pk, h, 2);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < d.size(); i += 2) members.push_back(i);
  const auto par = aggregate_features(keys.pk, eg, eh, parts, members, codec.max_count);
  const auto ser = aggregate_features_serial(keys.pk, eg, eh, parts, members, codec.max_count);
  REQUIRE(par.size() == ser.size());
  for (std::size_t f = 0; f < par.size(); ++f) {
    CHECK(par[f].g == ser[f].g);
    CHECK(par[f].h == ser[f].h);
    CHECK(par[f].count == ser[f].count);
    for (std::size_t k = 0; k < par[f].g.size(); ++k) {
      double expect = 0.0;
      for (const auto i : members)
        if (parts[f].assignment[i] == static_cast<int>(k)) expect += 0.01 * static_cast<double>(i) - 0.3;
      const auto dec = he::decode_layout(he::decrypt(keys.sk, par[f].g[k]), par[f].count[k], codec);
      CHECK(dec.value_sum == doctest::Approx(expect).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(aggregate_features(keys.pk, eg, eh, parts, members, 2), std::invalid_argument);
}

TEST_CASE("encrypted training matches the plaintext reference") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto d = data(80, seed);
    auto cfg = small_config();
    cfg.seed = seed;
    const auto enc = train_ensemble(d, cfg);
    const auto ref = train_reference(d, cfg);
    CHECK(same_structure(enc.model, ref.model, 0.0));
    CHECK(enc.model.trees == ref.model.trees);
    CHECK((enc.train_margin - ref.train_margin).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("node views carry A's decrypted bin sums") {
  const auto d = data(60, 4);
  auto cfg = small_config();
  cfg.trees = 1;
  const auto res = train_ensemble(d, cfg);
  REQUIRE_FALSE(res.transcript.nodes.empty());
  const auto& root = res.transcript.nodes.front();
  CHECK(root.depth == 0);
  CHECK(root.members.size() == 60);
  REQUIRE(root.features.size() == 3);
  for (std::size_t f = 0; f < 3; ++f) {
    std::uint64_t total = 0;
    for (const auto& b : root.features[f]) {
      total += b.count;
      CHECK(b.g_low == 0);
    }
    CHECK(total == 60);
  }
}

TEST_CASE("predictions follow the model") {
  const auto d = data(80, 5);
  const auto cfg = small_config();
  const auto res = train_ensemble(d, cfg);
  const Vector scores = predict_scores(res.model, d.x_a, d.x_b, res.b_partitions);
  CHECK((scores - res.train_margin).cwiseAbs().maxCoeff() < 1e-12);
  const auto labels = predict_labels(res.model, d.x_a, d.x_b, res.b_partitions);
  for (Eigen::Index i = 0; i < scores.size(); ++i) CHECK(labels[static_cast<std::size_t>(i)] == (scores(i) >= 0.0 ? 1 : 0));
  CHECK(accuracy(labels, d.y) > 0.6);
}

TEST_CASE("structure comparison notices changes") {
  const auto d = data(60, 6);
  const auto res = train_reference(d, small_config());
  auto other = res.model;
  CHECK(same_structure(res.model, other));
  other.trees[0].nodes[0].feature += 1;
  CHECK_FALSE(same_structure(res.model, other));
  other = res.model;
  for (auto& n : other.trees[0].nodes)
    if (n.is_leaf) {
      n.weight += 1e-9;
      break;
    }
  CHECK_FALSE(same_structure(res.model, other, 0.0));
  CHECK(same_structure(res.model, other, 1e-6));
}

TEST_CASE("config validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate(50));
  c.bins = 1;
  CHECK_THROWS_AS(c.validate(50), ConfigError);
  c = small_config();
  c.trees = -1;
  CHECK_THROWS_AS(c.validate(50), ConfigError);
  c = small_config();
  c.lambda = 0.0;
  CHECK_THROWS_AS(c.validate(50), ConfigError);
}

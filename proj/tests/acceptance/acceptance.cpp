// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures. Arguments: criterion numbers to run (default all) and
// --out <dir> for the recorded sweep tables.

#include "revsum_oracle.hpp"
#include "vfl/common/rng.hpp"
#include "vfl/harness/config.hpp"
#include "vfl/harness/csv.hpp"
#include "vfl/harness/experiment.hpp"
#include "vfl/harness/synthetic.hpp"
#include "vfl/he/paillier.hpp"
#include "vfl/logreg/protocol.hpp"
#include "vfl/revmul/attack.hpp"
#include "vfl/revsum/encoding.hpp"
#include "vfl/revsum/exploit.hpp"
#include "vfl/revsum/reversion.hpp"
#include "vfl/sboost/protocol.hpp"
#include "vfl/sboost/reference.hpp"

#include <gmpxx.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace vfl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path g_out = "acceptance_out";

harness::ExperimentConfig experiment(const std::string& text) {
  std::istringstream in(text);
  return harness::ExperimentConfig::from_config(harness::Config::parse(in, "acceptance"));
}

// Runs a sweep through the CLI command path and reads the written table back.
harness::CsvTable recorded_sweep(const std::string& name, const std::string& text) {
  const auto cfg = experiment(text);
  const auto dir = g_out / name;
  const auto files = harness::run_command("sweep", cfg, dir.string());
  std::ifstream in(files.at(0));
  return harness::read_csv(in, files.at(0));
}

std::size_t column(const harness::CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw std::runtime_error("missing column " + name);
}

// value -> mean of a metric over replicates, in sweep order. Fails on error rows.
std::vector<std::pair<std::string, double>> means(const harness::CsvTable& t, const std::string& metric,
                                                  std::string& problems) {
  const auto v = column(t, "value");
  const auto s = column(t, "status");
  const auto m = column(t, metric);
  std::vector<std::pair<std::string, double>> out;
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& row : t.rows) {
    if (row[s] != "ok") problems += row[v] + ": " + row[s] + "; ";
    if (!acc.count(row[v])) out.emplace_back(row[v], 0.0);
    auto& a = acc[row[v]];
    a.first += std::stod(row[m]);
    ++a.second;
  }
  for (auto& [value, mean] : out) mean = acc[value].first / acc[value].second;
  return out;
}

std::string list(const std::vector<std::pair<std::string, double>>& xs, const char* f = "%.4f") {
  std::string out;
  for (const auto& [v, x] : xs) out += (out.empty() ? "" : ", ") + v + "->" + fmt(f, x);
  return out;
}

VerticalDataset synthetic(std::size_t n, std::size_t d_a, std::size_t d_b, std::uint64_t seed,
                          const std::string& b_dist = "normal(0,1)") {
  harness::SyntheticSpec s;
  s.n = n;
  s.d_a = d_a;
  s.d_b = d_b;
  s.seed = seed;
  s.b_dist = harness::DistributionSpec::parse(b_dist);
  return harness::gen_synthetic(s);
}

// ---------------------------------------------------------------------------

Outcome c1_he_identities() {
  Stopwatch clock;
  const auto keys = he::keygen(2048, 101);
  const auto& pk = keys.pk;
  gmp_randclass rng(gmp_randinit_default);
  rng.seed(20240601);
  std::size_t add_ok = 0, mul_ok = 0;
  const int cases = 1000;
  for (int i = 0; i < cases; ++i) {
    const mpz_class m1 = rng.get_z_range(pk.n);
    const mpz_class m2 = rng.get_z_range(pk.n);
    const mpz_class k = rng.get_z_range(pk.n);
    const auto c1 = he::encrypt(pk, {m1}, 2 * static_cast<std::uint64_t>(i) + 1);
    const auto c2 = he::encrypt(pk, {m2}, 2 * static_cast<std::uint64_t>(i) + 2);
    mpz_class want = (m1 + m2) % pk.n;
    if (he::decrypt(keys.sk, he::add_cipher(pk, c1, c2)).raw == want) ++add_ok;
    want = (m1 * k) % pk.n;
    if (he::decrypt(keys.sk, he::mul_plain(pk, c1, {k})).raw == want) ++mul_ok;
  }
  const double t = clock.seconds();
  return {add_ok == cases && mul_ok == cases && t < 60.0,
          fmt("addition %zu/%d, scalar multiplication %zu/%d exact at 2048 bits in %.1f s (limit 60 s)", add_ok, cases,
              mul_ok, cases, t)};
}

struct LogregRun {
  VerticalDataset data;
  harness::RevmulRun run;
  logreg::TrainConfig config;
  double seconds = 0.0;
};

const LogregRun& logreg_run() {
  static const LogregRun r = [] {
    LogregRun out;
    out.data = synthetic(200, 4, 4, 2024);
    out.config.epochs = 100;
    out.config.batch_size = 50;
    out.config.learning_rate = 0.05;
    out.config.key_bits = 2048;
    out.config.seed = 7;
    Stopwatch clock;
    out.run = harness::run_revmul(out.data, out.config, 1e-10);
    out.seconds = clock.seconds();
    return out;
  }();
  return r;
}

Outcome c2_logreg_parity() {
  const auto& r = logreg_run();
  const auto plain = logreg::train_plaintext(r.data, r.config);
  const auto& rounds = r.run.trained.transcript.rounds;
  if (plain.theta_a.size() != rounds.size() + 1) return {false, "trajectory lengths differ"};
  double worst = 0.0;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    worst = std::max(worst, (rounds[t].oracle.theta_a - plain.theta_a[t]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (rounds[t].oracle.theta_b - plain.theta_b[t]).cwiseAbs().maxCoeff());
  }
  worst = std::max(worst, (r.run.trained.theta_a - plain.theta_a.back()).cwiseAbs().maxCoeff());
  worst = std::max(worst, (r.run.trained.theta_b - plain.theta_b.back()).cwiseAbs().maxCoeff());
  return {worst <= 1e-6, fmt("%zu rounds, max |theta_enc - theta_plain| = %.3g (limit 1e-6)", rounds.size(), worst)};
}

Outcome c3_revmul_full() {
  const auto& r = logreg_run();
  const auto& rep = r.run.leakage;
  bool full = !rep.batches.empty();
  for (const auto& b : rep.batches) full = full && b.rank == static_cast<int>(rep.d_b);
  const bool pass = full && rep.max_error >= 0.0 && rep.max_error <= 1e-6 && rep.recovered_samples == r.data.size() &&
                    r.seconds < 300.0;
  return {pass, fmt("%zu batches, min rank %d of d_B=%zu, recovered %zu/%zu, max error %.3g (limit 1e-6), %.1f s "
                    "train+attack (limit 300 s)",
                    rep.batches.size(), rep.min_rank, rep.d_b, rep.recovered_samples, r.data.size(), rep.max_error,
                    r.seconds)};
}

Outcome c4_batch_trend() {
  const auto t = recorded_sweep("c4_batch_size",
                                "seed = 1\n"
                                "data.n = 200\n"
                                "data.d_a = 4\n"
                                "data.d_b = 12\n"
                                "data.train_fraction = 1\n"
                                "protocol.name = logreg\n"
                                "protocol.key_bits = 1088\n"
                                "protocol.epochs = 20\n"
                                "protocol.learning_rate = 0.05\n"
                                "attack.name = revmul\n"
                                "sweep.kind = batch_size\n"
                                "sweep.values = 25, 50, 100, full\n");
  std::string problems;
  const auto ranks = means(t, "min_rank", problems);
  bool pass = problems.empty() && ranks.size() == 4;
  for (std::size_t i = 1; i < ranks.size(); ++i) pass = pass && ranks[i].second <= ranks[i - 1].second;
  return {pass, "min rank by batch size: " + list(ranks, "%.0f") + (problems.empty() ? "" : " errors: " + problems)};
}

Outcome c5_rank_deficiency() {
  // Sparse binary features, more of them than rounds reusing each batch.
  auto data = synthetic(60, 2, 30, 55, "bernoulli(0.1)");
  logreg::TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 20;
  cfg.learning_rate = 0.5;
  cfg.key_bits = 1088;
  cfg.seed = 3;
  const auto run = harness::run_revmul(data, cfg, 1e-10);
  const auto& rep = run.leakage;
  const std::size_t d_b = data.d_b();
  bool ok = rep.batches.size() == 3;
  double leaked = 0.0;
  std::string ranks;
  for (const auto& b : rep.batches) {
    const auto expected = static_cast<int>(std::min(b.equations, d_b));
    ok = ok && b.equations == static_cast<std::size_t>(cfg.epochs - 1) && b.rank == expected && b.rank < int(d_b);
    ok = ok && b.recovered_samples == 0 && b.max_projection_error >= 0.0 && b.max_projection_error <= 1e-6;
    ok = ok && std::fabs(b.leakage_fraction - double(b.rank) / double(d_b)) < 1e-12;
    leaked += b.rank * double(b.batch.size());
    ranks += (ranks.empty() ? "" : ",") + std::to_string(b.rank);
  }
  const double expected_fraction = leaked / double(d_b * data.size());
  ok = ok && rep.leakage_fraction < 1.0 && std::fabs(rep.leakage_fraction - expected_fraction) < 1e-12;
  ok = ok && rep.recovered_samples == 0;
  return {ok, fmt("d_B=%zu, %d equations per batch, ranks {%s}, leakage fraction %.4f, recovered 0, max projection "
                  "error %.3g",
                  d_b, cfg.epochs - 1, ranks.c_str(), rep.leakage_fraction, rep.max_projection_error)};
}

Outcome c6_sboost_parity() {
  std::size_t agree = 0;
  double worst = 0.0;
  const int datasets = 20;
  for (int i = 0; i < datasets; ++i) {
    const auto data = synthetic(120, 3, 3, 600 + i);
    sboost::BoostConfig cfg;
    cfg.key_bits = he::kMinKeyBits;
    cfg.trees = 1 + i % 3;
    cfg.max_depth = 1 + (i / 3) % 3;
    cfg.bins = i % 2 == 0 ? 8 : 16;
    cfg.lambda = 0.5 + 0.25 * (i % 4);
    cfg.seed = 900 + i;
    const auto enc = sboost::train_ensemble(data, cfg);
    const auto ref = sboost::train_reference(data, cfg);
    // Leaf weights within m * 2^-F / lambda, m the leaf's sample count.
    bool same = sboost::same_structure(enc.model, ref.model, std::numeric_limits<double>::infinity()) &&
                enc.model.trees.size() == static_cast<std::size_t>(cfg.trees);
    for (std::size_t t = 0; same && t < enc.model.trees.size(); ++t) {
      for (std::size_t n = 0; n < enc.model.trees[t].nodes.size(); ++n) {
        const auto& a = enc.model.trees[t].nodes[n];
        const auto& b = ref.model.trees[t].nodes[n];
        if (!a.is_leaf) continue;
        const double diff = std::fabs(a.weight - b.weight);
        worst = std::max(worst, diff);
        if (diff > double(a.count) * std::ldexp(1.0, -cfg.codec.frac_bits) / cfg.lambda) same = false;
      }
    }
    if (same) ++agree;
  }
  return {agree == datasets,
          fmt("%zu/%d datasets with identical split sequences, max leaf weight difference %.3g", agree, datasets,
              worst)};
}

struct RevsumFixture {
  harness::TrainTestSplit split;
  sboost::BoostConfig config;
  harness::RevsumRun run;
  double seconds = 0.0;
};

const RevsumFixture& base2_run() {
  static const RevsumFixture f = [] {
    RevsumFixture out;
    out.split = harness::split_train_test(synthetic(2500, 4, 4, 77), 0.8, 78);
    out.config.key_bits = he::kMinKeyBits;
    out.config.trees = 1;
    out.config.max_depth = 3;
    out.config.bins = 32;
    out.config.seed = 79;
    harness::AttackConfig attack;
    attack.k = 2;
    attack.b = 2;
    Stopwatch clock;
    out.run = harness::run_revsum(out.split.train, out.config, attack, 80);
    out.seconds = clock.seconds();
    return out;
  }();
  return f;
}

Outcome c7_base2_exact() {
  const auto& f = base2_run();
  const auto& s = f.run.success;
  bool pass = f.split.train.size() == 2000 && s.per_feature.size() == 4 && f.seconds < 300.0;
  std::string rates;
  for (const double r : s.per_feature) {
    pass = pass && r == 1.0;
    rates += (rates.empty() ? "" : ", ") + fmt("%.4f", r);
  }
  for (const auto w : s.wrong) pass = pass && w == 0;
  return {pass, fmt("n=%zu, encoded %zu, per-feature success {%s}, %.1f s (limit 300 s)", f.split.train.size(),
                    s.encoded, rates.c_str(), f.seconds)};
}

Outcome c8_base_trend() {
  const std::string common =
      "data.train_fraction = 1\n"
      "protocol.name = secureboost\n"
      "protocol.key_bits = 1088\n"
      "protocol.bins = 32\n"
      "attack.name = revsum\n"
      "attack.k = 2\n"
      "sweep.kind = base\n";
  const auto trend = recorded_sweep("c8_base_trend", common +
                                                         "seed = 8\n"
                                                         "data.n = 2000\n"
                                                         "protocol.max_depth = 3\n"
                                                         "sweep.values = 2, 4, 8, 16\n"
                                                         "sweep.replicates = 5\n");
  std::string problems;
  const auto rates = means(trend, "success_rate", problems);
  bool monotone = rates.size() == 4;
  for (std::size_t i = 1; i < rates.size(); ++i) monotone = monotone && rates[i].second <= rates[i - 1].second;

  const auto binding = recorded_sweep("c8_capacity", common +
                                                         "seed = 8\n"
                                                         "data.n = 14400\n"
                                                         "protocol.max_depth = 5\n"
                                                         "sweep.values = 2, 16\n");
  const auto cracked = means(binding, "cracked", problems);
  const auto capacity = means(binding, "capacity", problems);
  const bool binds = capacity.size() == 2 && capacity[0].second < 14400.0;
  const bool more = cracked.size() == 2 && cracked[1].second > cracked[0].second;
  return {problems.empty() && monotone && binds && more,
          "mean success over 5 seeds by base: " + list(rates) + "; n=14400 capacity " + list(capacity, "%.0f") +
              ", cracked " + list(cracked, "%.0f") + (problems.empty() ? "" : " errors: " + problems)};
}

Outcome c9_distributions() {
  bool pass = true;
  std::string detail;
  for (const int b : {2, 3, 4}) {
    const auto t = recorded_sweep("c9_distribution_b" + std::to_string(b),
                                  "seed = 9\n"
                                  "data.n = 2000\n"
                                  "data.train_fraction = 1\n"
                                  "protocol.name = secureboost\n"
                                  "protocol.key_bits = 1088\n"
                                  "protocol.max_depth = 5\n"
                                  "protocol.bins = 32\n"
                                  "attack.name = revsum\n"
                                  "attack.k = 2\n"
                                  "attack.b = " +
                                      std::to_string(b) +
                                      "\n"
                                      "sweep.kind = distribution\n"
                                      "sweep.values = normal(0,1), bernoulli(0.5), exponential(1), uniform(0,1)\n");
    std::string problems;
    const auto rates = means(t, "success_rate", problems);
    pass = pass && problems.empty() && rates.size() == 4;
    for (const auto& [v, r] : rates) pass = pass && r >= 0.95;
    detail += (detail.empty() ? "" : "; ") + fmt("b=%d: ", b) + list(rates) + problems;
  }
  return {pass, detail};
}

Outcome c10_bin_trend() {
  const auto t = recorded_sweep("c10_bins",
                                "seed = 10\n"
                                "data.n = 2000\n"
                                "data.train_fraction = 1\n"
                                "protocol.name = secureboost\n"
                                "protocol.key_bits = 1088\n"
                                "protocol.max_depth = 2\n"
                                "attack.name = revsum\n"
                                "attack.k = 2\n"
                                "attack.b = 16\n"
                                "sweep.kind = bins\n"
                                "sweep.values = 8, 16, 32, 64\n"
                                "sweep.replicates = 3\n");
  std::string problems;
  const auto rates = means(t, "success_rate", problems);
  bool pass = problems.empty() && rates.size() == 4;
  for (std::size_t i = 1; i < rates.size(); ++i) pass = pass && rates[i].second >= rates[i - 1].second;
  return {pass, "mean success over 3 seeds by bins (b=16): " + list(rates) + problems};
}

Outcome c11_stealth() {
  std::size_t identical = 0;
  const int datasets = 20;
  for (int i = 0; i < datasets; ++i) {
    const auto data = synthetic(300, 3, 3, 1100 + i);
    sboost::BoostConfig cfg;
    cfg.key_bits = he::kMinKeyBits;
    cfg.trees = 2;
    cfg.max_depth = 3;
    cfg.bins = 16;
    cfg.seed = 1200 + i;
    const auto plan = revsum::plan_encoding(data.size(), 1 + i % 3, i % 2 == 0 ? 2 : 16, 1300 + i);
    const auto magic = revsum::encode_gradients(plan, data.size(), i % 2);
    const auto clean = sboost::train_ensemble(data, cfg);
    const auto padded = sboost::train_ensemble(data, cfg, &magic);
    if (clean.model.trees == padded.model.trees && sboost::same_structure(clean.model, padded.model, 0.0)) ++identical;
  }
  return {identical == datasets, fmt("%zu/%d datasets grow bit-identical trees with and without magic numbers",
                                     identical, datasets)};
}

Outcome c12_bin_mapping() {
  const auto& f = base2_run();
  const auto& train = f.split.train;
  const auto full = harness::run_binmap(f.run, train, harness::choose_aux(train.size(), harness::kAllSamples, 1));
  const auto few = harness::run_binmap(f.run, train, harness::choose_aux(train.size(), 5, 1));
  bool pass = full.size() == train.d_b() && few.size() == full.size();
  std::string detail;
  for (std::size_t j = 0; j < full.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(full[j].feature);
    const Vector values = train.x_b.col(col);
    const auto& part = f.run.boost.b_partitions.at(full[j].feature);
    const auto truth = part.extremes({values.data(), static_cast<std::size_t>(values.size())});
    const double exact = revsum::exact_bound_fraction(full[j], truth);
    pass = pass && exact == 1.0;
    if (part.bin_count() >= 8) pass = pass && few[j].inferred_fraction < full[j].inferred_fraction;
    detail += (detail.empty() ? "" : "; ") + fmt("f%zu: %d bins, full aux exact %.0f%%, 5 aux inferred %.1f%%",
                                                 full[j].feature, part.bin_count(), 100 * exact,
                                                 100 * few[j].inferred_fraction);
  }
  return {pass, detail};
}

Outcome c13_alternative() {
  const auto& f = base2_run();
  const auto& train = f.split.train;
  bool complete = true;
  for (const auto& o : f.run.orders) complete = complete && o.coverage.size() == train.size();
  const auto bounds = harness::run_binmap(f.run, train, harness::choose_aux(train.size(), harness::kAllSamples, 1));
  const auto alt = revsum::evaluate_alternative(train, f.split.test, f.run.boost, f.run.orders, bounds, f.config);
  const bool pass = complete && alt.excluded_features.empty() && alt.identical_predictions &&
                    alt.alternative_accuracy == alt.original_accuracy;
  return {pass, fmt("full recovery %s, %zu test rows, original accuracy %.4f, alternative %.4f, identical predictions %s",
                    complete ? "yes" : "no", f.split.test.size(), alt.original_accuracy, alt.alternative_accuracy,
                    alt.identical_predictions ? "yes" : "no")};
}

Outcome c14_oracle() {
  revsum::ReverseOptions unbounded;
  unbounded.max_solutions = std::size_t{1} << 24;
  unbounded.step_budget = std::uint64_t{1} << 40;
  std::size_t equal = 0;
  std::size_t largest = 0;
  std::size_t placed = 0;
  const int instances = 50;
  for (int i = 0; i < instances; ++i) {
    const auto inst = test::random_instance(5000 + static_cast<std::uint64_t>(i));
    for (const auto& v : inst.views)
      for (int slot = 0; slot < 2; ++slot)
        largest = std::max(largest, revsum::candidates_for(inst.plan, slot, v.members).size());
    const auto got = revsum::reverse_sums(inst.views, inst.plan, 0, inst.n_samples, unbounded);
    const auto want = test::brute_reverse(inst.views, inst.plan, inst.n_samples);
    bool same = got.size() == want.size();
    for (std::size_t f = 0; same && f < got.size(); ++f) {
      same = got[f].assignment == want[f];
      for (const int a : want[f]) placed += a >= 0 ? 1 : 0;
    }
    if (same) ++equal;
  }
  return {equal == instances && largest <= 20,
          fmt("%zu/%d instances identical to subset enumeration (at most %zu candidates per bin, %zu placements)",
              equal, instances, largest, placed)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--out" && i + 1 < argc)
      g_out = argv[++i];
    else
      only.insert(std::stoi(a));
  }
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, c1_he_identities},   {2, c2_logreg_parity},  {3, c3_revmul_full},     {4, c4_batch_trend},
      {5, c5_rank_deficiency}, {6, c6_sboost_parity},  {7, c7_base2_exact},     {8, c8_base_trend},
      {9, c9_distributions},   {10, c10_bin_trend},    {11, c11_stealth},       {12, c12_bin_mapping},
      {13, c13_alternative},   {14, c14_oracle},
  };
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Stopwatch clock;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), clock.seconds());
    std::fflush(stdout);
  }
  return failures;
}

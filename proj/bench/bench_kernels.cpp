// Serial reference vs OpenMP kernels: encrypt, decrypt, cipher matvec and
// per-feature histogram aggregation. Outputs are compared for equality.

#include "vfl/he/kernels.hpp"
#include "vfl/sboost/binning.hpp"
#include "vfl/sboost/histogram.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>

using namespace vfl;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

int g_mismatches = 0;

void report(const char* name, double serial, double parallel, bool same) {
  if (!same) ++g_mismatches;
  std::printf("%-12s %10.4f %10.4f %8.2fx  %s\n", name, serial, parallel, serial / parallel,
              same ? "identical" : "MISMATCH");
}

bool same_cts(const std::vector<he::Ciphertext>& a, const std::vector<he::Ciphertext>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].value != b[i].value) return false;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel timings"};
  int key_bits = 2048;
  std::size_t n = 256;
  int features = 8;
  int reps = 3;
  app.add_option("--key-bits", key_bits, "Paillier modulus bits")->check(CLI::Range(1088, 8192));
  app.add_option("-n,--samples", n, "ciphertexts per batch")->check(CLI::PositiveNumber);
  app.add_option("--features", features, "features for matvec and histograms")->check(CLI::Range(1, 256));
  app.add_option("--reps", reps, "repetitions; the best time is reported")->check(CLI::Range(1, 100));
  CLI11_PARSE(app, argc, argv);

  const auto keys = he::keygen(key_bits, 1);
  std::mt19937_64 rng(2);
  std::vector<he::PlaintextWord> words(n);
  for (auto& w : words) w.raw = static_cast<unsigned long>(rng() >> 20);

  std::printf("threads %d, key %d bits, n %zu, features %d, best of %d\n", omp_get_max_threads(), key_bits, n,
              features, reps);
  std::printf("%-12s %10s %10s %9s\n", "kernel", "serial s", "omp s", "speedup");

  std::vector<he::Ciphertext> cs, cp;
  const double es = best_of(reps, [&] { cs = he::encrypt_batch_serial(keys.pk, words, 3); });
  const double ep = best_of(reps, [&] { cp = he::encrypt_batch(keys.pk, words, 3); });
  report("encrypt", es, ep, same_cts(cs, cp));

  std::vector<he::PlaintextWord> ds, dp;
  const double dss = best_of(reps, [&] { ds = he::decrypt_batch_serial(keys.sk, cs); });
  const double dpp = best_of(reps, [&] { dp = he::decrypt_batch(keys.sk, cs); });
  bool same = ds.size() == dp.size();
  for (std::size_t i = 0; same && i < ds.size(); ++i) same = ds[i].raw == dp[i].raw;
  report("decrypt", dss, dpp, same);

  he::IntMatrix weights(static_cast<Eigen::Index>(n), features);
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    weights.data()[i] = static_cast<std::int64_t>(rng() % (std::uint64_t{1} << 40)) - (std::int64_t{1} << 39);
  std::vector<he::Ciphertext> ms, mp;
  const double mss = best_of(reps, [&] { ms = he::cipher_matvec_serial(keys.pk, cs, weights); });
  const double mpp = best_of(reps, [&] { mp = he::cipher_matvec(keys.pk, cs, weights); });
  report("matvec", mss, mpp, same_cts(ms, mp));

  std::vector<sboost::BinPartition> parts;
  std::normal_distribution<double> normal;
  for (int f = 0; f < features; ++f) {
    std::vector<double> col(n);
    for (auto& x : col) x = normal(rng);
    parts.push_back(sboost::build_bins(col, 16, static_cast<std::size_t>(f)));
  }
  std::vector<std::size_t> members(n);
  std::iota(members.begin(), members.end(), std::size_t{0});
  std::vector<sboost::EncryptedHistogram> hs, hp;
  const double hss = best_of(reps, [&] { hs = sboost::aggregate_features_serial(keys.pk, cs, cp, parts, members, n); });
  const double hpp = best_of(reps, [&] { hp = sboost::aggregate_features(keys.pk, cs, cp, parts, members, n); });
  same = hs.size() == hp.size();
  for (std::size_t f = 0; same && f < hs.size(); ++f)
    same = same_cts(hs[f].g, hp[f].g) && same_cts(hs[f].h, hp[f].h) && hs[f].count == hp[f].count;
  report("histogram", hss, hpp, same);
  return g_mismatches == 0 ? 0 : 1;
}

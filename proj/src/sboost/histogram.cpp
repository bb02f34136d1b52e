#include "vfl/sboost/histogram.hpp"

#include "vfl/common/parallel.hpp"

#include <stdexcept>
#include <string>

namespace vfl::sboost {

EncryptedHistogram aggregate_encrypted(const he::PublicKey& pk, std::span<const he::Ciphertext> enc_g,
                                       std::span<const he::Ciphertext> enc_h, const BinPartition& partition,
                                       std::span<const std::size_t> members, std::uint64_t max_count) {
  const auto bins = static_cast<std::size_t>(partition.bin_count());
  EncryptedHistogram hist;
  hist.feature = partition.feature;
  hist.count.assign(bins, 0);
  std::vector<mpz_class> g(bins, mpz_class(1));
  std::vector<mpz_class> h(bins, mpz_class(1));
  for (const auto i : members) {
    const auto k = static_cast<std::size_t>(partition.assignment[i]);
    he::check_key(pk, enc_g[i]);
    he::check_key(pk, enc_h[i]);
    g[k] *= enc_g[i].value;
    g[k] %= pk.n_squared;
    h[k] *= enc_h[i].value;
    h[k] %= pk.n_squared;
    ++hist.count[k];
  }
  for (std::size_t k = 0; k < bins; ++k) {
    if (hist.count[k] > max_count)
      throw std::invalid_argument("histogram bin holds " + std::to_string(hist.count[k]) +
                                  " samples, above the codec max_count");
    hist.g.push_back({std::move(g[k]), pk.key_id});
    hist.h.push_back({std::move(h[k]), pk.key_id});
  }
  return hist;
}

std::vector<EncryptedHistogram> aggregate_features(const he::PublicKey& pk, std::span<const he::Ciphertext> enc_g,
                                                   std::span<const he::Ciphertext> enc_h,
                                                   std::span<const BinPartition> partitions,
                                                   std::span<const std::size_t> members, std::uint64_t max_count) {
  std::vector<EncryptedHistogram> out(partitions.size());
  const auto count = static_cast<std::int64_t>(partitions.size());
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t f = 0; f < count; ++f) {
    const auto j = static_cast<std::size_t>(f);
    error.run([&] { out[j] = aggregate_encrypted(pk, enc_g, enc_h, partitions[j], members, max_count); });
  }
  error.rethrow();
  return out;
}

std::vector<EncryptedHistogram> aggregate_features_serial(const he::PublicKey& pk,
                                                          std::span<const he::Ciphertext> enc_g,
                                                          std::span<const he::Ciphertext> enc_h,
                                                          std::span<const BinPartition> partitions,
                                                          std::span<const std::size_t> members,
                                                          std::uint64_t max_count) {
  std::vector<EncryptedHistogram> out;
  out.reserve(partitions.size());
  for (const auto& p : partitions) out.push_back(aggregate_encrypted(pk, enc_g, enc_h, p, members, max_count));
  return out;
}

FeatureHistogram plain_histogram(std::span<const std::int64_t> g_units, std::span<const std::int64_t> h_units,
                                 const BinPartition& partition, std::span<const std::size_t> members) {
  const auto bins = static_cast<std::size_t>(partition.bin_count());
  FeatureHistogram hist{std::vector<std::int64_t>(bins, 0), std::vector<std::int64_t>(bins, 0),
                        std::vector<std::uint64_t>(bins, 0)};
  for (const auto i : members) {
    const auto k = static_cast<std::size_t>(partition.assignment[i]);
    hist.g[k] += g_units[i];
    hist.h[k] += h_units[i];
    ++hist.count[k];
  }
  return hist;
}

}  // namespace vfl::sboost

#include "vfl/he/kernels.hpp"

#include "vfl/common/parallel.hpp"
#include "vfl/common/rng.hpp"

#include <stdexcept>

namespace vfl::he {
namespace {

std::uint64_t element_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, fnv1a("batch.encrypt"), i); }

Ciphertext column_product(const PublicKey& pk, std::span<const Ciphertext> cts, const IntMatrix& weights, Eigen::Index col) {
  // prod c_i^{w_i} = (prod_{w>0} c_i^{w_i}) * (prod_{w<0} c_i^{|w_i|})^{-1}
  mpz_class pos = 1;
  mpz_class neg = 1;
  mpz_class term;
  mpz_class e;
  for (std::size_t i = 0; i < cts.size(); ++i) {
    const std::int64_t w = weights(static_cast<Eigen::Index>(i), col);
    if (w == 0) continue;
    if (w > 0) {
      mpz_set_si(e.get_mpz_t(), w);
      mpz_powm(term.get_mpz_t(), cts[i].value.get_mpz_t(), e.get_mpz_t(), pk.n_squared.get_mpz_t());
      pos = (pos * term) % pk.n_squared;
    } else {
      mpz_set_si(e.get_mpz_t(), w);
      e = -e;
      mpz_powm(term.get_mpz_t(), cts[i].value.get_mpz_t(), e.get_mpz_t(), pk.n_squared.get_mpz_t());
      neg = (neg * term) % pk.n_squared;
    }
  }
  if (neg != 1) {
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), neg.get_mpz_t(), pk.n_squared.get_mpz_t()) == 0)
      throw std::invalid_argument("cipher_matvec: non-invertible ciphertext product");
    pos = (pos * inv) % pk.n_squared;
  }
  return {pos, pk.key_id};
}

void check_shapes(const PublicKey& pk, std::span<const Ciphertext> cts, const IntMatrix& weights) {
  if (static_cast<Eigen::Index>(cts.size()) != weights.rows())
    throw std::invalid_argument("cipher_matvec: ciphertext count must equal weight rows");
  for (const auto& c : cts) check_key(pk, c);
}

}  // namespace

std::vector<Ciphertext> encrypt_batch(const PublicKey& pk, std::span<const PlaintextWord> words, std::uint64_t seed) {
  std::vector<Ciphertext> out(words.size());
  const auto count = static_cast<std::int64_t>(words.size());
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    error.run([&] { out[k] = encrypt(pk, words[k], element_seed(seed, k)); });
  }
  error.rethrow();
  return out;
}

std::vector<Ciphertext> encrypt_batch_serial(const PublicKey& pk, std::span<const PlaintextWord> words, std::uint64_t seed) {
  std::vector<Ciphertext> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out.push_back(encrypt(pk, words[i], element_seed(seed, i)));
  return out;
}

std::vector<PlaintextWord> decrypt_batch(const SecretKey& sk, std::span<const Ciphertext> cts) {
  std::vector<PlaintextWord> out(cts.size());
  const auto count = static_cast<std::int64_t>(cts.size());
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    error.run([&] { out[k] = decrypt(sk, cts[k]); });
  }
  error.rethrow();
  return out;
}

std::vector<PlaintextWord> decrypt_batch_serial(const SecretKey& sk, std::span<const Ciphertext> cts) {
  std::vector<PlaintextWord> out;
  out.reserve(cts.size());
  for (const auto& c : cts) out.push_back(decrypt(sk, c));
  return out;
}

std::vector<Ciphertext> cipher_matvec(const PublicKey& pk, std::span<const Ciphertext> cts, const IntMatrix& weights) {
  check_shapes(pk, cts, weights);
  std::vector<Ciphertext> out(static_cast<std::size_t>(weights.cols()));
  const auto cols = static_cast<std::int64_t>(weights.cols());
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t j = 0; j < cols; ++j)
    error.run([&] { out[static_cast<std::size_t>(j)] = column_product(pk, cts, weights, j); });
  error.rethrow();
  return out;
}

std::vector<Ciphertext> cipher_matvec_serial(const PublicKey& pk, std::span<const Ciphertext> cts, const IntMatrix& weights) {
  check_shapes(pk, cts, weights);
  std::vector<Ciphertext> out;
  out.reserve(static_cast<std::size_t>(weights.cols()));
  for (Eigen::Index j = 0; j < weights.cols(); ++j) out.push_back(column_product(pk, cts, weights, j));
  return out;
}

Ciphertext sum_subset(const PublicKey& pk, std::span<const Ciphertext> cts, std::span<const std::size_t> members) {
  mpz_class acc = 1;
  for (const std::size_t i : members) {
    check_key(pk, cts[i]);
    acc *= cts[i].value;
    acc %= pk.n_squared;
  }
  return {acc, pk.key_id};
}

}  // namespace vfl::he

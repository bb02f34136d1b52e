#pragma once

#include "vfl/he/paillier.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace vfl::he {

// Batch kernels. Each has an OpenMP version and a serial reference; both
// produce bit-identical output because element i always uses the nonce
// derive_seed(seed, i).

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<Ciphertext> encrypt_batch(const PublicKey& pk, std::span<const PlaintextWord> words, std::uint64_t seed);
std::vector<Ciphertext> encrypt_batch_serial(const PublicKey& pk, std::span<const PlaintextWord> words, std::uint64_t seed);

std::vector<PlaintextWord> decrypt_batch(const SecretKey& sk, std::span<const Ciphertext> cts);
std::vector<PlaintextWord> decrypt_batch_serial(const SecretKey& sk, std::span<const Ciphertext> cts);

// out[j] = [[ sum_i weights(i, j) * m_i ]] for cts[i] = [[m_i]], with signed
// integer weights. This is the cipher-vector times plain-matrix product
// [[v]]^T X used by the regression protocol.
std::vector<Ciphertext> cipher_matvec(const PublicKey& pk, std::span<const Ciphertext> cts, const IntMatrix& weights);
std::vector<Ciphertext> cipher_matvec_serial(const PublicKey& pk, std::span<const Ciphertext> cts, const IntMatrix& weights);

// Homomorphic sum of cts[idx] for idx in members.
Ciphertext sum_subset(const PublicKey& pk, std::span<const Ciphertext> cts, std::span<const std::size_t> members);

}  // namespace vfl::he

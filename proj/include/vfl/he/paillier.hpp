#pragma once

#include <gmpxx.h>

#include <cstdint>

namespace vfl::he {

// Paillier with generator g = n + 1.
//
// Encryption is c = (1 + m*n) * h^a mod n^2 where h = x^n mod n^2 is a noise
// base fixed at key generation and a is a short exponent drawn from the
// caller's seed. h^a is an n-th residue, so it encrypts zero; this keeps the
// homomorphic identities exact while making encryption about ten times cheaper
// than a fresh r^n. It is a simulator, not hardened crypto.

struct PublicKey {
  mpz_class n;
  mpz_class n_squared;
  mpz_class g;
  mpz_class noise_base;
  int key_bits = 0;
  int noise_bits = 128;
  std::uint64_t key_id = 0;
};

struct SecretKey {
  mpz_class n;
  mpz_class p, q;
  mpz_class p_squared, q_squared;
  mpz_class hp, hq;    // (L_p(g^(p-1) mod p^2))^-1 mod p, same for q
  mpz_class q_inv_p;   // q^-1 mod p for CRT recombination
  std::uint64_t key_id = 0;
};

struct Keypair {
  PublicKey pk;
  SecretKey sk;
};

struct Ciphertext {
  mpz_class value;
  std::uint64_t key_id = 0;

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) {
    return a.key_id == b.key_id && a.value == b.value;
  }
};

// Plaintext residue in [0, n).
struct PlaintextWord {
  mpz_class raw;

  friend bool operator==(const PlaintextWord& a, const PlaintextWord& b) { return a.raw == b.raw; }
};

inline constexpr int kMinKeyBits = 1088;

// Deterministic for a fixed seed. n has exactly key_bits bits.
// Throws std::invalid_argument for odd key sizes or key_bits < 1088.
Keypair keygen(int key_bits = 2048, std::uint64_t seed = 0);

Ciphertext encrypt(const PublicKey& pk, const PlaintextWord& m, std::uint64_t seed);
PlaintextWord decrypt(const SecretKey& sk, const Ciphertext& c);

// [[a + b]]; throws std::invalid_argument on key mismatch.
Ciphertext add_cipher(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b);

// [[v * a]] for a plaintext scalar v in [0, n).
Ciphertext mul_plain(const PublicKey& pk, const Ciphertext& a, const PlaintextWord& v);

// Deterministic encryption of zero (the empty homomorphic sum).
Ciphertext zero_cipher(const PublicKey& pk);

void check_key(const PublicKey& pk, const Ciphertext& c);

}  // namespace vfl::he

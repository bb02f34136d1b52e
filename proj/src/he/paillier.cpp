#include "vfl/he/paillier.hpp"

#include "vfl/common/rng.hpp"

#include <stdexcept>
#include <string>

namespace vfl::he {
namespace {

mpz_class random_bits(std::uint64_t& state, int bits) {
  mpz_class out = 0;
  int produced = 0;
  while (produced < bits) {
    out <<= 64;
    mpz_class word;
    const std::uint64_t w = splitmix64(state);
    mpz_import(word.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
    out += word;
    produced += 64;
  }
  if (produced > bits) out >>= (produced - bits);
  return out;
}

mpz_class random_prime(std::uint64_t& state, int bits) {
  mpz_class candidate = random_bits(state, bits);
  // Top two bits set so the product has exactly 2*bits bits.
  mpz_setbit(candidate.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 1));
  mpz_setbit(candidate.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 2));
  mpz_class prime;
  mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
  return prime;
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

mpz_class invert(const mpz_class& a, const mpz_class& mod) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0)
    throw std::invalid_argument("paillier: element not invertible");
  return out;
}

std::uint64_t fingerprint(const mpz_class& n) { return fnv1a(n.get_str(16)); }

// L_p(x) = (x - 1) / p
mpz_class l_function(const mpz_class& x, const mpz_class& p) { return (x - 1) / p; }

}  // namespace

Keypair keygen(int key_bits, std::uint64_t seed) {
  if (key_bits < kMinKeyBits)
    throw std::invalid_argument("keygen: key_bits " + std::to_string(key_bits) +
                                " cannot host the 1024-bit plaintext layout (minimum " +
                                std::to_string(kMinKeyBits) + ")");
  if (key_bits % 2 != 0) throw std::invalid_argument("keygen: key_bits must be even");

  std::uint64_t state = derive_seed(seed, fnv1a("paillier.keygen"));
  const int half = key_bits / 2;
  mpz_class p = random_prime(state, half);
  mpz_class q = random_prime(state, half);
  while (p == q) q = random_prime(state, half);
  if (p < q) std::swap(p, q);

  Keypair kp;
  PublicKey& pk = kp.pk;
  pk.n = p * q;
  pk.n_squared = pk.n * pk.n;
  pk.g = pk.n + 1;
  pk.key_bits = key_bits;
  pk.key_id = fingerprint(pk.n);

  mpz_class x = random_bits(state, key_bits - 2) + 2;
  pk.noise_base = powm(x, pk.n, pk.n_squared);

  SecretKey& sk = kp.sk;
  sk.n = pk.n;
  sk.p = p;
  sk.q = q;
  sk.p_squared = p * p;
  sk.q_squared = q * q;
  sk.hp = invert(l_function(powm(pk.g % sk.p_squared, p - 1, sk.p_squared), p), p);
  sk.hq = invert(l_function(powm(pk.g % sk.q_squared, q - 1, sk.q_squared), q), q);
  sk.q_inv_p = invert(q, p);
  sk.key_id = pk.key_id;
  return kp;
}

void check_key(const PublicKey& pk, const Ciphertext& c) {
  if (c.key_id != pk.key_id) throw std::invalid_argument("ciphertext was produced under a different public key");
}

Ciphertext encrypt(const PublicKey& pk, const PlaintextWord& m, std::uint64_t seed) {
  if (m.raw < 0 || m.raw >= pk.n) throw std::out_of_range("encrypt: plaintext outside [0, n)");
  std::uint64_t state = derive_seed(seed, fnv1a("paillier.noise"));
  mpz_class a = random_bits(state, pk.noise_bits);
  if (a == 0) a = 1;
  mpz_class c = (1 + m.raw * pk.n) % pk.n_squared;
  c = (c * powm(pk.noise_base, a, pk.n_squared)) % pk.n_squared;
  return {c, pk.key_id};
}

PlaintextWord decrypt(const SecretKey& sk, const Ciphertext& c) {
  if (c.key_id != sk.key_id) throw std::invalid_argument("decrypt: ciphertext key does not match secret key");
  const mpz_class mp = (l_function(powm(c.value % sk.p_squared, sk.p - 1, sk.p_squared), sk.p) * sk.hp) % sk.p;
  const mpz_class mq = (l_function(powm(c.value % sk.q_squared, sk.q - 1, sk.q_squared), sk.q) * sk.hq) % sk.q;
  // CRT: m = mq + q * ((mp - mq) * q^-1 mod p)
  mpz_class t = ((mp - mq) * sk.q_inv_p) % sk.p;
  if (t < 0) t += sk.p;
  return {mq + sk.q * t};
}

Ciphertext add_cipher(const PublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
  check_key(pk, a);
  check_key(pk, b);
  return {(a.value * b.value) % pk.n_squared, pk.key_id};
}

Ciphertext mul_plain(const PublicKey& pk, const Ciphertext& a, const PlaintextWord& v) {
  check_key(pk, a);
  if (v.raw < 0 || v.raw >= pk.n) throw std::out_of_range("mul_plain: scalar outside [0, n)");
  // Scalars above n/2 are negatives in the centered view; c^(n-k) and
  // (c^-1)^k decrypt identically, and the latter has a short exponent.
  const mpz_class half = pk.n / 2;
  if (v.raw > half) {
    const mpz_class k = pk.n - v.raw;
    return {powm(invert(a.value, pk.n_squared), k, pk.n_squared), pk.key_id};
  }
  return {powm(a.value, v.raw, pk.n_squared), pk.key_id};
}

Ciphertext zero_cipher(const PublicKey& pk) { return {mpz_class(1), pk.key_id}; }

}  // namespace vfl::he

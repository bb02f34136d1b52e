#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "vfl/common/rng.hpp"
#include "vfl/he/codec.hpp"
#include "vfl/he/kernels.hpp"
#include "vfl/he/paillier.hpp"
#include "vfl/he/serialize.hpp"

#include <cmath>
#include <random>

using namespace vfl;
using namespace vfl::he;

namespace {

mpz_class random_below(const mpz_class& n, std::mt19937_64& rng) {
  mpz_class x = 0;
  const auto limbs = mpz_sizeinbase(n.get_mpz_t(), 2) / 64 + 2;
  for (std::size_t i = 0; i < limbs; ++i) {
    x <<= 64;
    x += mpz_class(std::to_string(rng()));
  }
  return x % n;
}

// Textbook decryption: L(c^lambda mod n^2) * mu mod n with lambda = lcm(p-1, q-1).
mpz_class textbook_decrypt(const SecretKey& sk, const PublicKey& pk, const mpz_class& c) {
  mpz_class lambda;
  const mpz_class p1 = sk.p - 1;
  const mpz_class q1 = sk.q - 1;
  mpz_lcm(lambda.get_mpz_t(), p1.get_mpz_t(), q1.get_mpz_t());
  mpz_class u;
  mpz_powm(u.get_mpz_t(), pk.g.get_mpz_t(), lambda.get_mpz_t(), pk.n_squared.get_mpz_t());
  mpz_class mu = (u - 1) / pk.n;
  mpz_invert(mu.get_mpz_t(), mu.get_mpz_t(), pk.n.get_mpz_t());
  mpz_class x;
  mpz_powm(x.get_mpz_t(), c.get_mpz_t(), lambda.get_mpz_t(), pk.n_squared.get_mpz_t());
  mpz_class m = ((x - 1) / pk.n) * mu % pk.n;
  return m;
}

}  // namespace

TEST_CASE("keygen produces a modulus of the requested size") {
  const auto& k = test::small_keys();
  CHECK(mpz_sizeinbase(k.pk.n.get_mpz_t(), 2) == static_cast<std::size_t>(kMinKeyBits));
  CHECK(k.sk.p * k.sk.q == k.pk.n);
  CHECK(k.pk.g == k.pk.n + 1);
  CHECK(k.pk.key_id == k.sk.key_id);
}

TEST_CASE("keygen rejects odd and undersized keys") {
  CHECK_THROWS_AS(keygen(1087, 1), std::invalid_argument);
  CHECK_THROWS_AS(keygen(1024, 1), std::invalid_argument);
}

TEST_CASE("keygen is deterministic per seed") {
  const auto a = keygen(kMinKeyBits, 5);
  const auto b = keygen(kMinKeyBits, 5);
  const auto c = keygen(kMinKeyBits, 6);
  CHECK(a.pk.n == b.pk.n);
  CHECK(a.pk.noise_base == b.pk.noise_base);
  CHECK(a.pk.n != c.pk.n);
}

TEST_CASE("decryption agrees with the textbook formula") {
  const auto& k = test::small_keys();
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const mpz_class m = random_below(k.pk.n, rng);
    const auto c = encrypt(k.pk, {m}, rng());
    CHECK(decrypt(k.sk, c).raw == m);
    CHECK(textbook_decrypt(k.sk, k.pk, c.value) == m);
  }
}

TEST_CASE("homomorphic addition and scalar multiplication") {
  const auto& k = test::small_keys();
  const auto& n = k.pk.n;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const mpz_class a = random_below(n, rng);
    const mpz_class b = random_below(n, rng);
    const mpz_class v = random_below(n, rng);
    const auto ca = encrypt(k.pk, {a}, rng());
    const auto cb = encrypt(k.pk, {b}, rng());
    CHECK(decrypt(k.sk, add_cipher(k.pk, ca, cb)).raw == (a + b) % n);
    CHECK(decrypt(k.sk, mul_plain(k.pk, ca, {v})).raw == (a * v) % n);
  }
}

TEST_CASE("scalar multiplication by n - 1 negates") {
  const auto& k = test::small_keys();
  const auto c = encrypt(k.pk, {mpz_class(12345)}, 9);
  const auto neg = mul_plain(k.pk, c, {k.pk.n - 1});
  CHECK(decrypt(k.sk, neg).raw == k.pk.n - 12345);
  CHECK(decrypt(k.sk, add_cipher(k.pk, c, neg)).raw == 0);
}

TEST_CASE("zero cipher is the additive identity") {
  const auto& k = test::small_keys();
  const auto z = zero_cipher(k.pk);
  CHECK(decrypt(k.sk, z).raw == 0);
  const auto c = encrypt(k.pk, {mpz_class(77)}, 1);
  CHECK(decrypt(k.sk, add_cipher(k.pk, z, c)).raw == 77);
}

TEST_CASE("mixing keys is rejected") {
  const auto& k = test::small_keys();
  const auto other = keygen(kMinKeyBits, 12);
  const auto a = encrypt(k.pk, {mpz_class(1)}, 1);
  const auto b = encrypt(other.pk, {mpz_class(1)}, 1);
  CHECK_THROWS_AS(add_cipher(k.pk, a, b), std::invalid_argument);
}

TEST_CASE("same seed gives the same ciphertext, different seeds differ") {
  const auto& k = test::small_keys();
  const auto a = encrypt(k.pk, {mpz_class(5)}, 100);
  const auto b = encrypt(k.pk, {mpz_class(5)}, 100);
  const auto c = encrypt(k.pk, {mpz_class(5)}, 101);
  CHECK(a == b);
  CHECK(!(a == c));
}

TEST_CASE("signed codec round trip") {
  const auto& k = test::small_keys();
  const auto p = CodecParams::signed_default();
  for (const double x : {0.0, 1.0, -1.0, 0.125, -3.75, 1234.5678, -1e-6}) {
    const auto w = encode_signed(k.pk, x, p);
    CHECK(std::fabs(decode_signed(k.pk, w, p) - x) <= std::ldexp(1.0, -41));
  }
  // -1.5 * 2^40 wraps to n - 1649267441664
  const auto w = encode_signed(k.pk, -1.5, p);
  CHECK(w.raw == k.pk.n - mpz_class("1649267441664"));
  CHECK(centered(k.pk, w.raw) == mpz_class("-1649267441664"));
}

TEST_CASE("signed codec products decode at twice the scale") {
  const auto& k = test::small_keys();
  const auto p = CodecParams::signed_default();
  const auto a = encode_signed(k.pk, -0.75, p);
  const auto b = encode_signed(k.pk, 2.5, p);
  const PlaintextWord prod{(a.raw * b.raw) % k.pk.n};
  CHECK(decode_signed(k.pk, prod, p, 2) == doctest::Approx(-1.875));
}

TEST_CASE("quantize rounds to nearest and guards the range") {
  CHECK(quantize(0.25, 24) == 4194304);
  CHECK(quantize(-0.25, 24) == -4194304);
  CHECK(quantize(1.0 / 3.0, 4) == 5);
  CHECK_THROWS_AS(quantize(1e30, 40), std::overflow_error);
}

TEST_CASE("layout word places the value above the magic region") {
  const auto& k = test::small_keys();
  const auto p = CodecParams::layout_default();
  const mpz_class magic("0x50011");
  const auto w = encode_layout(k.pk, 0.25, magic, p);
  const mpz_class expected = ((mpz_class(4194304) + (mpz_class(1) << 48)) << 960) | magic;
  CHECK(w.raw == expected);
  const auto d = decode_layout(w, 1, p);
  CHECK(d.low_region == magic);
  CHECK(d.value_units == 4194304);
  CHECK(d.value_sum == 0.25);
}

TEST_CASE("layout sums keep values and magics apart") {
  const auto& k = test::small_keys();
  const auto p = CodecParams::layout_default();
  const auto a = encrypt(k.pk, encode_layout(k.pk, -0.5, mpz_class("0x30001"), p), 1);
  const auto b = encrypt(k.pk, encode_layout(k.pk, 0.125, mpz_class("0x20010"), p), 2);
  const auto c = encrypt(k.pk, encode_layout(k.pk, -2.0, mpz_class(0), p), 3);
  const auto sum = add_cipher(k.pk, add_cipher(k.pk, a, b), c);
  const auto d = decode_layout(decrypt(k.sk, sum), 3, p);
  CHECK(d.low_region == mpz_class("0x50011"));
  CHECK(d.value_sum == -2.375);
}

TEST_CASE("layout rejects oversized magics and values") {
  const auto& k = test::small_keys();
  const auto p = CodecParams::layout_default();
  CHECK_THROWS_AS(encode_layout(k.pk, 0.0, mpz_class(1) << 960, p), std::out_of_range);
  CHECK_THROWS_AS(encode_layout(k.pk, 1e9, 0, p), std::overflow_error);
}

TEST_CASE("parallel kernels match the serial reference") {
  const auto& k = test::small_keys();
  std::mt19937_64 rng(8);
  std::vector<PlaintextWord> words;
  for (int i = 0; i < 24; ++i) words.push_back({random_below(k.pk.n, rng)});
  const auto par = encrypt_batch(k.pk, words, 42);
  const auto ser = encrypt_batch_serial(k.pk, words, 42);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) CHECK(par[i] == ser[i]);
  const auto dp = decrypt_batch(k.sk, par);
  const auto ds = decrypt_batch_serial(k.sk, par);
  for (std::size_t i = 0; i < words.size(); ++i) {
    CHECK(dp[i] == words[i]);
    CHECK(ds[i] == words[i]);
  }

  IntMatrix w(24, 3);
  std::uniform_int_distribution<std::int64_t> dist(-1000000, 1000000);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  const auto mp = cipher_matvec(k.pk, par, w);
  const auto ms = cipher_matvec_serial(k.pk, par, w);
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    mpz_class expect = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      mpz_class wi;
      mpz_set_si(wi.get_mpz_t(), w(i, j));
      expect += wi * words[static_cast<std::size_t>(i)].raw;
    }
    expect %= k.pk.n;
    if (expect < 0) expect += k.pk.n;
    CHECK(decrypt(k.sk, mp[static_cast<std::size_t>(j)]).raw == expect);
    CHECK(decrypt(k.sk, ms[static_cast<std::size_t>(j)]).raw == expect);
  }
}

TEST_CASE("subset sums") {
  const auto& k = test::small_keys();
  std::vector<PlaintextWord> words;
  for (int i = 1; i <= 6; ++i) words.push_back({mpz_class(i * 10)});
  const auto cts = encrypt_batch(k.pk, words, 3);
  const std::vector<std::size_t> members{0, 2, 5};
  CHECK(decrypt(k.sk, sum_subset(k.pk, cts, members)).raw == 10 + 30 + 60);
  CHECK(decrypt(k.sk, sum_subset(k.pk, cts, std::vector<std::size_t>{})).raw == 0);
}

TEST_CASE("serialization round trip") {
  const auto& k = test::small_keys();
  CHECK(to_hex(mpz_class(255)) == "ff");
  CHECK(from_hex("50011") == mpz_class(0x50011));
  CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
  const auto pk = public_key_from_json(to_json(k.pk));
  CHECK(pk.n == k.pk.n);
  CHECK(pk.noise_base == k.pk.noise_base);
  CHECK(pk.key_id == k.pk.key_id);
  const auto c = encrypt(k.pk, {mpz_class(99)}, 4);
  const auto back = ciphertext_from_json(to_json(c));
  CHECK(back == c);
  CHECK(decrypt(k.sk, back).raw == 99);
}

TEST_CASE("derived seeds are stable") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

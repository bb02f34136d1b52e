#include "vfl/he/codec.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vfl::he {
namespace {

mpz_class pow2(int bits) {
  mpz_class out = 1;
  out <<= bits;
  return out;
}

double to_double_scaled(const mpz_class& v, int shift) {
  // mpz_get_d truncates; use the mantissa/exponent form to keep full precision
  // for large products before scaling down.
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::ldexp(mant, static_cast<int>(exp) - shift);
}

int bit_length(std::uint64_t v) {
  int bits = 0;
  while (v != 0) {
    ++bits;
    v >>= 1;
  }
  return bits;
}

}  // namespace

void CodecParams::validate(int key_bits) const {
  if (frac_bits < 0 || frac_bits >= 64) throw std::invalid_argument("codec: frac_bits must be in [0, 64)");
  if (2 * frac_bits + 64 >= key_bits) throw std::invalid_argument("codec: 2*frac_bits + 64 must stay below key_bits");
  if (offset_bits <= 0 || offset_bits >= 63) throw std::invalid_argument("codec: offset_bits must be in (0, 63)");
  if (max_count == 0) throw std::invalid_argument("codec: max_count must be positive");
  // Value window of a max_count-word sum must stay below n >= 2^(key_bits-1).
  const int top = kMagicBits + offset_bits + 1 + bit_length(max_count);
  if (top >= key_bits) {
    throw std::invalid_argument("codec: layout sums of " + std::to_string(max_count) +
                                " words overflow a " + std::to_string(key_bits) + "-bit key");
  }
}

std::int64_t quantize(double x, int frac_bits) {
  if (!std::isfinite(x)) throw std::overflow_error("codec: non-finite value");
  const double scaled = std::ldexp(x, frac_bits);
  if (std::fabs(scaled) >= 9.2233720368547758e18) throw std::overflow_error("codec: |x| * 2^F exceeds 2^63");
  return std::llround(scaled);
}

mpz_class centered(const PublicKey& pk, const mpz_class& raw) {
  if (raw > pk.n / 2) return raw - pk.n;
  return raw;
}

PlaintextWord encode_signed(const PublicKey& pk, double x, const CodecParams& params) {
  const std::int64_t q = quantize(x, params.frac_bits);
  mpz_class v;
  mpz_set_si(v.get_mpz_t(), q);
  if (v < 0) v += pk.n;
  return {v};
}

double decode_signed(const PublicKey& pk, const PlaintextWord& w, const CodecParams& params, int scale_exponent) {
  if (scale_exponent != 1 && scale_exponent != 2) throw std::invalid_argument("decode_signed: scale exponent must be 1 or 2");
  if (w.raw < 0 || w.raw >= pk.n) throw std::out_of_range("decode_signed: word outside [0, n)");
  return to_double_scaled(centered(pk, w.raw), params.frac_bits * scale_exponent);
}

PlaintextWord encode_layout(const PublicKey& pk, double x, const mpz_class& magic, const CodecParams& params) {
  return encode_layout_units(pk, quantize(x, params.frac_bits), magic, params);
}

PlaintextWord encode_layout_units(const PublicKey& pk, std::int64_t q, const mpz_class& magic,
                                  const CodecParams& params) {
  params.validate(pk.key_bits);
  if (magic < 0 || magic >= pow2(CodecParams::kMagicBits)) throw std::out_of_range("encode_layout: magic must be < 2^960");
  const std::int64_t limit = std::int64_t{1} << params.offset_bits;
  if (q <= -limit || q >= limit) {
    throw std::overflow_error("encode_layout: value " + std::to_string(q) + " units exceeds the offset window");
  }
  mpz_class window;
  mpz_set_si(window.get_mpz_t(), q);
  window += pow2(params.offset_bits);
  mpz_class raw = (window << CodecParams::kMagicBits) | magic;
  if (raw >= pk.n) throw std::overflow_error("encode_layout: word exceeds the plaintext space");
  return {raw};
}

LayoutSum decode_layout(const PlaintextWord& w, std::uint64_t count, const CodecParams& params) {
  LayoutSum out;
  const mpz_class mask = pow2(CodecParams::kMagicBits) - 1;
  out.low_region = w.raw & mask;
  mpz_class high = w.raw >> CodecParams::kMagicBits;
  mpz_class offset_total = pow2(params.offset_bits);
  offset_total *= static_cast<unsigned long>(count);
  out.value_units = high - offset_total;
  out.value_sum = to_double_scaled(out.value_units, params.frac_bits);
  if (out.value_units == 0) out.value_sum = 0.0;
  return out;
}

}  // namespace vfl::he

#pragma once

#include "vfl/he/paillier.hpp"

#include <cstdint>

namespace vfl::he {

// Two plaintext codecs share one parameter block.
//
// Signed codec: centered residues. x -> round(x * 2^F), negatives wrap to
// n - |v|. A product of two encoded values carries scale 2^(2F).
//
// Layout codec: the 1024-bit word used by the boosting protocol.
//   bits [0, 960)      low region (zero padding, or a magic number)
//   bits [960, ...)    value window: round(x * 2^F) + 2^offset_bits
// The offset keeps every window non-negative, so a homomorphic sum never
// borrows from the low region. Decoding a sum of m words subtracts m * 2^offset.
struct CodecParams {
  static constexpr int kMagicBits = 960;

  int frac_bits = 40;
  int offset_bits = 48;
  std::uint64_t max_count = std::uint64_t{1} << 20;

  static CodecParams signed_default() { return {40, 48, std::uint64_t{1} << 20}; }
  static CodecParams layout_default() { return {24, 48, std::uint64_t{1} << 20}; }

  // Throws std::invalid_argument when the parameters cannot fit a key of key_bits.
  void validate(int key_bits) const;
};

PlaintextWord encode_signed(const PublicKey& pk, double x, const CodecParams& params);
// scale_exponent 1 for fresh words, 2 for products of two encoded words.
double decode_signed(const PublicKey& pk, const PlaintextWord& w, const CodecParams& params, int scale_exponent = 1);
// Centered integer view of a residue.
mpz_class centered(const PublicKey& pk, const mpz_class& raw);

// round(x * 2^F) as a signed integer; throws std::overflow_error past 2^63.
std::int64_t quantize(double x, int frac_bits);

PlaintextWord encode_layout(const PublicKey& pk, double x, const mpz_class& magic, const CodecParams& params);
// Same, from an already quantized value round(x * 2^F).
PlaintextWord encode_layout_units(const PublicKey& pk, std::int64_t units, const mpz_class& magic,
                                  const CodecParams& params);

struct LayoutSum {
  mpz_class value_units;  // sum of round(x * 2^F), exact
  double value_sum = 0.0; // value_units / 2^F
  mpz_class low_region;   // raw mod 2^960
};

LayoutSum decode_layout(const PlaintextWord& w, std::uint64_t count, const CodecParams& params);

}  // namespace vfl::he

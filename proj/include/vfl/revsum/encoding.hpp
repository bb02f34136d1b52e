#pragma once

#include "vfl/he/codec.hpp"
#include "vfl/sboost/gradients.hpp"
#include "vfl/sboost/protocol.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace vfl::revsum {

// Layout of the 960-bit low region:
//   top k * window_bits     k windows; window s starts at bit total - window * (s + 1)
//   low total - k * window  base-b digit string, one-hot group identifier b^p
// Random values live in [1, 2^random_bits) so each window has
// window_bits - random_bits bits of carry headroom.
struct PlanGeometry {
  int total_bits = he::CodecParams::kMagicBits;
  int window_bits = 30;
  int random_bits = 20;
};

// Members per group: b (the capacity factor) or b - 1 (the digit bound).
enum class CapacityRule { kBase, kBaseMinusOne };

struct SlotAssignment {
  std::size_t sample = 0;
  int slot = 0;  // 0: first-order g, 1: second-order h
  int supergroup = 0;
  std::size_t digit = 0;
  std::size_t ordinal = 0;
  std::uint64_t random = 0;
};

struct EncodingPlan {
  int k = 1;
  int b = 2;
  std::size_t l = 0;          // digits per identifier
  std::size_t groups = 0;     // 2 k l
  std::size_t group_capacity = 0;
  std::size_t capacity = 0;   // n' = groups * group_capacity
  PlanGeometry geometry;
  CapacityRule rule = CapacityRule::kBase;
  std::vector<SlotAssignment> assignment;  // by encoded index; sample i has index i
  std::size_t n_samples = 0;

  int identifier_bits() const { return geometry.total_bits - k * geometry.window_bits; }
  int window_offset(int s) const { return geometry.total_bits - geometry.window_bits * (s + 1); }
  std::size_t encoded_count() const { return assignment.size(); }
  bool power_of_two_base() const { return (b & (b - 1)) == 0; }
};

// Encoded index i -> slot i % 2, digit (i/2) % l, supergroup (i/(2l)) % k,
// ordinal i / (2kl). Digits fill before any digit is shared. Random values
// are distinct within a group. Throws std::invalid_argument for k < 1, b < 2,
// windows that do not fit or span more than 128 bits, or l < 1.
EncodingPlan plan_encoding(std::size_t n_samples, int k, int b, std::uint64_t seed, PlanGeometry geometry = {},
                           CapacityRule rule = CapacityRule::kBase);

struct MagicNumber {
  mpz_class raw;
  std::uint64_t random_region = 0;
  mpz_class identifier_region;
  int supergroup = 0;
};

MagicNumber make_magic(const EncodingPlan& plan, std::size_t encoded_index);

// Per-sample magics for the target tree. Non-encoded samples carry 0.
sboost::MagicAssignment encode_gradients(const EncodingPlan& plan, std::size_t n_samples, int target_tree = 0);

// Layout words for a gradient list: each sample's g (or h) carries its magic
// when its slot matches.
struct EncodedWords {
  std::vector<he::PlaintextWord> g;
  std::vector<he::PlaintextWord> h;
  sboost::MagicAssignment magic;
};
EncodedWords encode_gradient_words(const he::PublicKey& pk, const std::vector<sboost::GradientPair>& gradients,
                                   const EncodingPlan& plan, const he::CodecParams& codec);

}  // namespace vfl::revsum

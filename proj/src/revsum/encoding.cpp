#include "vfl/revsum/encoding.hpp"

#include "vfl/common/rng.hpp"

#include <set>
#include <stdexcept>
#include <string>

namespace vfl::revsum {
namespace {

std::size_t digits_per_identifier(int b, int bits) {
  // largest l with b^l <= 2^bits
  mpz_class limit = 1;
  limit <<= bits;
  mpz_class power = b;
  std::size_t l = 0;
  while (power <= limit) {
    ++l;
    power *= b;
  }
  return l;
}

}  // namespace

EncodingPlan plan_encoding(std::size_t n_samples, int k, int b, std::uint64_t seed, PlanGeometry geometry,
                           CapacityRule rule) {
  if (k < 1) throw std::invalid_argument("plan_encoding: k must be >= 1");
  if (b < 2) throw std::invalid_argument("plan_encoding: base must be >= 2");
  if (geometry.window_bits < 1 || geometry.random_bits < 1 || geometry.random_bits > geometry.window_bits ||
      geometry.random_bits > 62)
    throw std::invalid_argument("plan_encoding: random_bits must be in [1, min(window_bits, 62)]");
  if (geometry.total_bits > he::CodecParams::kMagicBits)
    throw std::invalid_argument("plan_encoding: magic region exceeds 960 bits");
  if (k * geometry.window_bits >= geometry.total_bits)
    throw std::invalid_argument("plan_encoding: " + std::to_string(k) + " windows of " +
                                std::to_string(geometry.window_bits) + " bits leave no identifier region");

  if (k * geometry.window_bits > 128)
    throw std::invalid_argument("plan_encoding: k * window_bits must not exceed 128");

  EncodingPlan plan;
  plan.k = k;
  plan.b = b;
  plan.geometry = geometry;
  plan.rule = rule;
  plan.n_samples = n_samples;
  plan.l = digits_per_identifier(b, plan.identifier_bits());
  if (plan.l < 1) throw std::invalid_argument("plan_encoding: identifier region holds no base-b digit");
  plan.groups = 2 * static_cast<std::size_t>(k) * plan.l;
  plan.group_capacity = rule == CapacityRule::kBase ? static_cast<std::size_t>(b) : static_cast<std::size_t>(b - 1);
  plan.capacity = plan.groups * plan.group_capacity;

  const std::uint64_t random_space = (std::uint64_t{1} << geometry.random_bits) - 1;
  if (plan.group_capacity > random_space)
    throw std::invalid_argument("plan_encoding: random field too small for distinct values within a group");

  const std::size_t count = std::min(n_samples, plan.capacity);
  plan.assignment.reserve(count);
  auto rng = make_rng(seed, "revsum.random");
  std::vector<std::set<std::uint64_t>> used(plan.groups);
  for (std::size_t i = 0; i < count; ++i) {
    SlotAssignment a;
    a.sample = i;
    a.slot = static_cast<int>(i % 2);
    const std::size_t j = i / 2;
    a.digit = j % plan.l;
    a.supergroup = static_cast<int>((j / plan.l) % static_cast<std::size_t>(k));
    a.ordinal = j / (plan.l * static_cast<std::size_t>(k));
    const std::size_t group =
        (static_cast<std::size_t>(a.slot) * static_cast<std::size_t>(k) + static_cast<std::size_t>(a.supergroup)) *
            plan.l +
        a.digit;
    auto& taken = used[group];
    do {
      a.random = 1 + rng() % random_space;
    } while (!taken.insert(a.random).second);
    plan.assignment.push_back(a);
  }
  return plan;
}

MagicNumber make_magic(const EncodingPlan& plan, std::size_t encoded_index) {
  const auto& a = plan.assignment.at(encoded_index);
  MagicNumber m;
  m.supergroup = a.supergroup;
  m.random_region = a.random;
  mpz_ui_pow_ui(m.identifier_region.get_mpz_t(), static_cast<unsigned long>(plan.b),
                static_cast<unsigned long>(a.digit));
  mpz_class window = static_cast<unsigned long>(a.random);
  window <<= plan.window_offset(a.supergroup);
  m.raw = window | m.identifier_region;
  return m;
}

sboost::MagicAssignment encode_gradients(const EncodingPlan& plan, std::size_t n_samples, int target_tree) {
  sboost::MagicAssignment out;
  out.target_tree = target_tree;
  out.g_magic.assign(n_samples, mpz_class(0));
  out.h_magic.assign(n_samples, mpz_class(0));
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    const auto& a = plan.assignment[i];
    if (a.sample >= n_samples) continue;
    (a.slot == 0 ? out.g_magic : out.h_magic)[a.sample] = make_magic(plan, i).raw;
  }
  return out;
}

EncodedWords encode_gradient_words(const he::PublicKey& pk, const std::vector<sboost::GradientPair>& gradients,
                                   const EncodingPlan& plan, const he::CodecParams& codec) {
  EncodedWords out;
  out.magic = encode_gradients(plan, gradients.size());
  for (std::size_t i = 0; i < gradients.size(); ++i) {
    out.g.push_back(he::encode_layout(pk, gradients[i].g, out.magic.g_magic[i], codec));
    out.h.push_back(he::encode_layout(pk, gradients[i].h, out.magic.h_magic[i], codec));
  }
  return out;
}

}  // namespace vfl::revsum

#pragma once

#include "vfl/revsum/encoding.hpp"
#include "vfl/sboost/protocol.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <vector>

namespace vfl::revsum {

enum class SampleStatus : std::uint8_t { kPresent, kAbsent, kUnresolved };

enum class BinOutcome {
  kEmpty,          // no candidate can be present and the low region is zero
  kUnique,         // exactly one subset reproduces the low region
  kAmbiguous,      // several subsets do
  kUnrecoverable,  // none does (foreign carries, wrong candidates)
  kExhausted       // search budget or solution cap hit; nothing concluded
};

struct Candidate {
  std::size_t sample = 0;
  std::size_t digit = 0;
  int supergroup = 0;
  std::uint64_t random = 0;
};

struct BinProblem {
  mpz_class low;  // low region of one decrypted bin sum
  std::vector<Candidate> candidates;
};

struct BinDecode {
  BinOutcome outcome = BinOutcome::kEmpty;
  std::vector<SampleStatus> status;  // parallel to BinProblem::candidates
  std::size_t solutions = 0;
  std::uint64_t steps = 0;
};

struct ReverseOptions {
  std::size_t max_solutions = 4096;
  std::uint64_t step_budget = std::uint64_t{1} << 21;
};

// Encoded samples of one slot among the given members.
std::vector<Candidate> candidates_for(const EncodingPlan& plan, int slot, std::span<const std::size_t> members);

// Enumerates every subset T of the candidates with sum of magics == low
// (mod 2^total_bits). First the number of present candidates per digit is
// chosen, following the carries b or more same-digit samples produce; then
// the window region picks which ones, by meeting in the middle over digits
// whose count leaves a choice. A candidate is Present if it is in every
// solution and Absent if in none. step_budget bounds the count search plus
// both half enumerations. Throws std::invalid_argument when k * window_bits
// exceeds 128 or a candidate lies outside the plan.
BinDecode decode_bin(const EncodingPlan& plan, const BinProblem& problem, const ReverseOptions& options = {});

// Recovered sample -> bin assignments for one B feature.
struct RecoveredBins {
  std::size_t feature = 0;
  std::vector<std::vector<std::size_t>> members;  // per bin, sorted sample ids
  std::vector<bool> confident;                    // per bin: every contributing decode was unique
  std::vector<int> assignment;                    // per sample: bin or -1
  std::size_t decoded = 0;
  std::size_t unique = 0;
  std::size_t ambiguous = 0;
  std::size_t unrecoverable = 0;
  std::size_t exhausted = 0;
};

// Decodes every (node, feature, bin, slot) of the target tree, skipping nodes
// whose two children were expanded too. A sample is placed in a bin when some
// decode marks it Present, or when within a node every other bin of the
// feature marks it Absent.
std::vector<RecoveredBins> reverse_sums(const std::vector<sboost::NodeView>& views, const EncodingPlan& plan,
                                        int target_tree, std::size_t n_samples, const ReverseOptions& options = {});

struct PartialOrder {
  std::size_t feature = 0;
  std::vector<int> bin_of;             // per sample, -1 when unknown
  std::vector<std::size_t> coverage;   // samples with a known bin
};

std::vector<PartialOrder> assemble_partial_orders(const std::vector<RecoveredBins>& recovered);

// Metric only: compares against B's true partitions.
struct SuccessReport {
  std::vector<double> per_feature;
  std::vector<std::size_t> cracked;  // encoded samples whose recovered bin is correct
  std::vector<std::size_t> wrong;    // recovered but incorrect
  std::size_t encoded = 0;
  double mean_rate = 0.0;
  std::size_t total_cracked = 0;
};

SuccessReport score_partial_orders(const std::vector<PartialOrder>& orders, const EncodingPlan& plan,
                                   const std::vector<sboost::BinPartition>& truth);

}  // namespace vfl::revsum

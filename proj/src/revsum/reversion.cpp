#include "vfl/revsum/reversion.hpp"

#include "vfl/common/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vfl::revsum {
namespace {

using Key = unsigned __int128;

// One digit's candidates and the m-subsets that may be present.
struct Choice {
  std::uint64_t mask = 0;  // bit i: i-th candidate of the group
  Key key = 0;
};

class BinSolver {
 public:
  BinSolver(const EncodingPlan& plan, const BinProblem& problem, const ReverseOptions& options)
      : plan_(plan), options_(options), b_(static_cast<std::uint64_t>(plan.b)), l_(plan.l) {
    const int kw = plan.k * plan.geometry.window_bits;
    if (kw > 128) throw std::invalid_argument("decode_bin: window region wider than 128 bits");
    key_mask_ = kw == 128 ? ~Key{0} : (Key{1} << kw) - 1;

    order_.resize(problem.candidates.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t x, std::size_t y) {
      const auto& cx = problem.candidates[x];
      const auto& cy = problem.candidates[y];
      if (cx.digit != cy.digit) return cx.digit < cy.digit;
      return cx.supergroup < cy.supergroup;
    });
    for (const auto i : order_) cand_.push_back(problem.candidates[i]);
    for (const auto& c : cand_) {
      if (c.digit >= l_ || c.supergroup < 0 || c.supergroup >= plan.k)
        throw std::invalid_argument("decode_bin: candidate outside the plan");
    }
    for (std::size_t i = 0; i < cand_.size(); ++i) {
      if (i == 0 || cand_[i].digit != cand_[i - 1].digit) {
        group_start_.push_back(i);
        group_digit_.push_back(cand_[i].digit);
      }
    }
    group_start_.push_back(cand_.size());

    const int x_bits = plan.identifier_bits();
    ident_ = problem.low;
    mpz_fdiv_r_2exp(ident_.get_mpz_t(), ident_.get_mpz_t(), static_cast<mp_bitcnt_t>(x_bits));
    mpz_class high = problem.low >> x_bits;
    target_ = to_key(high);

    // Largest identifier sum the candidates can produce; whatever exceeds
    // 2^x_bits spills into the window region.
    mpz_class most = 0;
    for (const auto& c : cand_) {
      mpz_class t;
      mpz_ui_pow_ui(t.get_mpz_t(), static_cast<unsigned long>(b_), static_cast<unsigned long>(c.digit));
      most += t;
    }
    max_spill_ = mpz_class(most >> x_bits).get_ui();

    counts_.assign(group_digit_.size(), 0);
    in_count_.assign(cand_.size(), 0);
  }

  BinDecode run() {
    BinDecode out;
    for (std::uint64_t spill = 0; spill <= max_spill_ && !aborted_; ++spill) {
      if (!set_digits(spill)) continue;
      spill_ = spill;
      dfs_counts(0, 0, 0);
    }
    out.steps = steps_;
    out.solutions = solutions_;
    out.status.assign(cand_.size(), SampleStatus::kUnresolved);
    if (aborted_) {
      out.outcome = BinOutcome::kExhausted;
      return out;
    }
    if (solutions_ == 0) {
      out.outcome = BinOutcome::kUnrecoverable;
      return out;
    }
    bool any_present = false;
    for (std::size_t i = 0; i < cand_.size(); ++i) {
      SampleStatus st = SampleStatus::kUnresolved;
      if (in_count_[i] == solutions_) {
        st = SampleStatus::kPresent;
        any_present = true;
      } else if (in_count_[i] == 0) {
        st = SampleStatus::kAbsent;
      }
      out.status[order_[i]] = st;
    }
    if (solutions_ > 1)
      out.outcome = BinOutcome::kAmbiguous;
    else
      out.outcome = any_present ? BinOutcome::kUnique : BinOutcome::kEmpty;
    return out;
  }

 private:
  Key to_key(const mpz_class& v) const {
    mpz_class lo = v;
    mpz_fdiv_r_2exp(lo.get_mpz_t(), lo.get_mpz_t(), 64);
    mpz_class hi = v >> 64;
    mpz_fdiv_r_2exp(hi.get_mpz_t(), hi.get_mpz_t(), 64);
    const Key k = (Key{mpz_get_ui(hi.get_mpz_t())} << 64) | Key{mpz_get_ui(lo.get_mpz_t())};
    return k & key_mask_;
  }

  Key candidate_key(const Candidate& c) const {
    const int shift = plan_.window_offset(c.supergroup) - plan_.identifier_bits();
    return (Key{c.random} << shift) & key_mask_;
  }

  // Base-b digits of ident + spill * 2^x_bits below b^l, plus what lies above.
  bool set_digits(std::uint64_t spill) {
    mpz_class t = mpz_class(static_cast<unsigned long>(spill)) << plan_.identifier_bits();
    t += ident_;
    digits_.assign(l_, 0);
    for (std::size_t p = 0; p < l_; ++p)
      digits_[p] = mpz_fdiv_q_ui(t.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(b_));
    if (!t.fits_ulong_p()) return false;
    excess_ = t.get_ui();
    next_nonzero_.assign(l_ + 1, l_);
    for (std::size_t p = l_; p-- > 0;) next_nonzero_[p] = digits_[p] != 0 ? p : next_nonzero_[p + 1];
    return true;
  }

  bool tick(std::uint64_t n = 1) {
    if (aborted_) return false;
    steps_ += n;
    if (steps_ > options_.step_budget) {
      aborted_ = true;
      return false;
    }
    return true;
  }

  // Walks digits [pos, end) that hold no candidates.
  bool pass_gap(std::size_t pos, std::size_t end, std::uint64_t& carry) const {
    while (pos < end) {
      if (carry == 0) return next_nonzero_[pos] >= end;
      if (carry % b_ != digits_[pos]) return false;
      carry /= b_;
      ++pos;
    }
    return true;
  }

  // Phase one: how many candidates of each digit are present. Carries let
  // b or more same-digit samples move into the next digit.
  void dfs_counts(std::size_t g, std::size_t pos, std::uint64_t carry) {
    if (!tick()) return;
    if (g == group_digit_.size()) {
      std::uint64_t c = carry;
      if (!pass_gap(pos, l_, c) || c != excess_) return;
      solve_windows();
      return;
    }
    std::uint64_t c = carry;
    const std::size_t p = group_digit_[g];
    if (!pass_gap(pos, p, c)) return;
    const std::uint64_t size = group_start_[g + 1] - group_start_[g];
    for (std::uint64_t m = 0; m <= size && !aborted_; ++m) {
      if ((m + c) % b_ != digits_[p]) continue;
      counts_[g] = static_cast<std::uint32_t>(m);
      dfs_counts(g + 1, p + 1, (m + c) / b_);
    }
  }

  std::vector<Choice> choices(std::size_t g) const {
    const std::size_t start = group_start_[g];
    const std::size_t size = group_start_[g + 1] - start;
    const std::uint32_t m = counts_[g];
    std::vector<Choice> out;
    // Gosper's hack over m-of-size masks; size < 64 here
    const std::uint64_t last = ((std::uint64_t{1} << m) - 1) << (size - m);
    for (std::uint64_t mask = (std::uint64_t{1} << m) - 1;;) {
      Choice ch;
      ch.mask = mask;
      for (std::size_t i = 0; i < size; ++i)
        if (mask >> i & 1) ch.key = (ch.key + candidate_key(cand_[start + i])) & key_mask_;
      out.push_back(ch);
      if (mask == last) break;
      const std::uint64_t c = mask & (~mask + 1);
      const std::uint64_t r = mask + c;
      mask = (((r ^ mask) >> 2) / c) | r;
    }
    return out;
  }

  // Mixed-radix walk over one side's groups, reporting (combo index, key).
  template <class F>
  void enumerate(const std::vector<std::size_t>& side, F&& visit) const {
    std::vector<std::size_t> digit(side.size(), 0);
    std::uint64_t index = 0;
    while (true) {
      Key key = 0;
      for (std::size_t i = 0; i < side.size(); ++i) key += free_[side[i]][digit[i]].key;
      visit(index, key & key_mask_, digit);
      ++index;
      std::size_t i = 0;
      for (; i < side.size(); ++i) {
        if (++digit[i] < free_[side[i]].size()) break;
        digit[i] = 0;
      }
      if (i == side.size()) return;
    }
  }

  void credit(const std::vector<std::size_t>& side, const std::vector<std::size_t>& digit, std::uint64_t times) {
    for (std::size_t i = 0; i < side.size(); ++i) {
      const std::size_t g = free_group_[side[i]];
      const std::uint64_t mask = free_[side[i]][digit[i]].mask;
      for (std::size_t j = 0; (mask >> j) != 0; ++j)
        if (mask >> j & 1) in_count_[group_start_[g] + j] += times;
    }
  }

  // Phase two: pick which candidates of each digit are present so that the
  // window region matches. Meet in the middle over the undetermined digits.
  void solve_windows() {
    Key fixed = spill_ & key_mask_;
    free_.clear();
    free_group_.clear();
    std::vector<std::size_t> full;
    const double budget = static_cast<double>(options_.step_budget - std::min(steps_, options_.step_budget));
    double total_log = 0.0;
    for (std::size_t g = 0; g < counts_.size(); ++g) {
      const std::size_t size = group_start_[g + 1] - group_start_[g];
      if (counts_[g] == 0) continue;
      if (counts_[g] == size) {
        full.push_back(g);
        for (std::size_t i = group_start_[g]; i < group_start_[g + 1]; ++i) fixed += candidate_key(cand_[i]);
        continue;
      }
      if (size >= 64 || std::lgamma(size + 1.0) - std::lgamma(counts_[g] + 1.0) -
                                std::lgamma(static_cast<double>(size - counts_[g]) + 1.0) >
                            std::log(budget)) {
        aborted_ = true;
        return;
      }
      free_.push_back(choices(g));
      free_group_.push_back(g);
      total_log += std::log2(static_cast<double>(free_.back().size()));
    }
    fixed &= key_mask_;
    const Key need = (target_ - fixed) & key_mask_;

    // Split so both halves enumerate about sqrt of the product.
    std::vector<std::size_t> left, right;
    double acc = 0.0;
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const double lg = std::log2(static_cast<double>(free_[i].size()));
      if (acc + lg / 2 <= total_log / 2) {
        left.push_back(i);
        acc += lg;
      } else {
        right.push_back(i);
      }
    }
    double sizes[2] = {0.0, 0.0};
    for (const auto i : left) sizes[0] += std::log2(static_cast<double>(free_[i].size()));
    for (const auto i : right) sizes[1] += std::log2(static_cast<double>(free_[i].size()));
    if (std::exp2(sizes[0]) + std::exp2(sizes[1]) > budget) {
      aborted_ = true;
      return;
    }

    std::vector<std::pair<Key, std::uint64_t>> table;
    table.reserve(static_cast<std::size_t>(std::exp2(sizes[0])) + 1);
    enumerate(left, [&](std::uint64_t index, Key key, const std::vector<std::size_t>&) {
      table.emplace_back(key, index);
    });
    tick(table.size());
    std::sort(table.begin(), table.end());
    std::vector<std::uint64_t> hits(table.size(), 0);

    std::uint64_t found = 0;
    std::uint64_t right_count = 0;
    enumerate(right, [&](std::uint64_t, Key key, const std::vector<std::size_t>& digit) {
      ++right_count;
      if (aborted_) return;
      const Key want = (need - key) & key_mask_;
      auto lo = std::lower_bound(table.begin(), table.end(), std::make_pair(want, std::uint64_t{0}));
      std::uint64_t n = 0;
      for (auto it = lo; it != table.end() && it->first == want; ++it, ++n) ++hits[static_cast<std::size_t>(it - table.begin())];
      if (n == 0) return;
      found += n;
      credit(right, digit, n);
      if (solutions_ + found > options_.max_solutions) aborted_ = true;
    });
    tick(right_count);
    if (aborted_) return;
    if (found == 0) return;

    // Credit left combos by replaying the enumeration.
    std::vector<std::uint64_t> hits_by_index(table.size(), 0);
    for (std::size_t i = 0; i < table.size(); ++i) hits_by_index[table[i].second] = hits[i];
    enumerate(left, [&](std::uint64_t index, Key, const std::vector<std::size_t>& digit) {
      if (hits_by_index[index] > 0) credit(left, digit, hits_by_index[index]);
    });
    for (const auto g : full)
      for (std::size_t i = group_start_[g]; i < group_start_[g + 1]; ++i) in_count_[i] += found;
    solutions_ += found;
  }

  const EncodingPlan& plan_;
  const ReverseOptions& options_;
  std::uint64_t b_;
  std::size_t l_;
  Key key_mask_ = 0;
  Key target_ = 0;  // window region of the low value, shifted down to bit 0
  mpz_class ident_;
  std::uint64_t max_spill_ = 0;
  std::uint64_t spill_ = 0;

  std::vector<std::size_t> order_;
  std::vector<Candidate> cand_;
  std::vector<std::size_t> group_start_;
  std::vector<std::size_t> group_digit_;

  std::vector<std::uint64_t> digits_;
  std::vector<std::size_t> next_nonzero_;
  std::uint64_t excess_ = 0;

  std::vector<std::uint32_t> counts_;
  std::vector<std::vector<Choice>> free_;
  std::vector<std::size_t> free_group_;

  std::vector<std::uint64_t> in_count_;
  std::size_t solutions_ = 0;
  std::uint64_t steps_ = 0;
  bool aborted_ = false;
};

struct DecodeTask {
  std::size_t view = 0;
  std::size_t feature = 0;
};

struct TaskResult {
  // (bin, sample) pairs found Present or by elimination
  std::vector<std::pair<int, std::size_t>> placed;
  std::vector<int> non_unique_bins;
  std::size_t decoded = 0, unique = 0, ambiguous = 0, unrecoverable = 0, exhausted = 0;
};

TaskResult run_task(const sboost::NodeView& view, std::size_t feature, const std::array<std::vector<Candidate>, 2>& cands,
                    const EncodingPlan& plan, const ReverseOptions& options) {
  TaskResult out;
  const auto& bins = view.features[feature];
  for (int slot = 0; slot < 2; ++slot) {
    const auto& cs = cands[static_cast<std::size_t>(slot)];
    if (cs.empty()) continue;
    // not_absent[c] counts bins that may still hold candidate c
    std::vector<int> not_absent(cs.size(), 0);
    std::vector<int> last_bin(cs.size(), -1);
    std::vector<std::uint8_t> placed(cs.size(), 0);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      if (bins[k].count == 0) continue;
      BinProblem prob{slot == 0 ? bins[k].g_low : bins[k].h_low, cs};
      const BinDecode dec = decode_bin(plan, prob, options);
      ++out.decoded;
      switch (dec.outcome) {
        case BinOutcome::kEmpty:
        case BinOutcome::kUnique: ++out.unique; break;
        case BinOutcome::kAmbiguous: ++out.ambiguous; break;
        case BinOutcome::kUnrecoverable: ++out.unrecoverable; break;
        case BinOutcome::kExhausted: ++out.exhausted; break;
      }
      if (dec.outcome != BinOutcome::kEmpty && dec.outcome != BinOutcome::kUnique)
        out.non_unique_bins.push_back(static_cast<int>(k));
      const bool conclusive = dec.outcome != BinOutcome::kExhausted && dec.outcome != BinOutcome::kUnrecoverable;
      for (std::size_t c = 0; c < cs.size(); ++c) {
        if (conclusive && dec.status[c] == SampleStatus::kAbsent) continue;
        ++not_absent[c];
        last_bin[c] = static_cast<int>(k);
        if (conclusive && dec.status[c] == SampleStatus::kPresent && !placed[c]) {
          out.placed.emplace_back(static_cast<int>(k), cs[c].sample);
          placed[c] = 1;
        }
      }
    }
    for (std::size_t c = 0; c < cs.size(); ++c)
      if (!placed[c] && not_absent[c] == 1) out.placed.emplace_back(last_bin[c], cs[c].sample);
  }
  return out;
}

// A node's bin sums are the sums of its children's, so a node whose
// children were both expanded carries no extra information.
bool covered_by_children(const std::vector<const sboost::NodeView*>& views, std::size_t v) {
  const auto& parent = *views[v];
  std::size_t covered = 0;
  for (const auto* w : views) {
    if (w->depth != parent.depth + 1 || w->members.empty()) continue;
    if (!std::binary_search(parent.members.begin(), parent.members.end(), w->members.front())) continue;
    if (std::includes(parent.members.begin(), parent.members.end(), w->members.begin(), w->members.end()))
      covered += w->members.size();
  }
  return !parent.members.empty() && covered == parent.members.size();
}

}  // namespace

std::vector<Candidate> candidates_for(const EncodingPlan& plan, int slot, std::span<const std::size_t> members) {
  std::vector<Candidate> out;
  for (const auto i : members) {
    if (i >= plan.assignment.size()) continue;
    const auto& a = plan.assignment[i];
    if (a.slot != slot) continue;
    out.push_back({a.sample, a.digit, a.supergroup, a.random});
  }
  return out;
}

BinDecode decode_bin(const EncodingPlan& plan, const BinProblem& problem, const ReverseOptions& options) {
  BinSolver solver(plan, problem, options);
  return solver.run();
}

std::vector<RecoveredBins> reverse_sums(const std::vector<sboost::NodeView>& views, const EncodingPlan& plan,
                                        int target_tree, std::size_t n_samples, const ReverseOptions& options) {
  std::vector<const sboost::NodeView*> target;
  for (const auto& v : views)
    if (v.tree == target_tree) target.push_back(&v);

  std::vector<RecoveredBins> out;
  if (target.empty()) return out;
  const std::size_t features = target.front()->features.size();
  for (std::size_t f = 0; f < features; ++f) {
    RecoveredBins rb;
    rb.feature = f;
    const std::size_t bins = target.front()->features[f].size();
    rb.members.assign(bins, {});
    rb.confident.assign(bins, true);
    rb.assignment.assign(n_samples, -1);
    out.push_back(std::move(rb));
  }

  std::vector<std::array<std::vector<Candidate>, 2>> cands(target.size());
  for (std::size_t v = 0; v < target.size(); ++v)
    for (int slot = 0; slot < 2; ++slot) cands[v][static_cast<std::size_t>(slot)] =
        candidates_for(plan, slot, target[v]->members);

  std::vector<DecodeTask> tasks;
  for (std::size_t v = 0; v < target.size(); ++v) {
    if (covered_by_children(target, v)) continue;
    for (std::size_t f = 0; f < features; ++f) tasks.push_back({v, f});
  }
  std::vector<TaskResult> results(tasks.size());
  const auto count = static_cast<std::int64_t>(tasks.size());
  ExceptionSlot error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < count; ++t) {
    const auto& task = tasks[static_cast<std::size_t>(t)];
    error.run([&] {
      results[static_cast<std::size_t>(t)] = run_task(*target[task.view], task.feature, cands[task.view], plan, options);
    });
  }
  error.rethrow();

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& rb = out[tasks[t].feature];
    const auto& res = results[t];
    rb.decoded += res.decoded;
    rb.unique += res.unique;
    rb.ambiguous += res.ambiguous;
    rb.unrecoverable += res.unrecoverable;
    rb.exhausted += res.exhausted;
    for (const int k : res.non_unique_bins) rb.confident[static_cast<std::size_t>(k)] = false;
    for (const auto& [k, sample] : res.placed)
      if (sample < n_samples && rb.assignment[sample] < 0) rb.assignment[sample] = k;
  }
  for (auto& rb : out) {
    for (std::size_t i = 0; i < rb.assignment.size(); ++i)
      if (rb.assignment[i] >= 0) rb.members[static_cast<std::size_t>(rb.assignment[i])].push_back(i);
  }
  return out;
}

std::vector<PartialOrder> assemble_partial_orders(const std::vector<RecoveredBins>& recovered) {
  std::vector<PartialOrder> out;
  for (const auto& rb : recovered) {
    PartialOrder po;
    po.feature = rb.feature;
    po.bin_of = rb.assignment;
    for (std::size_t i = 0; i < rb.assignment.size(); ++i)
      if (rb.assignment[i] >= 0) po.coverage.push_back(i);
    out.push_back(std::move(po));
  }
  return out;
}

SuccessReport score_partial_orders(const std::vector<PartialOrder>& orders, const EncodingPlan& plan,
                                   const std::vector<sboost::BinPartition>& truth) {
  SuccessReport rep;
  rep.encoded = plan.encoded_count();
  double sum = 0.0;
  for (const auto& po : orders) {
    const auto& part = truth.at(po.feature);
    std::size_t hit = 0;
    std::size_t miss = 0;
    for (const auto& a : plan.assignment) {
      if (a.sample >= po.bin_of.size()) continue;
      const int got = po.bin_of[a.sample];
      if (got < 0) continue;
      if (got == part.assignment[a.sample])
        ++hit;
      else
        ++miss;
    }
    rep.cracked.push_back(hit);
    rep.wrong.push_back(miss);
    const double rate = rep.encoded > 0 ? static_cast<double>(hit) / static_cast<double>(rep.encoded) : 0.0;
    rep.per_feature.push_back(rate);
    rep.total_cracked += hit;
    sum += rate;
  }
  rep.mean_rate = orders.empty() ? 0.0 : sum / static_cast<double>(orders.size());
  return rep;
}

}  // namespace vfl::revsum

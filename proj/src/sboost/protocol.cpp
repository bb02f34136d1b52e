#include "vfl/sboost/protocol.hpp"

#include "vfl/common/error.hpp"
#include "vfl/common/rng.hpp"
#include "vfl/he/kernels.hpp"
#include "vfl/sboost/histogram.hpp"

#include <numeric>
#include <stdexcept>

namespace vfl::sboost {

void BoostConfig::validate(std::size_t n_samples) const {
  if (trees < 0) throw ConfigError("trees must be >= 0");
  if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (bins < 2) throw ConfigError("bins must be >= 2");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
  if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
  if (min_samples < 2) throw ConfigError("min_samples must be >= 2");
  if (key_bits < he::kMinKeyBits || key_bits % 2 != 0) throw ConfigError("key_bits must be even and >= 1088");
  try {
    codec.validate(key_bits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (n_samples > codec.max_count) throw ConfigError("sample count exceeds the layout codec max_count");
}

std::vector<BinPartition> bin_features(const Matrix& x, int bins, std::vector<std::string>* warnings) {
  std::vector<BinPartition> out;
  out.reserve(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Vector col = x.col(j);
    out.push_back(build_bins(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), bins,
                             static_cast<std::size_t>(j), warnings));
  }
  return out;
}

namespace {

std::int64_t to_int64(const mpz_class& v) {
  if (!v.fits_slong_p()) throw ProtocolAbort("A: decode histogram", "bin sum outside the 64-bit range");
  return v.get_si();
}

struct PendingNode {
  std::vector<std::size_t> members;
};

}  // namespace

BoostResult train_ensemble(const VerticalDataset& data, const BoostConfig& config, const MagicAssignment* magic) {
  data.validate();
  config.validate(data.size());
  const std::size_t n = data.size();
  if (magic) {
    if ((!magic->g_magic.empty() && magic->g_magic.size() != n) ||
        (!magic->h_magic.empty() && magic->h_magic.size() != n))
      throw std::invalid_argument("magic assignment length differs from the sample count");
  }

  BoostResult result;
  result.a_partitions = bin_features(data.x_a, config.bins);
  result.b_partitions = bin_features(data.x_b, config.bins);
  TreeModel& model = result.model;
  model.lambda = config.lambda;
  model.gamma = config.gamma;
  model.shrinkage = config.shrinkage;
  model.objective = config.objective;
  model.frac_bits = config.codec.frac_bits;

  const he::Keypair keys = he::keygen(config.key_bits, derive_seed(config.seed, fnv1a("sboost.keygen")));
  const he::PublicKey& pk = keys.pk;
  const SplitParams params = config.split_params();
  const int frac = config.codec.frac_bits;
  const mpz_class zero = 0;

  Vector margin = Vector::Zero(static_cast<Eigen::Index>(n));
  for (int t = 0; t < config.trees; ++t) {
    // A: gradients, layout words, encryption.
    const auto q = quantize_gradients(compute_gradients(data.y, margin, config.objective), frac);
    const bool targeted = magic && magic->target_tree == t;
    std::vector<he::PlaintextWord> g_words;
    std::vector<he::PlaintextWord> h_words;
    g_words.reserve(n);
    h_words.reserve(n);
    try {
      for (std::size_t i = 0; i < n; ++i) {
        const mpz_class& gm = targeted && !magic->g_magic.empty() ? magic->g_magic[i] : zero;
        const mpz_class& hm = targeted && !magic->h_magic.empty() ? magic->h_magic[i] : zero;
        g_words.push_back(he::encode_layout_units(pk, q.g[i], gm, config.codec));
        h_words.push_back(he::encode_layout_units(pk, q.h[i], hm, config.codec));
      }
    } catch (const std::exception& e) {
      throw ProtocolAbort("A: encode gradients", e.what());
    }
    const std::uint64_t tree_seed = derive_seed(config.seed, fnv1a("sboost.tree"), static_cast<std::uint64_t>(t));
    const auto enc_g = he::encrypt_batch(pk, g_words, derive_seed(tree_seed, fnv1a("g")));
    const auto enc_h = he::encrypt_batch(pk, h_words, derive_seed(tree_seed, fnv1a("h")));

    Tree tree;
    std::vector<PendingNode> pending;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree.nodes.push_back(TreeNode{});
    pending.push_back({std::move(all)});

    for (std::size_t idx = 0; idx < tree.nodes.size(); ++idx) {
      const std::vector<std::size_t> members = std::move(pending[idx].members);
      TreeNode node = tree.nodes[idx];
      node.id = static_cast<int>(idx);
      node.count = members.size();
      node.g_units = 0;
      node.h_units = 0;
      for (const auto i : members) {
        node.g_units += q.g[i];
        node.h_units += q.h[i];
      }

      if (static_cast<int>(members.size()) >= config.min_samples && node.depth < config.max_depth) {
        // B: encrypted histograms over its own bins.
        const auto hists = aggregate_features(pk, enc_g, enc_h, result.b_partitions, members, config.codec.max_count);

        // A: decrypt non-empty bins.
        std::vector<he::Ciphertext> batch;
        for (const auto& hist : hists)
          for (std::size_t k = 0; k < hist.count.size(); ++k)
            if (hist.count[k] > 0) {
              batch.push_back(hist.g[k]);
              batch.push_back(hist.h[k]);
            }
        const auto plain = he::decrypt_batch(keys.sk, batch);
        result.transcript.decryptions += plain.size();

        NodeView view;
        view.tree = t;
        view.node = node.id;
        view.depth = node.depth;
        view.members = members;
        std::vector<FeatureHistogram> passive;
        std::size_t cursor = 0;
        for (const auto& hist : hists) {
          const std::size_t bins = hist.count.size();
          FeatureHistogram fh{std::vector<std::int64_t>(bins, 0), std::vector<std::int64_t>(bins, 0), hist.count};
          std::vector<BinSums> sums(bins);
          for (std::size_t k = 0; k < bins; ++k) {
            sums[k].count = hist.count[k];
            if (hist.count[k] == 0) continue;
            const auto gs = he::decode_layout(plain[cursor++], hist.count[k], config.codec);
            const auto hs = he::decode_layout(plain[cursor++], hist.count[k], config.codec);
            fh.g[k] = to_int64(gs.value_units);
            fh.h[k] = to_int64(hs.value_units);
            sums[k].g_units = gs.value_units;
            sums[k].h_units = hs.value_units;
            sums[k].g_low = gs.low_region;
            sums[k].h_low = hs.low_region;
          }
          passive.push_back(std::move(fh));
          view.features.push_back(std::move(sums));
        }
        result.transcript.nodes.push_back(std::move(view));

        std::vector<FeatureHistogram> active;
        active.reserve(result.a_partitions.size());
        for (const auto& part : result.a_partitions) active.push_back(plain_histogram(q.g, q.h, part, members));

        const SplitDecision dec = find_best_split(active, passive, node.g_units, node.h_units, params);
        if (dec.valid) {
          node.is_leaf = false;
          node.owner = dec.owner;
          node.feature = dec.feature;
          node.bin = dec.bin;
          node.gain = dec.gain;
          const auto& part = dec.owner == Owner::kActive ? result.a_partitions[static_cast<std::size_t>(dec.feature)]
                                                         : result.b_partitions[static_cast<std::size_t>(dec.feature)];
          if (dec.owner == Owner::kActive) node.threshold = part.upper[static_cast<std::size_t>(dec.bin)];
          // The feature owner returns the instance space of the left child.
          std::vector<std::size_t> left;
          std::vector<std::size_t> right;
          for (const auto i : members) (part.assignment[i] <= dec.bin ? left : right).push_back(i);
          node.left = static_cast<int>(tree.nodes.size());
          node.right = node.left + 1;
          TreeNode child;
          child.depth = node.depth + 1;
          tree.nodes.push_back(child);
          tree.nodes.push_back(child);
          pending.push_back({std::move(left)});
          pending.push_back({std::move(right)});
        }
      }
      if (node.is_leaf) {
        node.weight = leaf_weight(node.g_units, node.h_units, frac, config.lambda, config.shrinkage);
        for (const auto i : members) margin(static_cast<Eigen::Index>(i)) += node.weight;
      }
      tree.nodes[idx] = node;
    }
    model.trees.push_back(std::move(tree));
  }
  result.train_margin = margin;
  return result;
}

}  // namespace vfl::sboost

#pragma once

#include "vfl/harness/config.hpp"
#include "vfl/harness/csv.hpp"
#include "vfl/harness/synthetic.hpp"
#include "vfl/logreg/protocol.hpp"
#include "vfl/revmul/attack.hpp"
#include "vfl/revsum/encoding.hpp"
#include "vfl/revsum/exploit.hpp"
#include "vfl/revsum/reversion.hpp"
#include "vfl/sboost/protocol.hpp"

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

namespace vfl::harness {

enum class ProtocolKind { kLogreg, kSecureBoost };
enum class AttackKind { kNone, kRevmul, kRevsum };

struct DataConfig {
  std::string source = "synthetic";  // synthetic | csv
  SyntheticSpec synthetic;
  std::string path;
  std::string id_column = "id";
  std::string label_column = "label";
  std::string a_features;  // index list such as "0-12"; empty splits after d_a
  std::string b_features;
  double train_fraction = 0.8;
};

inline constexpr std::size_t kAllSamples = std::numeric_limits<std::size_t>::max();

struct AttackConfig {
  double eps_rank = 1e-10;
  int k = 2;
  int b = 2;
  revsum::CapacityRule rule = revsum::CapacityRule::kBase;
  int target_tree = 0;
  revsum::ReverseOptions reverse;
  std::size_t aux_size = kAllSamples;
};

struct SweepConfig {
  // batch_size | learning_rate | base | k | bins | distribution | aux_size
  std::string kind;
  std::vector<std::string> values;
  int replicates = 1;
};

struct ExperimentConfig {
  ProtocolKind protocol = ProtocolKind::kLogreg;
  AttackKind attack = AttackKind::kNone;
  DataConfig data;
  logreg::TrainConfig logreg;
  sboost::BoostConfig boost;
  AttackConfig attack_params;
  SweepConfig sweep;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // Reads every documented key; unknown keys are rejected. Sub-seeds for
  // data, split, protocol and attack are derived from seed.
  static ExperimentConfig from_config(const Config& cfg);
  static const std::set<std::string>& known_keys();
  // Throws ConfigError, e.g. for an attack that does not fit the protocol.
  void validate() const;

  std::uint64_t data_seed() const;
  std::uint64_t split_seed() const;
  std::uint64_t attack_seed() const;
  // Pushes seed-derived values into the protocol configs.
  void apply_seed();
};

// Generated or loaded data, partitioned and split 80/20 by seeded shuffle.
VerticalDataset load_dataset(const ExperimentConfig& config);
TrainTestSplit prepare_data(const ExperimentConfig& config);

struct RevmulRun {
  logreg::TrainResult trained;
  revmul::LeakageReport leakage;
};

// Trains with a corrupted coordinator and runs the linear-system attack.
RevmulRun run_revmul(const VerticalDataset& train, const logreg::TrainConfig& config, double eps_rank);

struct RevsumRun {
  sboost::BoostResult boost;
  revsum::EncodingPlan plan;
  std::vector<revsum::RecoveredBins> recovered;
  std::vector<revsum::PartialOrder> orders;
  revsum::SuccessReport success;
};

// Plans and pads magic numbers into the target tree, trains, then reverses the
// decrypted bin sums A observed.
RevsumRun run_revsum(const VerticalDataset& train, const sboost::BoostConfig& config, const AttackConfig& attack,
                     std::uint64_t attack_seed);

// Seeded sample of aux_size training rows (all rows for kAllSamples).
std::vector<std::size_t> choose_aux(std::size_t n, std::size_t aux_size, std::uint64_t seed);
std::vector<revsum::BinBounds> run_binmap(const RevsumRun& run, const VerticalDataset& train,
                                          const std::vector<std::size_t>& aux);

// One row per (value, replicate). A failing cell gets status "error: ..."
// and the sweep continues.
CsvTable run_sweep(const ExperimentConfig& config);
std::string sweep_schema(const std::string& kind);

// Runs a CLI subcommand and writes its files under out_dir. Returns the paths
// written.
std::vector<std::string> run_command(const std::string& command, const ExperimentConfig& config,
                                     const std::string& out_dir);
const std::vector<std::string>& command_names();

}  // namespace vfl::harness

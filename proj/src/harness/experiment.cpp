#include "vfl/harness/experiment.hpp"

#include "vfl/common/error.hpp"
#include "vfl/common/rng.hpp"
#include "vfl/logreg/transcript_io.hpp"
#include "vfl/sboost/reference.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace vfl::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

logreg::LabelEncoding parse_labels(const std::string& s) {
  if (s == "zero_one") return logreg::LabelEncoding::kZeroOne;
  if (s == "plus_minus_one") return logreg::LabelEncoding::kPlusMinusOne;
  throw ConfigError("protocol.labels must be zero_one or plus_minus_one");
}

sboost::Objective parse_objective(const std::string& s) {
  if (s == "logistic") return sboost::Objective::kLogistic;
  if (s == "squared") return sboost::Objective::kSquared;
  throw ConfigError("protocol.objective must be logistic or squared");
}

revsum::CapacityRule parse_rule(const std::string& s) {
  if (s == "base") return revsum::CapacityRule::kBase;
  if (s == "base_minus_one") return revsum::CapacityRule::kBaseMinusOne;
  throw ConfigError("attack.capacity_rule must be base or base_minus_one");
}

int to_int(long long v, const char* key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(std::string(key) + " out of range");
  return static_cast<int>(v);
}

std::size_t to_size(long long v, const char* key) {
  if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

long long parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(what + ": '" + s + "' is not an integer");
  return v;
}

double parse_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(what + ": '" + s + "' is not a number");
  return v;
}

void write_file(const fs::path& path, const std::string& text, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  written.push_back(path.string());
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string fmt(double v) { return format_double(v); }

void require_protocol(const ExperimentConfig& c, ProtocolKind p, const std::string& command) {
  if (c.protocol != p)
    throw ConfigError(command + " needs protocol.name = " + (p == ProtocolKind::kLogreg ? "logreg" : "secureboost"));
}

std::string table_text(const std::string& schema, const CsvTable& t) {
  std::ostringstream out;
  write_schema_line(out, schema, 1);
  write_csv_row(out, t.header);
  for (const auto& r : t.rows) write_csv_row(out, r);
  return out.str();
}

double logreg_accuracy(const Vector& ta, const Vector& tb, const VerticalDataset& d) {
  return d.size() == 0 ? 0.0 : logreg::accuracy(ta, tb, d);
}

}  // namespace

const std::set<std::string>& ExperimentConfig::known_keys() {
  static const std::set<std::string> keys{
      "seed",
      "output.dir",
      "data.source",
      "data.n",
      "data.d_a",
      "data.d_b",
      "data.a_dist",
      "data.b_dist",
      "data.label_noise",
      "data.path",
      "data.id_column",
      "data.label_column",
      "data.a_features",
      "data.b_features",
      "data.train_fraction",
      "protocol.name",
      "protocol.key_bits",
      "protocol.epochs",
      "protocol.batch_size",
      "protocol.learning_rate",
      "protocol.coordinator_updates",
      "protocol.random_init",
      "protocol.reshuffle",
      "protocol.labels",
      "protocol.trees",
      "protocol.max_depth",
      "protocol.bins",
      "protocol.lambda",
      "protocol.gamma",
      "protocol.shrinkage",
      "protocol.min_samples",
      "protocol.objective",
      "attack.name",
      "attack.eps_rank",
      "attack.k",
      "attack.b",
      "attack.capacity_rule",
      "attack.target_tree",
      "attack.step_budget",
      "attack.max_solutions",
      "attack.aux_size",
      "sweep.kind",
      "sweep.values",
      "sweep.replicates",
  };
  return keys;
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg) {
  cfg.require_known(known_keys());
  ExperimentConfig c;
  const long long seed = cfg.get_int("seed", 0);
  if (seed < 0) throw ConfigError("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = cfg.get_string("output.dir", c.output_dir);

  auto& d = c.data;
  d.source = cfg.get_string("data.source", d.source);
  d.synthetic.n = to_size(cfg.get_int("data.n", 2000), "data.n");
  d.synthetic.d_a = to_size(cfg.get_int("data.d_a", 4), "data.d_a");
  d.synthetic.d_b = to_size(cfg.get_int("data.d_b", 4), "data.d_b");
  d.synthetic.a_dist = DistributionSpec::parse(cfg.get_string("data.a_dist", "normal(0,1)"));
  d.synthetic.b_dist = DistributionSpec::parse(cfg.get_string("data.b_dist", "normal(0,1)"));
  d.synthetic.label_noise = cfg.get_double("data.label_noise", d.synthetic.label_noise);
  d.path = cfg.get_string("data.path", "");
  d.id_column = cfg.get_string("data.id_column", d.id_column);
  d.label_column = cfg.get_string("data.label_column", d.label_column);
  d.a_features = cfg.get_string("data.a_features", "");
  d.b_features = cfg.get_string("data.b_features", "");
  d.train_fraction = cfg.get_double("data.train_fraction", d.train_fraction);

  const std::string proto = cfg.get_string("protocol.name", "logreg");
  if (proto == "logreg")
    c.protocol = ProtocolKind::kLogreg;
  else if (proto == "secureboost")
    c.protocol = ProtocolKind::kSecureBoost;
  else
    throw ConfigError("protocol.name must be logreg or secureboost");
  const int key_bits = to_int(cfg.get_int("protocol.key_bits", 2048), "protocol.key_bits");

  auto& lr = c.logreg;
  lr.key_bits = key_bits;
  lr.epochs = to_int(cfg.get_int("protocol.epochs", lr.epochs), "protocol.epochs");
  lr.batch_size = to_size(cfg.get_int("protocol.batch_size", static_cast<long long>(lr.batch_size)), "protocol.batch_size");
  lr.learning_rate = cfg.get_double("protocol.learning_rate", lr.learning_rate);
  lr.coordinator_updates = cfg.get_bool("protocol.coordinator_updates", lr.coordinator_updates);
  lr.random_init = cfg.get_bool("protocol.random_init", lr.random_init);
  lr.reshuffle_each_epoch = cfg.get_bool("protocol.reshuffle", lr.reshuffle_each_epoch);
  lr.labels = parse_labels(cfg.get_string("protocol.labels", "zero_one"));

  auto& bo = c.boost;
  bo.key_bits = key_bits;
  bo.trees = to_int(cfg.get_int("protocol.trees", bo.trees), "protocol.trees");
  bo.max_depth = to_int(cfg.get_int("protocol.max_depth", bo.max_depth), "protocol.max_depth");
  bo.bins = to_int(cfg.get_int("protocol.bins", bo.bins), "protocol.bins");
  bo.lambda = cfg.get_double("protocol.lambda", bo.lambda);
  bo.gamma = cfg.get_double("protocol.gamma", bo.gamma);
  bo.shrinkage = cfg.get_double("protocol.shrinkage", bo.shrinkage);
  bo.min_samples = to_int(cfg.get_int("protocol.min_samples", bo.min_samples), "protocol.min_samples");
  bo.objective = parse_objective(cfg.get_string("protocol.objective", "logistic"));

  const std::string attack = cfg.get_string("attack.name", "none");
  if (attack == "none")
    c.attack = AttackKind::kNone;
  else if (attack == "revmul")
    c.attack = AttackKind::kRevmul;
  else if (attack == "revsum")
    c.attack = AttackKind::kRevsum;
  else
    throw ConfigError("attack.name must be none, revmul or revsum");
  auto& at = c.attack_params;
  at.eps_rank = cfg.get_double("attack.eps_rank", at.eps_rank);
  at.k = to_int(cfg.get_int("attack.k", at.k), "attack.k");
  at.b = to_int(cfg.get_int("attack.b", at.b), "attack.b");
  at.rule = parse_rule(cfg.get_string("attack.capacity_rule", "base"));
  at.target_tree = to_int(cfg.get_int("attack.target_tree", at.target_tree), "attack.target_tree");
  at.reverse.step_budget = to_size(cfg.get_int("attack.step_budget", static_cast<long long>(at.reverse.step_budget)),
                                   "attack.step_budget");
  at.reverse.max_solutions = to_size(
      cfg.get_int("attack.max_solutions", static_cast<long long>(at.reverse.max_solutions)), "attack.max_solutions");
  const std::string aux = cfg.get_string("attack.aux_size", "all");
  at.aux_size = aux == "all" ? kAllSamples : to_size(parse_int(aux, "attack.aux_size"), "attack.aux_size");

  c.sweep.kind = cfg.get_string("sweep.kind", "");
  c.sweep.values = cfg.get_list("sweep.values", {});
  c.sweep.replicates = to_int(cfg.get_int("sweep.replicates", 1), "sweep.replicates");

  c.apply_seed();
  c.validate();
  return c;
}

std::uint64_t ExperimentConfig::data_seed() const { return derive_seed(seed, fnv1a("experiment.data")); }
std::uint64_t ExperimentConfig::split_seed() const { return derive_seed(seed, fnv1a("experiment.split")); }
std::uint64_t ExperimentConfig::attack_seed() const { return derive_seed(seed, fnv1a("experiment.attack")); }

void ExperimentConfig::apply_seed() {
  data.synthetic.seed = data_seed();
  logreg.seed = derive_seed(seed, fnv1a("experiment.logreg"));
  boost.seed = derive_seed(seed, fnv1a("experiment.sboost"));
}

void ExperimentConfig::validate() const {
  if (data.source != "synthetic" && data.source != "csv") throw ConfigError("data.source must be synthetic or csv");
  if (data.source == "csv" && data.path.empty()) throw ConfigError("data.path is required for csv data");
  if (!(data.train_fraction > 0.0 && data.train_fraction <= 1.0))
    throw ConfigError("data.train_fraction must be in (0, 1]");
  if (attack == AttackKind::kRevmul && protocol != ProtocolKind::kLogreg)
    throw ConfigError("attack revmul needs protocol logreg");
  if (attack == AttackKind::kRevsum && protocol != ProtocolKind::kSecureBoost)
    throw ConfigError("attack revsum needs protocol secureboost");
  if (!(attack_params.eps_rank > 0.0 && attack_params.eps_rank < 1.0))
    throw ConfigError("attack.eps_rank must be in (0, 1)");
  if (attack_params.k < 1) throw ConfigError("attack.k must be at least 1");
  if (attack_params.b < 2) throw ConfigError("attack.b must be at least 2");
  if (attack_params.target_tree < 0 || attack_params.target_tree >= boost.trees)
    throw ConfigError("attack.target_tree must name a trained tree");
  if (attack_params.reverse.step_budget == 0 || attack_params.reverse.max_solutions == 0)
    throw ConfigError("attack search limits must be positive");
  if (sweep.replicates < 1) throw ConfigError("sweep.replicates must be at least 1");
  if (!sweep.kind.empty()) {
    static const std::set<std::string> kinds{"batch_size", "learning_rate", "base", "k", "bins", "distribution",
                                             "aux_size"};
    if (!kinds.count(sweep.kind)) throw ConfigError("unknown sweep.kind '" + sweep.kind + "'");
    if (sweep.values.empty()) throw ConfigError("sweep.values must list at least one value");
  }
  if (protocol == ProtocolKind::kLogreg && logreg.key_bits < he::kMinKeyBits)
    throw ConfigError("protocol.key_bits below the minimum");
  if (logreg.epochs < 1) throw ConfigError("protocol.epochs must be positive");
  if (!(logreg.learning_rate > 0.0)) throw ConfigError("protocol.learning_rate must be positive");
}

VerticalDataset load_dataset(const ExperimentConfig& config) {
  if (config.data.source == "synthetic") return gen_synthetic(config.data.synthetic);
  const auto table = load_csv(config.data.path, config.data.id_column, config.data.label_column);
  const auto d = static_cast<std::size_t>(table.x.cols());
  PartitionSpec spec;
  if (config.data.a_features.empty() && config.data.b_features.empty()) {
    spec = PartitionSpec::leading(d, std::min(config.data.synthetic.d_a, d));
  } else {
    spec.a_features = PartitionSpec::parse_indices(config.data.a_features);
    spec.b_features = PartitionSpec::parse_indices(config.data.b_features);
  }
  return partition(table, spec);
}

TrainTestSplit prepare_data(const ExperimentConfig& config) {
  return split_train_test(load_dataset(config), config.data.train_fraction, config.split_seed());
}

RevmulRun run_revmul(const VerticalDataset& train, const logreg::TrainConfig& config, double eps_rank) {
  RevmulRun run;
  run.trained = logreg::train(train, config);
  const auto view = revmul::CorruptionView::corrupted(run.trained.transcript, run.trained.coordinator_keys.sk);
  run.leakage = revmul::attack(view, train.size(), &train.x_b, eps_rank);
  return run;
}

RevsumRun run_revsum(const VerticalDataset& train, const sboost::BoostConfig& config, const AttackConfig& attack,
                     std::uint64_t attack_seed) {
  RevsumRun run;
  run.plan = revsum::plan_encoding(train.size(), attack.k, attack.b, attack_seed, {}, attack.rule);
  const auto magic = revsum::encode_gradients(run.plan, train.size(), attack.target_tree);
  run.boost = sboost::train_ensemble(train, config, &magic);
  run.recovered =
      revsum::reverse_sums(run.boost.transcript.nodes, run.plan, attack.target_tree, train.size(), attack.reverse);
  run.orders = revsum::assemble_partial_orders(run.recovered);
  run.success = revsum::score_partial_orders(run.orders, run.plan, run.boost.b_partitions);
  return run;
}

std::vector<std::size_t> choose_aux(std::size_t n, std::size_t aux_size, std::uint64_t seed) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (aux_size >= n) return all;
  auto rng = make_rng(seed, "experiment.aux");
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(aux_size);
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<revsum::BinBounds> run_binmap(const RevsumRun& run, const VerticalDataset& train,
                                          const std::vector<std::size_t>& aux) {
  std::vector<revsum::BinBounds> out;
  for (const auto& order : run.orders) {
    const auto col = static_cast<Eigen::Index>(order.feature);
    const Vector values = train.x_b.col(col);
    const int bins = run.boost.b_partitions.at(order.feature).bin_count();
    out.push_back(revsum::infer_bin_bounds(order, bins, aux, {values.data(), static_cast<std::size_t>(values.size())}));
  }
  return out;
}

std::string sweep_schema(const std::string& kind) { return "vflsim.sweep." + kind; }

CsvTable run_sweep(const ExperimentConfig& config) {
  const auto& sw = config.sweep;
  if (sw.kind.empty()) throw ConfigError("sweep.kind is required");
  const bool logreg_sweep = sw.kind == "batch_size" || sw.kind == "learning_rate";
  if (logreg_sweep && config.protocol != ProtocolKind::kLogreg)
    throw ConfigError("sweep " + sw.kind + " needs protocol.name = logreg");
  if (!logreg_sweep && config.protocol != ProtocolKind::kSecureBoost)
    throw ConfigError("sweep " + sw.kind + " needs protocol.name = secureboost");

  CsvTable table;
  table.header = {"cell", "kind", "value", "replicate", "replicate_seed", "cell_seed", "status"};
  if (logreg_sweep) {
    for (const char* h : {"n_train", "batches", "min_rank", "mean_rank", "d_b", "leakage_fraction",
                          "recovered_samples", "max_error"})
      table.header.push_back(h);
  } else if (sw.kind == "aux_size") {
    for (const char* h : {"n_train", "aux", "min_inferred_fraction", "mean_inferred_fraction", "min_exact_fraction"})
      table.header.push_back(h);
  } else {
    for (const char* h : {"n_train", "encoded", "capacity", "success_rate", "min_feature_rate", "cracked", "decoded",
                          "unique", "ambiguous", "unrecoverable", "exhausted"})
      table.header.push_back(h);
  }

  struct Cell {
    std::size_t value_index;
    int replicate;
  };
  std::vector<Cell> cells;
  for (int r = 0; r < sw.replicates; ++r)
    for (std::size_t v = 0; v < sw.values.size(); ++v) cells.push_back({v, r});
  // Parse every value up front so a typo is a config error, not a failed cell.
  for (const auto& v : sw.values) {
    if (sw.kind == "learning_rate") parse_real(v, "sweep.values");
    else if (sw.kind == "distribution") DistributionSpec::parse(v);
    else if (sw.kind == "batch_size" && (v == "n" || v == "full")) continue;
    else if (sw.kind == "aux_size" && v == "all") continue;
    else if (sw.kind != "learning_rate" && sw.kind != "distribution") parse_int(v, "sweep.values");
  }

  std::vector<std::vector<std::string>> rows(cells.size());
  const auto count = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t ci = 0; ci < count; ++ci) {
    const auto& cell = cells[static_cast<std::size_t>(ci)];
    const std::string& value = sw.values[cell.value_index];
    const std::uint64_t rep_seed = derive_seed(config.seed, fnv1a("sweep.replicate"), static_cast<std::uint64_t>(cell.replicate));
    const std::uint64_t cell_seed = derive_seed(rep_seed, fnv1a("sweep.cell"), cell.value_index);
    std::vector<std::string> row{std::to_string(ci), sw.kind, value, std::to_string(cell.replicate),
                                 std::to_string(rep_seed), std::to_string(cell_seed)};
    std::vector<std::string> metrics;
    try {
      // The dataset is fixed per replicate; the cell seed drives training and the attack.
      ExperimentConfig cc = config;
      cc.seed = rep_seed;
      cc.apply_seed();
      if (sw.kind == "distribution") cc.data.synthetic.b_dist = DistributionSpec::parse(value);
      const auto split = prepare_data(cc);
      const auto& train = split.train;
      const std::string n_train = std::to_string(train.size());
      if (logreg_sweep) {
        auto lr = cc.logreg;
        lr.seed = derive_seed(cell_seed, fnv1a("sweep.logreg"));
        if (sw.kind == "batch_size")
          lr.batch_size = value == "n" || value == "full" ? train.size()
                                                          : to_size(parse_int(value, "sweep.values"), "batch_size");
        else
          lr.learning_rate = parse_real(value, "sweep.values");
        lr.validate(train.size());
        const auto run = run_revmul(train, lr, cc.attack_params.eps_rank);
        const auto& rep = run.leakage;
        double rank_sum = 0.0;
        for (const auto& b : rep.batches) rank_sum += b.rank;
        const double mean_rank = rep.batches.empty() ? 0.0 : rank_sum / static_cast<double>(rep.batches.size());
        metrics = {n_train,
                   std::to_string(rep.batches.size()),
                   std::to_string(rep.min_rank),
                   fmt(mean_rank),
                   std::to_string(rep.d_b),
                   fmt(rep.leakage_fraction),
                   std::to_string(rep.recovered_samples),
                   fmt(rep.max_error)};
      } else {
        auto bo = cc.boost;
        bo.seed = derive_seed(cell_seed, fnv1a("sweep.sboost"));
        auto at = cc.attack_params;
        if (sw.kind == "base") at.b = to_int(parse_int(value, "sweep.values"), "base");
        if (sw.kind == "k") at.k = to_int(parse_int(value, "sweep.values"), "k");
        if (sw.kind == "bins") bo.bins = to_int(parse_int(value, "sweep.values"), "bins");
        bo.validate(train.size());
        const auto run = run_revsum(train, bo, at, derive_seed(cell_seed, fnv1a("sweep.attack")));
        if (sw.kind == "aux_size") {
          const std::size_t aux_n =
              value == "all" ? kAllSamples : to_size(parse_int(value, "sweep.values"), "aux_size");
          const auto aux = choose_aux(train.size(), aux_n, derive_seed(cell_seed, fnv1a("sweep.aux")));
          const auto bounds = run_binmap(run, train, aux);
          double lo = 1.0, sum = 0.0, exact = 1.0;
          for (const auto& b : bounds) {
            lo = std::min(lo, b.inferred_fraction);
            sum += b.inferred_fraction;
            const auto col = static_cast<Eigen::Index>(b.feature);
            const Vector values = train.x_b.col(col);
            const auto truth = run.boost.b_partitions.at(b.feature).extremes(
                {values.data(), static_cast<std::size_t>(values.size())});
            exact = std::min(exact, revsum::exact_bound_fraction(b, truth));
          }
          metrics = {n_train, std::to_string(aux.size()), fmt(bounds.empty() ? 0.0 : lo),
                     fmt(bounds.empty() ? 0.0 : sum / static_cast<double>(bounds.size())),
                     fmt(bounds.empty() ? 0.0 : exact)};
        } else {
          const auto& s = run.success;
          std::size_t decoded = 0, unique = 0, ambiguous = 0, unrecoverable = 0, exhausted = 0;
          for (const auto& r : run.recovered) {
            decoded += r.decoded;
            unique += r.unique;
            ambiguous += r.ambiguous;
            unrecoverable += r.unrecoverable;
            exhausted += r.exhausted;
          }
          const double min_rate = s.per_feature.empty() ? 0.0 : *std::min_element(s.per_feature.begin(), s.per_feature.end());
          metrics = {n_train, std::to_string(s.encoded), std::to_string(run.plan.capacity), fmt(s.mean_rate),
                     fmt(min_rate), std::to_string(s.total_cracked), std::to_string(decoded), std::to_string(unique),
                     std::to_string(ambiguous), std::to_string(unrecoverable), std::to_string(exhausted)};
        }
      }
      row.push_back("ok");
    } catch (const std::exception& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      row.push_back("error: " + msg);
      metrics.clear();
    }
    metrics.resize(table.header.size() - row.size());
    row.insert(row.end(), metrics.begin(), metrics.end());
    rows[static_cast<std::size_t>(ci)] = std::move(row);
  }
  table.rows = std::move(rows);
  return table;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen",         "train-logreg", "attack-revmul", "train-sboost",
                                              "attack-revsum", "binmap",     "alt-model",     "sweep"};
  return names;
}

std::vector<std::string> run_command(const std::string& command, const ExperimentConfig& config,
                                     const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());
  std::vector<std::string> written;

  if (command == "gen") {
    std::ostringstream out;
    write_dataset_csv(out, load_dataset(config));
    write_file(dir / "dataset.csv", out.str(), written);
    return written;
  }

  if (command == "sweep") {
    const auto table = run_sweep(config);
    write_file(dir / ("sweep_" + config.sweep.kind + ".csv"), table_text(sweep_schema(config.sweep.kind), table),
               written);
    return written;
  }

  const auto split = prepare_data(config);
  const auto& train = split.train;
  const auto& test = split.test;

  if (command == "train-logreg") {
    require_protocol(config, ProtocolKind::kLogreg, command);
    config.logreg.validate(train.size());
    const auto res = logreg::train(train, config.logreg);
    std::ostringstream tr;
    logreg::write_transcript(tr, res.transcript, false);
    write_file(dir / "transcript.jsonl", tr.str(), written);
    const json model{{"schema", "vflsim.logreg_model v1"},
                     {"theta_a", vector_json(res.theta_a)},
                     {"theta_b", vector_json(res.theta_b)},
                     {"rounds", res.transcript.rounds.size()},
                     {"n_train", train.size()},
                     {"n_test", test.size()},
                     {"train_accuracy", logreg_accuracy(res.theta_a, res.theta_b, train)},
                     {"test_accuracy", logreg_accuracy(res.theta_a, res.theta_b, test)},
                     {"key_id", res.transcript.pk.key_id}};
    write_file(dir / "logreg_model.json", dump(model), written);
    return written;
  }

  if (command == "attack-revmul") {
    require_protocol(config, ProtocolKind::kLogreg, command);
    config.logreg.validate(train.size());
    const auto run = run_revmul(train, config.logreg, config.attack_params.eps_rank);
    json report = revmul::to_json(run.leakage);
    report["schema"] = "vflsim.revmul v1";
    report["n_train"] = train.size();
    write_file(dir / "revmul_leakage.json", dump(report), written);
    CsvTable t;
    t.header = {"batch", "size", "equations", "rank", "d_b", "leakage_fraction", "recovered_samples", "max_error",
                "max_projection_error"};
    for (std::size_t i = 0; i < run.leakage.batches.size(); ++i) {
      const auto& b = run.leakage.batches[i];
      t.rows.push_back({std::to_string(i), std::to_string(b.batch.size()), std::to_string(b.equations),
                        std::to_string(b.rank), std::to_string(b.d_b), fmt(b.leakage_fraction),
                        std::to_string(b.recovered_samples), fmt(b.max_error), fmt(b.max_projection_error)});
    }
    write_file(dir / "revmul_batches.csv", table_text("vflsim.revmul_batches", t), written);
    CsvTable x;
    x.header = {"id"};
    for (std::size_t j = 0; j < train.d_b(); ++j) x.header.push_back("x_b" + std::to_string(j));
    for (std::size_t i = 0; i < train.size(); ++i) {
      std::vector<std::string> r{train.ids.empty() ? std::to_string(i) : train.ids[i]};
      for (Eigen::Index j = 0; j < run.leakage.x_hat.cols(); ++j)
        r.push_back(fmt(run.leakage.x_hat(static_cast<Eigen::Index>(i), j)));
      x.rows.push_back(std::move(r));
    }
    write_file(dir / "revmul_recovered.csv", table_text("vflsim.revmul_recovered", x), written);
    return written;
  }

  require_protocol(config, ProtocolKind::kSecureBoost, command);
  config.boost.validate(train.size());

  if (command == "train-sboost") {
    const auto res = sboost::train_ensemble(train, config.boost);
    const auto train_pred = sboost::predict_labels(res.model, train.x_a, train.x_b, res.b_partitions);
    const auto test_pred = sboost::predict_labels(res.model, test.x_a, test.x_b, res.b_partitions);
    const json model{{"schema", "vflsim.sboost_model v1"},
                     {"model", sboost::to_json(res.model)},
                     {"n_train", train.size()},
                     {"n_test", test.size()},
                     {"decryptions", res.transcript.decryptions},
                     {"train_accuracy", sboost::accuracy(train_pred, train.y)},
                     {"test_accuracy", test.size() ? sboost::accuracy(test_pred, test.y) : 0.0}};
    write_file(dir / "sboost_model.json", dump(model), written);
    return written;
  }

  const auto run = run_revsum(train, config.boost, config.attack_params, config.attack_seed());

  if (command == "attack-revsum") {
    CsvTable t;
    t.header = {"feature", "encoded", "cracked", "wrong", "success_rate", "decoded", "unique", "ambiguous",
                "unrecoverable", "exhausted"};
    json features = json::array();
    for (std::size_t f = 0; f < run.recovered.size(); ++f) {
      const auto& r = run.recovered[f];
      t.rows.push_back({std::to_string(f), std::to_string(run.success.encoded), std::to_string(run.success.cracked[f]),
                        std::to_string(run.success.wrong[f]), fmt(run.success.per_feature[f]),
                        std::to_string(r.decoded), std::to_string(r.unique), std::to_string(r.ambiguous),
                        std::to_string(r.unrecoverable), std::to_string(r.exhausted)});
      features.push_back({{"feature", f},
                          {"name", f < train.b_names.size() ? train.b_names[f] : ""},
                          {"cracked", run.success.cracked[f]},
                          {"wrong", run.success.wrong[f]},
                          {"success_rate", run.success.per_feature[f]}});
    }
    write_file(dir / "revsum_success.csv", table_text("vflsim.revsum_success", t), written);
    const json report{{"schema", "vflsim.revsum v1"},
                      {"n_train", train.size()},
                      {"k", run.plan.k},
                      {"b", run.plan.b},
                      {"l", run.plan.l},
                      {"groups", run.plan.groups},
                      {"capacity", run.plan.capacity},
                      {"encoded", run.success.encoded},
                      {"mean_success_rate", run.success.mean_rate},
                      {"total_cracked", run.success.total_cracked},
                      {"features", features}};
    write_file(dir / "revsum_report.json", dump(report), written);
    return written;
  }

  const auto aux = choose_aux(train.size(), config.attack_params.aux_size, derive_seed(config.attack_seed(), fnv1a("aux")));
  const auto bounds = run_binmap(run, train, aux);

  if (command == "binmap") {
    CsvTable t;
    t.header = {"feature", "bin", "known", "lo", "hi", "support"};
    CsvTable summary;
    summary.header = {"feature", "bins", "aux", "inferred_fraction", "exact_fraction"};
    for (const auto& b : bounds) {
      for (std::size_t k = 0; k < b.bins.size(); ++k) {
        const auto& e = b.bins[k];
        t.rows.push_back({std::to_string(b.feature), std::to_string(k), e.known ? "1" : "0", e.known ? fmt(e.lo) : "",
                          e.known ? fmt(e.hi) : "", std::to_string(e.support)});
      }
      const Vector values = train.x_b.col(static_cast<Eigen::Index>(b.feature));
      const auto truth =
          run.boost.b_partitions.at(b.feature).extremes({values.data(), static_cast<std::size_t>(values.size())});
      summary.rows.push_back({std::to_string(b.feature), std::to_string(b.bins.size()), std::to_string(aux.size()),
                              fmt(b.inferred_fraction), fmt(revsum::exact_bound_fraction(b, truth))});
    }
    write_file(dir / "bin_bounds.csv", table_text("vflsim.bin_bounds", t), written);
    write_file(dir / "binmap_summary.csv", table_text("vflsim.binmap_summary", summary), written);
    return written;
  }

  if (command == "alt-model") {
    const auto report = revsum::evaluate_alternative(train, test, run.boost, run.orders, bounds, config.boost);
    json j = revsum::to_json(report);
    j["schema"] = "vflsim.alt_model v1";
    j["n_train"] = train.size();
    j["n_test"] = test.size();
    j["mean_success_rate"] = run.success.mean_rate;
    write_file(dir / "alt_model.json", dump(j), written);
    return written;
  }

  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace vfl::harness

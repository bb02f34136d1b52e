#include "vfl/common/error.hpp"
#include "vfl/harness/config.hpp"
#include "vfl/harness/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> d{
      {"gen", "generate or load the dataset and write dataset.csv"},
      {"train-logreg", "train encrypted logistic regression, write transcript and model"},
      {"attack-revmul", "train with a corrupted coordinator and reconstruct B's features"},
      {"train-sboost", "train encrypted SecureBoost and write the model"},
      {"attack-revsum", "pad magic numbers into gradients and recover B's bin assignments"},
      {"binmap", "estimate bin bounds from recovered assignments and auxiliary samples"},
      {"alt-model", "train the alternative classifier on leaked bins and compare"},
      {"sweep", "run the sweep described by sweep.* and write one CSV"},
  };
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vflsim: vertical federated learning protocols and attacks"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_option("--out", out_dir, "output directory, overrides output.dir");
  app.add_option("--set", overrides, "extra key=value settings, applied after the file");

  for (const auto& name : vfl::harness::command_names()) app.add_subcommand(name, descriptions().at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    vfl::harness::Config cfg = config_path.empty() ? vfl::harness::Config{} : vfl::harness::Config::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw vfl::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(vfl::harness::trim(kv.substr(0, eq)), vfl::harness::trim(kv.substr(eq + 1)));
    }
    if (seed) cfg.set("seed", std::to_string(*seed));
    if (command == "train-sboost" || command == "attack-revsum" || command == "binmap" || command == "alt-model") {
      if (!cfg.has("protocol.name")) cfg.set("protocol.name", "secureboost");
    }
    auto config = vfl::harness::ExperimentConfig::from_config(cfg);
    const std::string dir = out_dir.empty() ? config.output_dir : out_dir;
    for (const auto& path : vfl::harness::run_command(command, config, dir)) std::cout << path << '\n';
    return 0;
  } catch (const vfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const vfl::ProtocolAbort& e) {
    std::cerr << "protocol abort: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

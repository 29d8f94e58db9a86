// Command-line front end. Talks to the simulator exclusively through the
// C API in memsim.h; config handling and flag parsing live here.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "memsim.h"
#include "nlohmann/json.hpp"

namespace {

using nlohmann::json;

// Every ExperimentConfig field, capturable as a flag. Unset optionals leave
// the config file (or built-in default) value alone.
struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> oxide;
  std::optional<double> device_sigma;
  std::optional<int> curve_points;
  std::optional<int> n_inputs;
  std::optional<int> hidden;
  std::optional<int> n_outputs;
  std::optional<int> pair_budget;
  std::optional<double> epsilon;
  std::optional<int> max_steps;
  std::optional<std::string> batch;
  std::optional<double> stop_error;
  std::optional<double> init_scale;
  std::optional<int> train_per_class;
  std::optional<int> test_per_class;
  std::optional<double> eta;
  std::optional<double> transfer_sigma;
  std::optional<int> verify_iters;
  std::optional<int> mc_trials;
  std::optional<int> finetune_steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config_file,
                 "JSON config file; flags override its fields")
      ->check(CLI::ExistingFile);
  cmd.add_option("--oxide", flags.oxide, "Device oxide: zro2_y or sio2");
  cmd.add_option("--device_sigma", flags.device_sigma,
                 "Device-to-device parameter spread");
  cmd.add_option("--curve_points", flags.curve_points,
                 "Entries per synthesized response table");
  cmd.add_option("--n_inputs", flags.n_inputs, "Input count");
  cmd.add_option("--hidden", flags.hidden, "Hidden-layer neuron count");
  cmd.add_option("--n_outputs", flags.n_outputs, "Output count");
  cmd.add_option("--pair_budget", flags.pair_budget,
                 "Complementary pairs available on the board");
  cmd.add_option("--epsilon", flags.epsilon, "Learning rate in [0, 1)");
  cmd.add_option("--max_steps", flags.max_steps, "Training step limit");
  cmd.add_option("--batch", flags.batch,
                 "Update mode: full_batch or per_sample");
  cmd.add_option("--stop_error", flags.stop_error,
                 "Normalized-error stopping threshold");
  cmd.add_option("--init_scale", flags.init_scale,
                 "Uniform init range for weights and thresholds");
  cmd.add_option("--train_per_class", flags.train_per_class,
                 "Training samples per class");
  cmd.add_option("--test_per_class", flags.test_per_class,
                 "Test samples per class");
  cmd.add_option("--eta", flags.eta, "Input noise amplitude");
  cmd.add_option("--transfer_sigma", flags.transfer_sigma,
                 "Pulse noise during transfer; negative keeps the profile's");
  cmd.add_option("--verify_iters", flags.verify_iters,
                 "Write-verify retries per device");
  cmd.add_option("--mc_trials", flags.mc_trials,
                 "Monte Carlo trial count (transfer, sweep)");
  cmd.add_option("--finetune_steps", flags.finetune_steps,
                 "On-device training steps after transfer");
  cmd.add_option("--seed", flags.seed, "Master seed");
  cmd.add_option("--out_dir", flags.out_dir, "Output directory");
}

// Config file first, then flag overrides. Unknown keys are left for the
// library to reject so file and flag input get the same validation.
std::string merged_config(const Flags& flags) {
  json config = json::object();
  if (flags.config_file) {
    std::ifstream in(*flags.config_file);
    if (!in) {
      throw std::runtime_error("cannot open config file: " +
                               *flags.config_file);
    }
    std::ostringstream text;
    text << in.rdbuf();
    config = json::parse(text.str());
    if (!config.is_object()) {
      throw std::runtime_error("config file must hold a JSON object: " +
                               *flags.config_file);
    }
  }
  auto set = [&config](const char* key, const auto& value) {
    if (value) {
      config[key] = *value;
    }
  };
  set("oxide", flags.oxide);
  set("device_sigma", flags.device_sigma);
  set("curve_points", flags.curve_points);
  set("epsilon", flags.epsilon);
  set("max_steps", flags.max_steps);
  set("batch", flags.batch);
  set("stop_error", flags.stop_error);
  set("init_scale", flags.init_scale);
  set("train_per_class", flags.train_per_class);
  set("test_per_class", flags.test_per_class);
  set("eta", flags.eta);
  set("transfer_sigma", flags.transfer_sigma);
  set("verify_iters", flags.verify_iters);
  set("mc_trials", flags.mc_trials);
  set("finetune_steps", flags.finetune_steps);
  set("seed", flags.seed);
  set("out_dir", flags.out_dir);
  if (flags.n_inputs || flags.hidden || flags.n_outputs ||
      flags.pair_budget) {
    json topology =
        config.contains("topology") ? config["topology"] : json::object();
    auto set_dim = [&topology](const char* key, const auto& value) {
      if (value) {
        topology[key] = *value;
      }
    };
    set_dim("n_inputs", flags.n_inputs);
    if (flags.hidden) {
      // The flag names one hidden layer; deeper stacks go in the config file.
      topology["hidden"] = json::array({*flags.hidden});
    }
    set_dim("n_outputs", flags.n_outputs);
    set_dim("pair_budget", flags.pair_budget);
    config["topology"] = topology;
  }
  return config.dump();
}

// 0 success, 2 bad config or arguments, 3 numeric failure, 4 I/O.
int exit_code(ms_status status) {
  switch (status) {
    case MS_OK:
      return 0;
    case MS_ERR_INVALID_ARGUMENT:
    case MS_ERR_CONFIG:
    case MS_ERR_RANGE:
    case MS_ERR_UNSAFE_VOLTAGE:
    case MS_ERR_DIMENSION:
      return 2;
    case MS_ERR_NUMERIC:
    case MS_ERR_INTERNAL:
      return 3;
    case MS_ERR_IO:
      return 4;
  }
  return 3;
}

int finish(ms_status status) {
  if (status != MS_OK) {
    std::cerr << "error: " << ms_last_error() << "\n";
  }
  return exit_code(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Simulator of a two-layer perceptron built from complementary "
      "memristive-device pairs"};
  app.require_subcommand(1);

  Flags flags;
  std::string network_file;
  std::string dataset_file;

  CLI::App* synth = app.add_subcommand(
      "synth-devices", "Synthesize a device array and its response tables");
  add_common_flags(*synth, flags);

  CLI::App* train = app.add_subcommand(
      "train", "Train a software net on generated noisy samples");
  add_common_flags(*train, flags);

  CLI::App* transfer = app.add_subcommand(
      "transfer", "Program a trained net onto the device array");
  add_common_flags(*transfer, flags);
  transfer->add_option("--network", network_file,
                       "Trained network file (default: out_dir/network.json)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a stored network");
  add_common_flags(*eval, flags);
  eval->add_option("--network", network_file,
                   "Network file (default: out_dir/network.json)");
  eval->add_option("--dataset", dataset_file,
                   "Sample CSV (default: generate a test set)");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Run Monte Carlo end-to-end trials in parallel");
  add_common_flags(*sweep, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::string config;
  try {
    config = merged_config(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (synth->parsed()) {
    return finish(ms_cmd_synth(config.c_str()));
  }
  if (train->parsed()) {
    return finish(ms_cmd_train(config.c_str()));
  }
  if (transfer->parsed()) {
    return finish(ms_cmd_transfer(config.c_str(), network_file.c_str()));
  }
  if (eval->parsed()) {
    return finish(ms_cmd_eval(config.c_str(), network_file.c_str(),
                              dataset_file.c_str()));
  }
  if (sweep->parsed()) {
    return finish(ms_cmd_sweep(config.c_str()));
  }
  return 2;
}

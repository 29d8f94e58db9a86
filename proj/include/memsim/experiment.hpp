#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "memsim/programming.hpp"

namespace memsim {

// Everything one experiment run needs, collected up front so a command can
// be validated completely before it touches the filesystem.
struct ExperimentConfig {
  // Device bank.
  OxideKind oxide = OxideKind::ZrO2Y;
  double device_sigma = 0.05;  // device-to-device spread of the profiles
  int curve_points = 33;

  Topology topology;

  // Training.
  double epsilon = 0.1;
  int max_steps = 1000;
  BatchMode batch = BatchMode::FullBatch;
  double stop_error = 0.05;
  double init_scale = 0.1;

  // Dataset.
  int train_per_class = 20;
  int test_per_class = 100;
  double eta = 0.25;

  // Transfer.
  double transfer_sigma = -1.0;  // >= 0 overrides every device's sigma_pulse
  int verify_iters = 0;
  int mc_trials = 50;
  int finetune_steps = 0;

  std::uint64_t seed = 1;
  std::filesystem::path out_dir;  // empty: $MEMSIM_OUT_DIR, else "."

  void validate() const;

  [[nodiscard]] std::string to_json() const;
  static ExperimentConfig from_json(std::string_view text);

  // out_dir resolved against the environment fallback.
  [[nodiscard]] std::filesystem::path resolved_out_dir() const;
};

// Name of the environment variable consulted when out_dir is empty.
inline constexpr const char* kOutDirEnv = "MEMSIM_OUT_DIR";

struct EvalMetrics {
  int samples = 0;
  int concave_as_concave = 0;
  int concave_as_convex = 0;
  int convex_as_concave = 0;
  int convex_as_convex = 0;
  double accuracy = 0.0;
  double mean_abs_margin = 0.0;

  [[nodiscard]] std::string to_json() const;
};

// Fraction of samples whose classify() matches the label, plus confusion
// counts and the mean |output|.
EvalMetrics evaluate(const Perceptron& net, const Dataset& data);

// The board: topology.pair_budget pairs of the configured oxide, written as
// array.json plus one response-table CSV per device.
DeviceArray cmd_synth(const ExperimentConfig& config);

struct TrainOutcome {
  Perceptron net;
  ErrorHistory history;
  Dataset train_set;
};

// Trains a fresh net on a generated noisy set. The weight clamp is the
// tighter of 1 and what every array pair can realize, so the result is
// always transferable. Writes network.json, history.csv, train.csv.
TrainOutcome cmd_train(const ExperimentConfig& config);

struct TransferOutcome {
  TransferResult main;          // the programmed board
  EvalMetrics software_eval;    // source net on the evaluation set
  EvalMetrics device_eval;      // programmed net on the same set
  std::vector<double> trial_accuracy;  // one entry per Monte Carlo trial
};

// Programs the trained net onto the array and measures the accuracy cost.
// Writes device_network.json, program_plan.json, pulse_audit.csv and, when
// mc_trials > 0, transfer_accuracy.csv; finetune_steps > 0 additionally
// writes finetuned_network.json and finetune_history.csv.
TransferOutcome cmd_transfer(const ExperimentConfig& config,
                             const std::filesystem::path& network_file = {});

// Evaluates a stored net. With an empty dataset_file the test set is
// generated from the config. Writes metrics.json.
EvalMetrics cmd_eval(const ExperimentConfig& config,
                     const std::filesystem::path& network_file = {},
                     const std::filesystem::path& dataset_file = {});

struct SweepRow {
  int trial = 0;
  int steps = 0;
  double final_normalized_error = 0.0;
  double software_accuracy = 0.0;
  double device_accuracy = 0.0;
  double drop_points = 0.0;
};

// mc_trials end-to-end runs (fresh devices, data, init per trial), executed
// in parallel on independent streams. Writes sweep.csv.
std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config);

}  // namespace memsim

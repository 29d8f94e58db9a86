#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memsim/network.hpp"

namespace memsim {

enum class BatchMode { FullBatch, PerSample };

std::string to_string(BatchMode mode);
BatchMode batch_mode_from_string(std::string_view name);

struct TrainConfig {
  double epsilon = 0.1;  // gradient step size, must stay below 1
  int max_steps = 1000;
  double clamp = 1.0;  // weight and threshold magnitude bound
  BatchMode batch = BatchMode::FullBatch;
  std::uint64_t seed = 0;    // orders the per-sample passes
  double stop_error = 0.05;  // stop once E(M)/E(0) drops below this

  void validate() const;
};

// One presentation: input voltages and the desired outputs.
struct TrainSample {
  std::vector<double> x;
  std::vector<double> d;
};

using TrainSet = std::vector<TrainSample>;

// Scales every sample for safe input presentation and attaches the +-1
// class target.
TrainSet to_train_set(const Dataset& data);

struct HistoryEntry {
  int step = 0;
  double error = 0.0;
  double normalized_error = 1.0;
};

// Error-vs-step record of one run; entry 0 is the untrained net, with
// normalized error exactly 1.
struct ErrorHistory {
  std::vector<HistoryEntry> entries;

  void save_csv(const std::filesystem::path& path) const;
  static ErrorHistory load_csv(const std::filesystem::path& path);
};

// Half the summed squared residual over every sample and output.
double loss(const Perceptron& net, const TrainSet& data);

// Delta multipliers, indexed like thresholds. Output layer:
// F'(S) * (d - y); hidden layers: F'(S) * sum over downstream deltas
// weighted by the connecting weights.
std::vector<std::vector<double>> deltas(const Perceptron& net,
                                        const ForwardTrace& trace,
                                        std::span<const double> target);

// Batch-summed update, already scaled by epsilon: dw = epsilon * delta * x
// per connection, dtheta = epsilon * delta. Not yet clamped.
struct Updates {
  std::vector<std::vector<std::vector<double>>> dw;
  std::vector<std::vector<double>> dtheta;
};

Updates batch_updates(const Perceptron& net, const TrainSet& data,
                      double epsilon);

struct StepResult {
  Perceptron net;
  double error = 0.0;  // full-set loss of the net the step started from
};

// One training step on a software net: gradient update then a hard clamp of
// every weight and threshold to [-clamp, +clamp]. PER_SAMPLE mode applies
// one shuffled pass of single-sample updates, clamping after each.
StepResult step(const Perceptron& net, const TrainSet& data,
                const TrainConfig& config, Rng& rng);

struct TrainResult {
  Perceptron net;
  ErrorHistory history;
};

// Runs step until max_steps or normalized error < stop_error. Throws
// NonFiniteLoss as soon as the loss leaves the reals.
TrainResult train(const Perceptron& net, const TrainSet& data,
                  const TrainConfig& config);

// Flattened parameter order shared by the two gradient routes and
// init_random: layer by layer, neuron by neuron, fan-in weights then the
// threshold.
std::size_t parameter_count(const Topology& topology);

// dE/dp from the delta rule (note: batch_updates returns -epsilon * this).
std::vector<double> analytic_gradient(const Perceptron& net,
                                      const TrainSet& data);

// dE/dp by central finite differences, (E(p+h) - E(p-h)) / 2h. Pair with a
// smooth activation; table kinks defeat the quadrature.
std::vector<double> numeric_gradient(const Perceptron& net,
                                     const TrainSet& data, double h);

}  // namespace memsim

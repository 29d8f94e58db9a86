#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memsim/circuit.hpp"
#include "memsim/dataset.hpp"
#include "memsim/rng.hpp"

namespace memsim {

// Layer shape of the perceptron plus the board's complementary-pair budget.
// Every neuron consumes one pair per input and one for its threshold.
struct Topology {
  int n_inputs = 4;
  std::vector<int> hidden = {2};
  int n_outputs = 1;
  int pair_budget = 16;

  // Sizes input layer first: default {4, 2, 1}.
  [[nodiscard]] std::vector<int> layer_sizes() const;
  [[nodiscard]] int num_weight_layers() const;

  // Sum over neurons of (fan_in + 1). Default topology: 13.
  [[nodiscard]] int pairs_needed() const;

  void validate() const;

  bool operator==(const Topology&) const = default;
};

// Feedforward net with at least one hidden layer. Weights are dimensionless;
// thresholds are stored as the weight of the adjusting-input pair with the
// 1 V factor absorbed, so both share one update rule and one clamp bound.
//
// `backing` is empty for a plain software net. When present it holds one
// circuit per neuron, indexed like `weights`, and every weight must equal
// the pair weight realized by its circuit.
struct Perceptron {
  Topology topology;
  std::vector<std::vector<std::vector<double>>> weights;  // [layer][neuron][in]
  std::vector<std::vector<double>> thresholds;            // [layer][neuron]
  Activation activation = Activation::tanh_table();
  std::vector<std::vector<NeuronCircuit>> backing;

  [[nodiscard]] bool device_backed() const { return !backing.empty(); }

  // Shape checks, plus software/backing weight consistency when backed.
  void validate() const;
};

// All-zero weights and thresholds.
Perceptron zero_network(const Topology& topology,
                        Activation activation = Activation::tanh_table());

// Weights and thresholds i.i.d. uniform on [-scale, +scale], drawn layer by
// layer, neuron by neuron, inputs before threshold.
Perceptron init_random(const Topology& topology, Rng& rng, double scale = 0.1,
                       Activation activation = Activation::tanh_table());

// Copies the realized pair weights of a backed net into `weights` and
// `thresholds`. No-op shape-wise; throws InvalidArgument if not backed.
void sync_from_backing(Perceptron& net);

// Per-layer intermediate values of one forward pass, kept for backprop.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> pre;   // summed S, per non-input layer
  std::vector<std::vector<double>> post;  // F[S], per non-input layer

  [[nodiscard]] const std::vector<double>& outputs() const {
    return post.back();
  }
};

// Layer by layer S = theta + sum w*x, y = F[S]. On a device-backed net the
// sums come from the voltage-domain amplifier route instead; both routes are
// evaluated and must agree within 1e-9 (relative), else NumericError.
// Throws DimensionMismatch on a wrong input count and UnsafeInputVoltage
// when any |x_i| > 1.
ForwardTrace forward(const Perceptron& net, std::span<const double> x);

// Sign of the single output: y >= 0 reads as Concave, else Convex.
Label classify(const Perceptron& net, std::span<const double> x);

std::string network_to_json(const Perceptron& net);
Perceptron network_from_json(std::string_view text);

void save_network(const Perceptron& net, const std::filesystem::path& path);
Perceptron load_network(const std::filesystem::path& path);

}  // namespace memsim

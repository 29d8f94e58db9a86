#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "memsim/errors.hpp"
#include "memsim/network.hpp"
#include "memsim/programming.hpp"
#include "memsim/rng.hpp"

using namespace memsim;

TEST_CASE("default topology fits the board and counts its pairs") {
  Topology t;
  CHECK(t.layer_sizes() == std::vector<int>{4, 2, 1});
  CHECK(t.num_weight_layers() == 2);
  // Hidden: 2 * (4 + 1); output: 1 * (2 + 1).
  CHECK(t.pairs_needed() == 13);
  t.validate();
}

TEST_CASE("topology validation rejects over-budget and empty shapes") {
  Topology t;
  t.pair_budget = 12;  // needs 13
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = Topology{};
  t.hidden = {};  // must keep one hidden layer
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = Topology{};
  t.n_inputs = 0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = Topology{};
  t.hidden = {3};  // 3*5 + 1*4 = 19 > 16
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("zero network outputs zero and classifies ties as concave") {
  Perceptron net = zero_network(Topology{});
  net.validate();
  std::vector<double> x = {0.5, -0.5, 0.25, 0.0};
  ForwardTrace trace = forward(net, x);
  CHECK(trace.outputs()[0] == 0.0);
  CHECK(classify(net, x) == Label::Concave);
}

TEST_CASE("random init stays inside its scale and is reproducible") {
  Rng a(21), b(21);
  Perceptron n1 = init_random(Topology{}, a, 0.1);
  Perceptron n2 = init_random(Topology{}, b, 0.1);
  n1.validate();
  CHECK(n1.weights == n2.weights);
  CHECK(n1.thresholds == n2.thresholds);
  for (const auto& layer : n1.weights) {
    for (const auto& neuron : layer) {
      for (double w : neuron) {
        CHECK(std::abs(w) <= 0.1);
      }
    }
  }
  for (const auto& layer : n1.thresholds) {
    for (double th : layer) {
      CHECK(std::abs(th) <= 0.1);
    }
  }
}

TEST_CASE("forward computes the layered tanh composition") {
  Perceptron net = zero_network(Topology{}, Activation::smooth_tanh());
  net.weights[0][0] = {0.3, -0.2, 0.1, 0.05};
  net.weights[0][1] = {-0.1, 0.4, -0.3, 0.2};
  net.thresholds[0] = {0.05, -0.1};
  net.weights[1][0] = {0.5, -0.25};
  net.thresholds[1] = {0.15};
  std::vector<double> x = {0.8, -0.8, -0.8, 0.8};
  ForwardTrace trace = forward(net, x);
  // Frozen from an independent evaluation of the same composition.
  CHECK(trace.outputs()[0] ==
        doctest::Approx(0.35325092462764501).epsilon(1e-12));
  REQUIRE(trace.pre.size() == 2);
  REQUIRE(trace.post.size() == 2);
  CHECK(trace.post[0][0] == doctest::Approx(std::tanh(trace.pre[0][0])));
}

TEST_CASE("forward validates input count and voltage window") {
  Perceptron net = zero_network(Topology{});
  std::vector<double> three = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(forward(net, three), DimensionMismatch);
  std::vector<double> hot = {0.1, 0.2, 0.3, 1.2};
  CHECK_THROWS_AS(forward(net, hot), UnsafeInputVoltage);
  std::vector<double> nan = {0.1, 0.2, 0.3,
                             std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(forward(net, nan), UnsafeInputVoltage);
}

TEST_CASE("network JSON round-trips bit-exactly") {
  Rng rng(33);
  Perceptron net = init_random(Topology{}, rng, 0.1);
  std::string text = network_to_json(net);
  Perceptron back = network_from_json(text);
  CHECK(back.topology == net.topology);
  CHECK(back.weights == net.weights);
  CHECK(back.thresholds == net.thresholds);
  CHECK(back.activation.kind() == net.activation.kind());
  CHECK(!back.device_backed());
  // Serialization is canonical: a second trip yields the same bytes.
  CHECK(network_to_json(back) == text);
}

TEST_CASE("network file save and load round-trips") {
  Rng rng(34);
  Perceptron net = init_random(Topology{}, rng, 0.1);
  auto path = std::filesystem::temp_directory_path() / "memsim_net.json";
  save_network(net, path);
  Perceptron back = load_network(path);
  CHECK(back.weights == net.weights);
  CHECK(back.thresholds == net.thresholds);
  std::filesystem::remove(path);
}

TEST_CASE("device-backed forward agrees with the weight route") {
  Rng rng(55);
  DeviceArray array = synth_array(OxideProfile::zro2_y(), 16, 0.05, rng);
  Rng irng(56);
  Perceptron net = init_random(Topology{}, irng, 0.1);
  TransferResult result = transfer(net, array, rng);
  result.net.validate();
  REQUIRE(result.net.device_backed());
  Rng xrng(57);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x;
    for (int k = 0; k < 4; ++k) {
      x.push_back(xrng.uniform(-1.0, 1.0));
    }
    // forward() itself cross-checks the amplifier route against the
    // weight sums at 1e-9 and throws if they disagree.
    ForwardTrace trace = forward(result.net, x);
    CHECK(std::abs(trace.outputs()[0]) <= 1.0 + 1e-12);
  }
}

TEST_CASE("backed network JSON round-trips with its devices") {
  Rng rng(58);
  DeviceArray array = synth_array(OxideProfile::zro2_y(), 16, 0.05, rng);
  Rng irng(59);
  Perceptron net = init_random(Topology{}, irng, 0.1);
  TransferResult result = transfer(net, array, rng);
  std::string text = network_to_json(result.net);
  Perceptron back = network_from_json(text);
  REQUIRE(back.device_backed());
  back.validate();  // weights consistent with the restored circuits
  CHECK(back.weights == result.net.weights);
  CHECK(network_to_json(back) == text);
}

TEST_CASE("classify needs a single output") {
  Topology t;
  t.hidden = {2};
  t.n_outputs = 2;
  t.pair_budget = 18;
  Perceptron net = zero_network(t);
  std::vector<double> x = {0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(classify(net, x), InvalidArgument);
}

TEST_CASE("validate flags weight and backing disagreement") {
  Rng rng(60);
  DeviceArray array = synth_array(OxideProfile::zro2_y(), 16, 0.0, rng);
  Rng irng(61);
  Perceptron net = init_random(Topology{}, irng, 0.1);
  TransferResult result = transfer(net, array, rng);
  result.net.weights[0][0][0] += 0.01;  // break consistency
  CHECK_THROWS_AS(result.net.validate(), InvalidArgument);
}

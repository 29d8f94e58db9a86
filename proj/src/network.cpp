#include "memsim/network.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

namespace {

using nlohmann::ordered_json;

std::size_t checked_size(int n) { return static_cast<std::size_t>(n); }

}  // namespace

std::vector<int> Topology::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(n_inputs);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(n_outputs);
  return sizes;
}

int Topology::num_weight_layers() const {
  return static_cast<int>(hidden.size()) + 1;
}

int Topology::pairs_needed() const {
  std::vector<int> sizes = layer_sizes();
  int pairs = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    pairs += sizes[l + 1] * (sizes[l] + 1);
  }
  return pairs;
}

void Topology::validate() const {
  if (n_inputs < 1 || n_outputs < 1) {
    throw ConfigError("topology: layer sizes must be at least 1");
  }
  if (hidden.empty()) {
    throw ConfigError("topology: at least one hidden layer is required");
  }
  for (int h : hidden) {
    if (h < 1) {
      throw ConfigError("topology: layer sizes must be at least 1");
    }
  }
  if (pairs_needed() > pair_budget) {
    std::ostringstream msg;
    msg << "topology: needs " << pairs_needed()
        << " complementary pairs, budget is " << pair_budget;
    throw ConfigError(msg.str());
  }
}

void Perceptron::validate() const {
  topology.validate();
  std::vector<int> sizes = topology.layer_sizes();
  std::size_t layers = sizes.size() - 1;
  if (weights.size() != layers || thresholds.size() != layers) {
    throw InvalidArgument("network: layer count does not match topology");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (weights[l].size() != checked_size(sizes[l + 1]) ||
        thresholds[l].size() != checked_size(sizes[l + 1])) {
      throw InvalidArgument("network: neuron count does not match topology");
    }
    for (const auto& row : weights[l]) {
      if (row.size() != checked_size(sizes[l])) {
        throw InvalidArgument("network: weight row does not match fan-in");
      }
    }
  }
  if (backing.empty()) return;

  if (backing.size() != layers) {
    throw InvalidArgument("network: backing layer count mismatch");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (backing[l].size() != checked_size(sizes[l + 1])) {
      throw InvalidArgument("network: backing neuron count mismatch");
    }
    for (std::size_t j = 0; j < backing[l].size(); ++j) {
      const NeuronCircuit& node = backing[l][j];
      if (node.input_pairs.size() != checked_size(sizes[l])) {
        throw InvalidArgument("network: backing pair count mismatch");
      }
      for (std::size_t i = 0; i < node.input_pairs.size(); ++i) {
        double pw =
            pair_weight(node.input_pairs[i], node.r_feedback, node.gain);
        if (std::abs(weights[l][j][i] - pw) > 1e-12) {
          throw InvalidArgument(
              "network: weight out of sync with its circuit pair");
        }
      }
      double ptheta =
          pair_weight(node.theta_pair, node.r_feedback, node.gain) *
          node.u_theta;
      if (std::abs(thresholds[l][j] - ptheta) > 1e-12) {
        throw InvalidArgument(
            "network: threshold out of sync with its circuit pair");
      }
    }
  }
}

Perceptron zero_network(const Topology& topology, Activation activation) {
  topology.validate();
  Perceptron net;
  net.topology = topology;
  net.activation = std::move(activation);
  std::vector<int> sizes = topology.layer_sizes();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.weights.emplace_back(checked_size(sizes[l + 1]),
                             std::vector<double>(checked_size(sizes[l]), 0.0));
    net.thresholds.emplace_back(checked_size(sizes[l + 1]), 0.0);
  }
  return net;
}

Perceptron init_random(const Topology& topology, Rng& rng, double scale,
                       Activation activation) {
  if (scale < 0.0) {
    throw InvalidArgument("init_random: scale must be non-negative");
  }
  Perceptron net = zero_network(topology, std::move(activation));
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t j = 0; j < net.weights[l].size(); ++j) {
      for (double& w : net.weights[l][j]) {
        w = rng.uniform(-scale, scale);
      }
      net.thresholds[l][j] = rng.uniform(-scale, scale);
    }
  }
  return net;
}

void sync_from_backing(Perceptron& net) {
  if (!net.device_backed()) {
    throw InvalidArgument("sync_from_backing: network has no device backing");
  }
  for (std::size_t l = 0; l < net.backing.size(); ++l) {
    for (std::size_t j = 0; j < net.backing[l].size(); ++j) {
      const NeuronCircuit& node = net.backing[l][j];
      for (std::size_t i = 0; i < node.input_pairs.size(); ++i) {
        net.weights[l][j][i] =
            pair_weight(node.input_pairs[i], node.r_feedback, node.gain);
      }
      net.thresholds[l][j] =
          pair_weight(node.theta_pair, node.r_feedback, node.gain) *
          node.u_theta;
    }
  }
}

ForwardTrace forward(const Perceptron& net, std::span<const double> x) {
  if (x.size() != checked_size(net.topology.n_inputs)) {
    std::ostringstream msg;
    msg << "forward: got " << x.size() << " inputs, topology expects "
        << net.topology.n_inputs;
    throw DimensionMismatch(msg.str());
  }
  for (double v : x) {
    if (!(std::abs(v) <= 1.0)) {
      std::ostringstream msg;
      msg << "forward: input " << v << " outside the +-1 safe range";
      throw UnsafeInputVoltage(msg.str());
    }
  }

  ForwardTrace trace;
  trace.input.assign(x.begin(), x.end());
  const std::vector<double>* current = &trace.input;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::size_t n_out = net.weights[l].size();
    std::vector<double> pre(n_out, 0.0);
    std::vector<double> post(n_out, 0.0);
    for (std::size_t j = 0; j < n_out; ++j) {
      double s = net.thresholds[l][j];
      const std::vector<double>& row = net.weights[l][j];
      for (std::size_t i = 0; i < row.size(); ++i) {
        s += row[i] * (*current)[i];
      }
      if (net.device_backed()) {
        // Authoritative value comes from the amplifier route; the abstract
        // sum cross-checks that weights and resistances agree.
        double s_circuit = summing_output(net.backing[l][j], *current);
        if (std::abs(s_circuit - s) > 1e-9 * std::max(1.0, std::abs(s))) {
          std::ostringstream msg;
          msg << "forward: circuit route " << s_circuit
              << " disagrees with weight route " << s;
          throw NumericError(msg.str());
        }
        s = s_circuit;
      }
      pre[j] = s;
      post[j] = net.activation.value(s);
    }
    trace.pre.push_back(std::move(pre));
    trace.post.push_back(std::move(post));
    current = &trace.post.back();
  }
  return trace;
}

Label classify(const Perceptron& net, std::span<const double> x) {
  if (net.topology.n_outputs != 1) {
    throw InvalidArgument("classify: needs a single-output network");
  }
  double y = forward(net, x).outputs()[0];
  return y >= 0.0 ? Label::Concave : Label::Convex;
}

namespace {

ordered_json activation_to_json(const Activation& act) {
  ordered_json j;
  switch (act.kind()) {
    case Activation::Kind::TanhTable:
      j["kind"] = "tanh_table";
      break;
    case Activation::Kind::HardClipTable:
      j["kind"] = "hard_clip_table";
      break;
    case Activation::Kind::CustomTable:
      j["kind"] = "table";
      break;
    case Activation::Kind::SmoothTanh:
      j["kind"] = "smooth_tanh";
      return j;
  }
  const ActivationTable& table = act.table_ref();
  j["s_min"] = table.s_min();
  j["s_max"] = table.s_max();
  j["n_samples"] = table.n_samples();
  if (act.kind() == Activation::Kind::CustomTable) {
    j["f"] = table.values();
    j["df"] = table.slopes();
  }
  return j;
}

Activation activation_from_json(const ordered_json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "smooth_tanh") return Activation::smooth_tanh();
  double s_min = j.at("s_min").get<double>();
  double s_max = j.at("s_max").get<double>();
  int n = j.at("n_samples").get<int>();
  if (kind == "tanh_table") return Activation::tanh_table(s_min, s_max, n);
  if (kind == "hard_clip_table") {
    return Activation::hard_clip_table(s_min, s_max, n);
  }
  if (kind == "table") {
    return Activation::table(ActivationTable::from_samples(
        s_min, s_max, j.at("f").get<std::vector<double>>(),
        j.at("df").get<std::vector<double>>()));
  }
  throw IoError("network: unknown activation kind \"" + kind + "\"");
}

ordered_json device_to_json(const DeviceState& dev) {
  ordered_json j;
  j["profile"] = ordered_json::parse(dev.profile().to_json());
  ordered_json amps = ordered_json::array();
  ordered_json ohms = ordered_json::array();
  for (const CalibrationPoint& p : dev.curve().points()) {
    amps.push_back(p.amplitude_v);
    ohms.push_back(p.resistance_ohm);
  }
  j["curve"] = {{"amplitude_v", std::move(amps)},
                {"resistance_ohm", std::move(ohms)}};
  j["resistance_ohm"] = dev.resistance();
  return j;
}

DeviceState device_from_json(const ordered_json& j) {
  OxideProfile profile = OxideProfile::from_json(j.at("profile").dump());
  const ordered_json& c = j.at("curve");
  auto amps = c.at("amplitude_v").get<std::vector<double>>();
  auto ohms = c.at("resistance_ohm").get<std::vector<double>>();
  if (amps.size() != ohms.size()) {
    throw IoError("network: curve column lengths differ");
  }
  std::vector<CalibrationPoint> points;
  points.reserve(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) {
    points.push_back({amps[i], ohms[i]});
  }
  DeviceState dev(std::move(profile), CalibrationCurve(std::move(points)));
  dev.set_resistance(j.at("resistance_ohm").get<double>());
  return dev;
}

ordered_json pair_to_json(const ComplementaryPair& pair) {
  return {{"upper", device_to_json(pair.upper)},
          {"lower", device_to_json(pair.lower)}};
}

ComplementaryPair pair_from_json(const ordered_json& j) {
  return {device_from_json(j.at("upper")), device_from_json(j.at("lower"))};
}

}  // namespace

std::string network_to_json(const Perceptron& net) {
  net.validate();
  ordered_json j;
  j["format"] = "memsim-network";
  j["topology"] = {{"n_inputs", net.topology.n_inputs},
                   {"hidden", net.topology.hidden},
                   {"n_outputs", net.topology.n_outputs},
                   {"pair_budget", net.topology.pair_budget}};
  j["activation"] = activation_to_json(net.activation);
  j["weights"] = net.weights;
  j["thresholds"] = net.thresholds;
  if (net.device_backed()) {
    const NeuronCircuit& first = net.backing.front().front();
    ordered_json layers = ordered_json::array();
    for (const auto& layer : net.backing) {
      ordered_json nodes = ordered_json::array();
      for (const NeuronCircuit& node : layer) {
        ordered_json inputs = ordered_json::array();
        for (const ComplementaryPair& pair : node.input_pairs) {
          inputs.push_back(pair_to_json(pair));
        }
        nodes.push_back(
            {{"inputs", std::move(inputs)}, {"theta", pair_to_json(node.theta_pair)}});
      }
      layers.push_back(std::move(nodes));
    }
    j["backing"] = {{"circuit",
                     {{"r_feedback", first.r_feedback},
                      {"u_theta", first.u_theta},
                      {"gain", first.gain}}},
                    {"layers", std::move(layers)}};
  } else {
    j["backing"] = nullptr;
  }
  return j.dump(2);
}

Perceptron network_from_json(std::string_view text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw IoError("network: invalid JSON");
  }
  try {
    if (j.at("format").get<std::string>() != "memsim-network") {
      throw IoError("network: unrecognized format tag");
    }
    Topology topo;
    const ordered_json& t = j.at("topology");
    topo.n_inputs = t.at("n_inputs").get<int>();
    topo.hidden = t.at("hidden").get<std::vector<int>>();
    topo.n_outputs = t.at("n_outputs").get<int>();
    topo.pair_budget = t.at("pair_budget").get<int>();

    Perceptron net = zero_network(topo, activation_from_json(j.at("activation")));
    net.weights =
        j.at("weights").get<std::vector<std::vector<std::vector<double>>>>();
    net.thresholds =
        j.at("thresholds").get<std::vector<std::vector<double>>>();

    if (!j.at("backing").is_null()) {
      const ordered_json& b = j.at("backing");
      CircuitParams params;
      params.r_feedback = b.at("circuit").at("r_feedback").get<double>();
      params.u_theta = b.at("circuit").at("u_theta").get<double>();
      params.gain = b.at("circuit").at("gain").get<double>();
      params.validate();
      for (const ordered_json& layer : b.at("layers")) {
        std::vector<NeuronCircuit> nodes;
        for (const ordered_json& node : layer) {
          std::vector<ComplementaryPair> inputs;
          for (const ordered_json& pair : node.at("inputs")) {
            inputs.push_back(pair_from_json(pair));
          }
          nodes.emplace_back(std::move(inputs),
                             pair_from_json(node.at("theta")), params);
        }
        net.backing.push_back(std::move(nodes));
      }
    }
    net.validate();
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("network: ") + e.what());
  }
}

void save_network(const Perceptron& net, const std::filesystem::path& path) {
  io::atomic_write(path, network_to_json(net) + "\n");
}

Perceptron load_network(const std::filesystem::path& path) {
  return network_from_json(io::read_file(path));
}

}  // namespace memsim

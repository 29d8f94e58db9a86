#include "memsim/programming.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

namespace {

using nlohmann::ordered_json;

std::string device_csv_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "device_%02zu.csv", index);
  return buf;
}

}  // namespace

double DeviceArray::min_weight_bound() const {
  if (pairs.empty()) {
    throw InvalidArgument("array: no pairs");
  }
  double bound = pair_weight_bound(pairs.front(), params.r_feedback,
                                   params.gain);
  for (const ComplementaryPair& pair : pairs) {
    bound = std::min(bound,
                     pair_weight_bound(pair, params.r_feedback, params.gain));
  }
  return bound;
}

DeviceArray synth_array(const OxideProfile& nominal, int n_pairs,
                        double device_sigma, Rng& rng, int curve_points) {
  nominal.validate();
  if (n_pairs < 1) {
    throw InvalidArgument("array: need at least one pair");
  }
  if (device_sigma < 0.0) {
    throw InvalidArgument("array: device_sigma must be non-negative");
  }
  DeviceArray array;
  array.oxide = nominal.kind;
  array.params.gain = normalizing_gain(nominal, array.params.r_feedback);
  array.params.validate();
  array.pairs.reserve(static_cast<std::size_t>(n_pairs));
  for (int k = 0; k < n_pairs; ++k) {
    DeviceState upper =
        make_device(nominal.perturbed(rng, device_sigma), curve_points);
    DeviceState lower =
        make_device(nominal.perturbed(rng, device_sigma), curve_points);
    array.pairs.emplace_back(std::move(upper), std::move(lower));
  }
  return array;
}

void save_array(const DeviceArray& array, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError(dir.string() + ": " + ec.message());
  }
  ordered_json j;
  j["format"] = "memsim-array";
  j["oxide"] = to_string(array.oxide);
  j["circuit"] = {{"r_feedback", array.params.r_feedback},
                  {"u_theta", array.params.u_theta},
                  {"gain", array.params.gain}};
  ordered_json devices = ordered_json::array();
  for (std::size_t k = 0; k < array.pairs.size(); ++k) {
    for (const char* role : {"upper", "lower"}) {
      const DeviceState& dev = role == std::string("upper")
                                   ? array.pairs[k].upper
                                   : array.pairs[k].lower;
      std::string csv = device_csv_name(devices.size());
      dev.curve().save_csv(dir / csv);
      devices.push_back({{"pair", k},
                         {"role", role},
                         {"profile", ordered_json::parse(dev.profile().to_json())},
                         {"curve_csv", csv},
                         {"resistance_ohm", dev.resistance()}});
    }
  }
  j["devices"] = std::move(devices);
  io::atomic_write(dir / "array.json", j.dump(2) + "\n");
}

DeviceArray load_array(const std::filesystem::path& dir) {
  ordered_json j =
      ordered_json::parse(io::read_file(dir / "array.json"), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw IoError((dir / "array.json").string() + ": invalid JSON");
  }
  try {
    if (j.at("format").get<std::string>() != "memsim-array") {
      throw IoError("array: unrecognized format tag");
    }
    DeviceArray array;
    array.oxide = oxide_kind_from_string(j.at("oxide").get<std::string>());
    array.params.r_feedback = j.at("circuit").at("r_feedback").get<double>();
    array.params.u_theta = j.at("circuit").at("u_theta").get<double>();
    array.params.gain = j.at("circuit").at("gain").get<double>();
    array.params.validate();
    const ordered_json& devices = j.at("devices");
    if (devices.size() % 2 != 0) {
      throw IoError("array: odd device count");
    }
    std::vector<DeviceState> loaded;
    loaded.reserve(devices.size());
    for (const ordered_json& d : devices) {
      OxideProfile profile = OxideProfile::from_json(d.at("profile").dump());
      CalibrationCurve curve = CalibrationCurve::load_csv(
          dir / d.at("curve_csv").get<std::string>());
      DeviceState dev(std::move(profile), std::move(curve));
      dev.set_resistance(d.at("resistance_ohm").get<double>());
      loaded.push_back(std::move(dev));
    }
    for (std::size_t k = 0; 2 * k + 1 < loaded.size(); ++k) {
      array.pairs.emplace_back(loaded[2 * k], loaded[2 * k + 1]);
    }
    return array;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("array: ") + e.what());
  }
}

PairTarget weight_to_resistances(double w, const ComplementaryPair& pair,
                                 double r_feedback, double gain) {
  const OxideProfile& up = pair.upper.profile();
  const OxideProfile& low = pair.lower.profile();
  double g = gain * r_feedback;
  if (!(g > 0.0)) {
    throw InvalidArgument("weight split: gain * r_feedback must be positive");
  }
  double anchor = std::min(up.r_hrs, low.r_hrs);
  PairTarget t;
  if (w >= 0.0) {
    double bound = g * (1.0 / up.r_lrs - 1.0 / anchor);
    if (w > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "weight split: " << w << " exceeds the pair bound " << bound;
      throw WeightOutOfRange(msg.str());
    }
    t.r_lower = anchor;
    t.r_upper = std::clamp(1.0 / (w / g + 1.0 / anchor), up.r_lrs, up.r_hrs);
  } else {
    double bound = g * (1.0 / low.r_lrs - 1.0 / anchor);
    if (-w > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "weight split: " << w << " exceeds the pair bound " << -bound;
      throw WeightOutOfRange(msg.str());
    }
    t.r_upper = anchor;
    t.r_lower =
        std::clamp(1.0 / (-w / g + 1.0 / anchor), low.r_lrs, low.r_hrs);
  }
  // Amplitude 0 marks a SET skip: the device's own RESET already leaves it
  // exactly at the target.
  auto amplitude = [](const DeviceState& dev, double target) {
    if (target == dev.profile().r_hrs) return 0.0;
    const CalibrationCurve& curve = dev.curve();
    return curve.invert(std::clamp(target, curve.r_lrs(), curve.r_hrs()));
  };
  t.set_upper_v = amplitude(pair.upper, t.r_upper);
  t.set_lower_v = amplitude(pair.lower, t.r_lower);
  return t;
}

void PulseAudit::save_csv(const std::filesystem::path& path) const {
  std::string out = "pair,device,polarity,amplitude_v,duration_s,result_ohm\n";
  for (const PulseRecord& r : records) {
    out += std::to_string(r.pair);
    out += ',';
    out += r.device;
    out += ',';
    out += to_string(r.polarity);
    out += ',';
    out += io::format_double(r.amplitude_v);
    out += ',';
    out += io::format_double(r.duration_s);
    out += ',';
    out += io::format_double(r.result_ohm);
    out += '\n';
  }
  io::atomic_write(path, out);
}

std::string ProgramPlan::to_json() const {
  ordered_json j;
  j["format"] = "memsim-program-plan";
  j["verify_iters"] = verify_iters;
  ordered_json pairs = ordered_json::array();
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const PairTarget& t = targets[k];
    pairs.push_back({{"pair", k},
                     {"r_upper", t.r_upper},
                     {"r_lower", t.r_lower},
                     {"set_upper_v", t.set_upper_v},
                     {"set_lower_v", t.set_lower_v}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump(2);
}

void ProgramPlan::save_json(const std::filesystem::path& path) const {
  io::atomic_write(path, to_json() + "\n");
}

namespace {

void program_device(DeviceState& dev, double target_ohm, double set_v,
                    const char* role, Rng& rng, int verify_iters,
                    PulseAudit* audit, int pair_index) {
  auto issue = [&](const PulseCommand& cmd) {
    dev = apply_pulse(dev, cmd, rng);
    if (audit) {
      audit->records.push_back({pair_index, role, cmd.polarity,
                                cmd.amplitude_v, cmd.duration_s,
                                dev.resistance()});
    }
  };
  auto attempt = [&] {
    issue(PulseCommand::reset(dev.profile().v_reset));
    if (set_v != 0.0) {
      issue(PulseCommand::set(set_v));
    }
  };
  attempt();
  if (set_v == 0.0) {
    return;  // RESET is deterministic; nothing to verify
  }
  double best = dev.resistance();
  double best_err = std::abs(best - target_ohm) / target_ohm;
  for (int t = 0; t < verify_iters && best_err > dev.profile().sigma_pulse;
       ++t) {
    attempt();
    double err = std::abs(dev.resistance() - target_ohm) / target_ohm;
    if (err < best_err) {
      best = dev.resistance();
      best_err = err;
    }
  }
  dev.set_resistance(best);
}

}  // namespace

void program_pair(ComplementaryPair& pair, const PairTarget& target, Rng& rng,
                  int verify_iters, PulseAudit* audit, int pair_index) {
  program_device(pair.upper, target.r_upper, target.set_upper_v, "upper", rng,
                 verify_iters, audit, pair_index);
  program_device(pair.lower, target.r_lower, target.set_lower_v, "lower", rng,
                 verify_iters, audit, pair_index);
}

TransferResult transfer(const Perceptron& net, DeviceArray& array, Rng& rng,
                        int verify_iters) {
  net.validate();
  if (net.device_backed()) {
    throw InvalidArgument("transfer: source net is already device-backed");
  }
  if (verify_iters < 0) {
    throw InvalidArgument("transfer: verify_iters must be non-negative");
  }
  int needed = net.topology.pairs_needed();
  if (needed > static_cast<int>(array.pairs.size())) {
    std::ostringstream msg;
    msg << "transfer: topology needs " << needed << " pairs, array has "
        << array.pairs.size();
    throw ConfigError(msg.str());
  }

  TransferResult result{net, {}, {}};
  result.plan.verify_iters = verify_iters;
  const CircuitParams& params = array.params;
  std::size_t next = 0;
  auto claim = [&](double w) -> ComplementaryPair {
    ComplementaryPair& pair = array.pairs[next];
    PairTarget t =
        weight_to_resistances(w, pair, params.r_feedback, params.gain);
    program_pair(pair, t, rng, verify_iters, &result.audit,
                 static_cast<int>(next));
    result.plan.targets.push_back(t);
    ++next;
    return pair;
  };
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    std::vector<NeuronCircuit> nodes;
    for (std::size_t j = 0; j < net.weights[l].size(); ++j) {
      std::vector<ComplementaryPair> input_pairs;
      input_pairs.reserve(net.weights[l][j].size());
      for (double w : net.weights[l][j]) {
        input_pairs.push_back(claim(w));
      }
      ComplementaryPair theta =
          claim(net.thresholds[l][j] / params.u_theta);
      nodes.emplace_back(std::move(input_pairs), std::move(theta), params);
    }
    result.net.backing.push_back(std::move(nodes));
  }
  sync_from_backing(result.net);
  result.net.validate();
  return result;
}

namespace {

// Clamps the desired weight to what the pair can take, reprograms, and
// leaves the realized (noisy) value in place.
void program_update(ComplementaryPair& pair, double desired, double clamp,
                    const CircuitParams& params, Rng& rng, PulseAudit* audit,
                    int pair_index) {
  double bound = std::min(
      clamp, pair_weight_bound(pair, params.r_feedback, params.gain));
  double target = std::clamp(desired, -bound, bound);
  PairTarget t =
      weight_to_resistances(target, pair, params.r_feedback, params.gain);
  program_pair(pair, t, rng, 0, audit, pair_index);
}

}  // namespace

TrainResult finetune_on_device(const Perceptron& net, const TrainSet& data,
                               const TrainConfig& config, Rng& rng,
                               PulseAudit* audit) {
  config.validate();
  if (!net.device_backed()) {
    throw InvalidArgument("finetune: needs a device-backed net");
  }
  TrainResult result{net, {}};

  auto apply_by_programming = [&](const Updates& upd) {
    int pair_index = 0;
    for (std::size_t l = 0; l < result.net.backing.size(); ++l) {
      for (std::size_t j = 0; j < result.net.backing[l].size(); ++j) {
        NeuronCircuit& node = result.net.backing[l][j];
        for (std::size_t i = 0; i < node.input_pairs.size(); ++i) {
          program_update(node.input_pairs[i],
                         result.net.weights[l][j][i] + upd.dw[l][j][i],
                         config.clamp, node.params(), rng, audit, pair_index);
          ++pair_index;
        }
        double desired_theta =
            (result.net.thresholds[l][j] + upd.dtheta[l][j]) / node.u_theta;
        program_update(node.theta_pair, desired_theta,
                       config.clamp / node.u_theta, node.params(), rng, audit,
                       pair_index);
        ++pair_index;
      }
    }
    sync_from_backing(result.net);
  };

  double e0 = loss(result.net, data);
  if (!std::isfinite(e0)) {
    throw NonFiniteLoss("finetune: initial loss is not finite");
  }
  result.history.entries.push_back({0, e0, 1.0});
  if (e0 == 0.0 || 1.0 < config.stop_error) {
    return result;
  }
  for (int m = 1; m <= config.max_steps; ++m) {
    if (config.batch == BatchMode::FullBatch) {
      apply_by_programming(batch_updates(result.net, data, config.epsilon));
    } else {
      std::vector<std::size_t> order(data.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(order[i - 1], order[j]);
      }
      for (std::size_t idx : order) {
        TrainSet one{data[idx]};
        apply_by_programming(batch_updates(result.net, one, config.epsilon));
      }
    }
    double em = loss(result.net, data);
    if (!std::isfinite(em)) {
      std::ostringstream msg;
      msg << "finetune: loss left the reals at step " << m;
      throw NonFiniteLoss(msg.str());
    }
    result.history.entries.push_back({m, em, em / e0});
    if (em / e0 < config.stop_error) {
      break;
    }
  }
  return result;
}

}  // namespace memsim

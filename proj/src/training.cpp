#include "memsim/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

std::string to_string(BatchMode mode) {
  return mode == BatchMode::FullBatch ? "full_batch" : "per_sample";
}

BatchMode batch_mode_from_string(std::string_view name) {
  if (name == "full_batch") return BatchMode::FullBatch;
  if (name == "per_sample") return BatchMode::PerSample;
  throw InvalidArgument(
      "batch mode: expected \"full_batch\" or \"per_sample\", got \"" +
      std::string(name) + "\"");
}

void TrainConfig::validate() const {
  // epsilon = 0 is the degenerate no-learning case and stays legal; the
  // instability condition only rules out epsilon >= 1.
  if (!(epsilon >= 0.0) || !(epsilon < 1.0)) {
    std::ostringstream msg;
    msg << "train config: epsilon must satisfy 0 <= epsilon < 1, got "
        << epsilon;
    throw ConfigError(msg.str());
  }
  if (max_steps < 0) {
    throw ConfigError("train config: max_steps must be non-negative");
  }
  if (!(clamp > 0.0)) {
    throw ConfigError("train config: clamp bound must be positive");
  }
  if (!(stop_error >= 0.0)) {
    throw ConfigError("train config: stop_error must be non-negative");
  }
}

TrainSet to_train_set(const Dataset& data) {
  TrainSet set;
  set.reserve(data.size());
  for (const Sample& s : data) {
    Sample scaled = scale_for_input(s);
    TrainSample t;
    t.x.assign(scaled.x.begin(), scaled.x.end());
    t.d.push_back(target_value(s.label));
    set.push_back(std::move(t));
  }
  return set;
}

void ErrorHistory::save_csv(const std::filesystem::path& path) const {
  std::string out = "step,error,normalized_error\n";
  for (const HistoryEntry& e : entries) {
    out += std::to_string(e.step);
    out += ',';
    out += io::format_double(e.error);
    out += ',';
    out += io::format_double(e.normalized_error);
    out += '\n';
  }
  io::atomic_write(path, out);
}

ErrorHistory ErrorHistory::load_csv(const std::filesystem::path& path) {
  io::CsvTable table = io::read_csv(path, "step,error,normalized_error");
  ErrorHistory history;
  history.entries.reserve(table.rows.size());
  for (const std::vector<std::string>& row : table.rows) {
    HistoryEntry e;
    e.step = static_cast<int>(io::parse_int(row[0]));
    e.error = io::parse_double(row[1]);
    e.normalized_error = io::parse_double(row[2]);
    history.entries.push_back(e);
  }
  return history;
}

double loss(const Perceptron& net, const TrainSet& data) {
  if (data.empty()) {
    throw InvalidArgument("loss: empty training set");
  }
  double e = 0.0;
  for (const TrainSample& s : data) {
    ForwardTrace trace = forward(net, s.x);
    const std::vector<double>& y = trace.outputs();
    if (s.d.size() != y.size()) {
      throw DimensionMismatch("loss: target size does not match outputs");
    }
    for (std::size_t j = 0; j < y.size(); ++j) {
      double r = y[j] - s.d[j];
      e += 0.5 * r * r;
    }
  }
  return e;
}

std::vector<std::vector<double>> deltas(const Perceptron& net,
                                        const ForwardTrace& trace,
                                        std::span<const double> target) {
  std::size_t layers = net.weights.size();
  if (trace.pre.size() != layers) {
    throw InvalidArgument("deltas: trace does not match network depth");
  }
  if (target.size() != trace.post.back().size()) {
    throw DimensionMismatch("deltas: target size does not match outputs");
  }
  std::vector<std::vector<double>> d(layers);
  for (std::size_t l = layers; l-- > 0;) {
    std::size_t n = trace.pre[l].size();
    d[l].assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double upstream;
      if (l == layers - 1) {
        upstream = target[j] - trace.post[l][j];
      } else {
        upstream = 0.0;
        for (std::size_t k = 0; k < d[l + 1].size(); ++k) {
          upstream += d[l + 1][k] * net.weights[l + 1][k][j];
        }
      }
      d[l][j] = net.activation.slope(trace.pre[l][j]) * upstream;
    }
  }
  return d;
}

namespace {

Updates zero_updates(const Perceptron& net) {
  Updates u;
  u.dw.reserve(net.weights.size());
  u.dtheta.reserve(net.thresholds.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    u.dw.emplace_back(net.weights[l].size(),
                      std::vector<double>(net.weights[l].front().size(), 0.0));
    u.dtheta.emplace_back(net.thresholds[l].size(), 0.0);
  }
  return u;
}

void accumulate_sample(const Perceptron& net, const TrainSample& sample,
                       double epsilon, Updates& upd) {
  ForwardTrace trace = forward(net, sample.x);
  std::vector<std::vector<double>> d = deltas(net, trace, sample.d);
  for (std::size_t l = 0; l < d.size(); ++l) {
    const std::vector<double>& inputs =
        l == 0 ? trace.input : trace.post[l - 1];
    for (std::size_t j = 0; j < d[l].size(); ++j) {
      double scaled = epsilon * d[l][j];
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        upd.dw[l][j][i] += scaled * inputs[i];
      }
      upd.dtheta[l][j] += scaled;
    }
  }
}

void apply_clamped(Perceptron& net, const Updates& upd, double bound) {
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    for (std::size_t j = 0; j < net.weights[l].size(); ++j) {
      for (std::size_t i = 0; i < net.weights[l][j].size(); ++i) {
        net.weights[l][j][i] =
            std::clamp(net.weights[l][j][i] + upd.dw[l][j][i], -bound, bound);
      }
      net.thresholds[l][j] =
          std::clamp(net.thresholds[l][j] + upd.dtheta[l][j], -bound, bound);
    }
  }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

Updates batch_updates(const Perceptron& net, const TrainSet& data,
                      double epsilon) {
  if (data.empty()) {
    throw InvalidArgument("batch_updates: empty training set");
  }
  Updates upd = zero_updates(net);
  for (const TrainSample& s : data) {
    accumulate_sample(net, s, epsilon, upd);
  }
  return upd;
}

StepResult step(const Perceptron& net, const TrainSet& data,
                const TrainConfig& config, Rng& rng) {
  config.validate();
  if (net.device_backed()) {
    throw InvalidArgument(
        "step: device-backed nets are adjusted by reprogramming, not by "
        "direct weight writes");
  }
  StepResult result{net, loss(net, data)};
  if (config.batch == BatchMode::FullBatch) {
    Updates upd = batch_updates(result.net, data, config.epsilon);
    apply_clamped(result.net, upd, config.clamp);
    return result;
  }
  for (std::size_t idx : shuffled_indices(data.size(), rng)) {
    Updates upd = zero_updates(result.net);
    accumulate_sample(result.net, data[idx], config.epsilon, upd);
    apply_clamped(result.net, upd, config.clamp);
  }
  return result;
}

TrainResult train(const Perceptron& net, const TrainSet& data,
                  const TrainConfig& config) {
  config.validate();
  TrainResult result{net, {}};
  double e0 = loss(net, data);
  if (!std::isfinite(e0)) {
    throw NonFiniteLoss("train: initial loss is not finite");
  }
  result.history.entries.push_back({0, e0, 1.0});
  if (e0 == 0.0 || 1.0 < config.stop_error) {
    return result;
  }
  Rng rng(config.seed);
  for (int m = 1; m <= config.max_steps; ++m) {
    result.net = step(result.net, data, config, rng).net;
    double em = loss(result.net, data);
    if (!std::isfinite(em)) {
      std::ostringstream msg;
      msg << "train: loss left the reals at step " << m
          << " (step size too large?)";
      throw NonFiniteLoss(msg.str());
    }
    result.history.entries.push_back({m, em, em / e0});
    if (em / e0 < config.stop_error) {
      break;
    }
  }
  return result;
}

std::size_t parameter_count(const Topology& topology) {
  std::vector<int> sizes = topology.layer_sizes();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    count += static_cast<std::size_t>(sizes[l + 1]) *
             (static_cast<std::size_t>(sizes[l]) + 1);
  }
  return count;
}

std::vector<double> analytic_gradient(const Perceptron& net,
                                      const TrainSet& data) {
  Updates upd = batch_updates(net, data, 1.0);
  std::vector<double> grad;
  grad.reserve(parameter_count(net.topology));
  for (std::size_t l = 0; l < upd.dw.size(); ++l) {
    for (std::size_t j = 0; j < upd.dw[l].size(); ++j) {
      for (double dw : upd.dw[l][j]) {
        grad.push_back(-dw);
      }
      grad.push_back(-upd.dtheta[l][j]);
    }
  }
  return grad;
}

std::vector<double> numeric_gradient(const Perceptron& net,
                                     const TrainSet& data, double h) {
  if (!(h > 0.0)) {
    throw InvalidArgument("numeric_gradient: h must be positive");
  }
  Perceptron probe = net;
  std::vector<double> grad;
  grad.reserve(parameter_count(net.topology));
  auto central = [&](double& p) {
    double saved = p;
    p = saved + h;
    double plus = loss(probe, data);
    p = saved - h;
    double minus = loss(probe, data);
    p = saved;
    grad.push_back((plus - minus) / (2.0 * h));
  };
  for (std::size_t l = 0; l < probe.weights.size(); ++l) {
    for (std::size_t j = 0; j < probe.weights[l].size(); ++j) {
      for (std::size_t i = 0; i < probe.weights[l][j].size(); ++i) {
        central(probe.weights[l][j][i]);
      }
      central(probe.thresholds[l][j]);
    }
  }
  return grad;
}

}  // namespace memsim

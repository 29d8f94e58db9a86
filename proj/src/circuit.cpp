#include "memsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

ComplementaryPair::ComplementaryPair(DeviceState upper_device,
                                     DeviceState lower_device)
    : upper(std::move(upper_device)), lower(std::move(lower_device)) {
  if (upper.profile().kind != lower.profile().kind) {
    throw InvalidArgument("pair: devices must share the same oxide kind");
  }
}

void CircuitParams::validate() const {
  if (!(r_feedback > 0.0)) {
    throw InvalidArgument("circuit: r_feedback must be positive");
  }
  if (!(u_theta > 0.0)) {
    throw InvalidArgument("circuit: u_theta must be positive");
  }
  if (!(gain > 0.0)) {
    throw InvalidArgument("circuit: gain must be positive");
  }
}

double pair_weight(double r_upper, double r_lower, double r_feedback,
                   double gain) {
  return gain * r_feedback * (1.0 / r_upper - 1.0 / r_lower);
}

double pair_weight(const ComplementaryPair& pair, double r_feedback,
                   double gain) {
  return pair_weight(pair.upper.resistance(), pair.lower.resistance(),
                     r_feedback, gain);
}

double weight_bound(const OxideProfile& profile, double r_feedback,
                    double gain) {
  return gain * r_feedback * (1.0 / profile.r_lrs - 1.0 / profile.r_hrs);
}

double normalizing_gain(const OxideProfile& profile, double r_feedback) {
  return 1.0 / weight_bound(profile, r_feedback, 1.0);
}

double pair_weight_bound(const ComplementaryPair& pair, double r_feedback,
                         double gain) {
  double shared_hrs =
      std::min(pair.upper.profile().r_hrs, pair.lower.profile().r_hrs);
  double worst_lrs =
      std::max(pair.upper.profile().r_lrs, pair.lower.profile().r_lrs);
  return gain * r_feedback * (1.0 / worst_lrs - 1.0 / shared_hrs);
}

ActivationTable::ActivationTable(double s_min, double s_max,
                                 std::vector<double> values,
                                 std::vector<double> slopes)
    : s_min_(s_min),
      s_max_(s_max),
      values_(std::move(values)),
      slopes_(std::move(slopes)) {
  if (slopes_.size() != values_.size()) {
    throw InvalidArgument("activation: need matching value/slope samples");
  }
  if (values_.size() < static_cast<std::size_t>(kMinActivationSamples)) {
    throw InvalidArgument("activation: need at least 1025 samples");
  }
  if (!(s_min_ < s_max_)) {
    throw InvalidArgument("activation: need s_min < s_max");
  }
  step_ = (s_max_ - s_min_) / static_cast<double>(values_.size() - 1);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::abs(values_[i]) > 1.0 + 1e-12) {
      throw InvalidArgument("activation: |F| must not exceed 1");
    }
    if (slopes_[i] < -1e-12) {
      throw InvalidArgument("activation: derivative must be non-negative");
    }
    if (i > 0 && values_[i] < values_[i - 1] - 1e-12) {
      throw InvalidArgument("activation: F must be monotone non-decreasing");
    }
  }
  // Odd symmetry around zero: F(0) = 0 and F(-s) = -F(s).
  if (std::abs(s_min_ + s_max_) > 1e-12 || values_.size() % 2 == 0) {
    throw InvalidArgument(
        "activation: domain must be symmetric with an odd sample count");
  }
  std::size_t n = values_.size();
  for (std::size_t i = 0; i < n / 2 + 1; ++i) {
    if (std::abs(values_[i] + values_[n - 1 - i]) > 1e-9) {
      throw InvalidArgument("activation: F must be odd-symmetric");
    }
  }
  // The derivative table must describe the value table: interior slopes
  // within 1e-3 of the centered finite difference of the value samples.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double fd = (values_[i + 1] - values_[i - 1]) / (2.0 * step_);
    if (std::abs(slopes_[i] - fd) > 1e-3) {
      throw InvalidArgument(
          "activation: derivative samples inconsistent with value samples");
    }
  }
}

ActivationTable ActivationTable::tabulate(
    const std::function<double(double)>& fn,
    const std::function<double(double)>& slope_fn, double s_min, double s_max,
    int n_samples) {
  if (n_samples < kMinActivationSamples) {
    throw InvalidArgument("activation: need at least 1025 samples");
  }
  double step = (s_max - s_min) / static_cast<double>(n_samples - 1);
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    values[static_cast<std::size_t>(i)] = fn(s_min + step * i);
  }
  // Mirror around the midpoint when the domain is symmetric, so odd
  // generators produce bit-exact odd tables.
  if (n_samples % 2 == 1 && s_min == -s_max) {
    int mid = n_samples / 2;
    for (int i = 0; i < mid; ++i) {
      values[static_cast<std::size_t>(i)] =
          -values[static_cast<std::size_t>(n_samples - 1 - i)];
    }
  }
  std::vector<double> slopes(static_cast<std::size_t>(n_samples));
  if (slope_fn) {
    for (int i = 0; i < n_samples; ++i) {
      slopes[static_cast<std::size_t>(i)] = slope_fn(s_min + step * i);
    }
  } else {
    for (int i = 0; i < n_samples; ++i) {
      std::size_t k = static_cast<std::size_t>(i);
      if (i == 0) {
        slopes[k] = (values[k + 1] - values[k]) / step;
      } else if (i == n_samples - 1) {
        slopes[k] = (values[k] - values[k - 1]) / step;
      } else {
        slopes[k] = (values[k + 1] - values[k - 1]) / (2.0 * step);
      }
    }
  }
  return ActivationTable(s_min, s_max, std::move(values), std::move(slopes));
}

ActivationTable ActivationTable::tanh_table(double s_min, double s_max,
                                            int n_samples) {
  return tabulate([](double s) { return std::tanh(s); },
                  [](double s) {
                    double t = std::tanh(s);
                    return 1.0 - t * t;
                  },
                  s_min, s_max, n_samples);
}

ActivationTable ActivationTable::hard_clip_table(double s_min, double s_max,
                                                 int n_samples) {
  return tabulate([](double s) { return std::clamp(s, -1.0, 1.0); }, nullptr,
                  s_min, s_max, n_samples);
}

ActivationTable ActivationTable::from_samples(double s_min, double s_max,
                                              std::vector<double> values,
                                              std::vector<double> slopes) {
  return ActivationTable(s_min, s_max, std::move(values), std::move(slopes));
}

namespace {

double interpolate(double s, double s_min, double step,
                   const std::vector<double>& samples) {
  double pos = (s - s_min) / step;
  if (pos <= 0.0) {
    return samples.front();
  }
  auto last = static_cast<double>(samples.size() - 1);
  if (pos >= last) {
    return samples.back();
  }
  auto idx = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(idx);
  return samples[idx] + frac * (samples[idx + 1] - samples[idx]);
}

}  // namespace

double ActivationTable::value(double s) const {
  return interpolate(s, s_min_, step_, values_);
}

double ActivationTable::slope(double s) const {
  return std::max(0.0, interpolate(s, s_min_, step_, slopes_));
}

void ActivationTable::save_csv(const std::filesystem::path& path) const {
  std::string out = "s,f,df\n";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double s = s_min_ + step_ * static_cast<double>(i);
    out += io::format_double(s);
    out += ',';
    out += io::format_double(values_[i]);
    out += ',';
    out += io::format_double(slopes_[i]);
    out += '\n';
  }
  io::atomic_write(path, out);
}

ActivationTable ActivationTable::load_csv(const std::filesystem::path& path) {
  io::CsvTable table = io::read_csv(path, "s,f,df");
  if (table.rows.size() < 2) {
    throw IoError(path.string() + ": need at least 2 samples");
  }
  std::vector<double> values;
  std::vector<double> slopes;
  values.reserve(table.rows.size());
  slopes.reserve(table.rows.size());
  double s_min = 0.0;
  double s_max = 0.0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != 3) {
      throw IoError(path.string() + ": expected 3 columns per row");
    }
    double s = io::parse_double(row[0]);
    if (i == 0) s_min = s;
    if (i + 1 == table.rows.size()) s_max = s;
    values.push_back(io::parse_double(row[1]));
    slopes.push_back(io::parse_double(row[2]));
  }
  return ActivationTable(s_min, s_max, std::move(values), std::move(slopes));
}

double activate(const ActivationTable& table, double s) {
  return table.value(s);
}

double activate_deriv(const ActivationTable& table, double s) {
  return table.slope(s);
}

Activation::Activation(Kind kind, std::optional<ActivationTable> table)
    : kind_(kind), table_(std::move(table)) {}

Activation Activation::table(ActivationTable table, Kind kind) {
  if (kind == Kind::SmoothTanh) {
    throw InvalidArgument("activation: SmoothTanh carries no table");
  }
  return Activation(kind, std::move(table));
}

Activation Activation::tanh_table(double s_min, double s_max, int n_samples) {
  return Activation(Kind::TanhTable,
                    ActivationTable::tanh_table(s_min, s_max, n_samples));
}

Activation Activation::hard_clip_table(double s_min, double s_max,
                                       int n_samples) {
  return Activation(Kind::HardClipTable,
                    ActivationTable::hard_clip_table(s_min, s_max, n_samples));
}

Activation Activation::smooth_tanh() {
  return Activation(Kind::SmoothTanh, std::nullopt);
}

const ActivationTable& Activation::table_ref() const {
  if (!table_) {
    throw InvalidArgument("activation: no table behind a smooth activation");
  }
  return *table_;
}

double Activation::value(double s) const {
  if (kind_ == Kind::SmoothTanh) {
    return std::tanh(s);
  }
  return table_->value(s);
}

double Activation::slope(double s) const {
  if (kind_ == Kind::SmoothTanh) {
    double t = std::tanh(s);
    return 1.0 - t * t;
  }
  return table_->slope(s);
}

NeuronCircuit::NeuronCircuit(std::vector<ComplementaryPair> inputs,
                             ComplementaryPair theta,
                             const CircuitParams& params)
    : input_pairs(std::move(inputs)),
      theta_pair(std::move(theta)),
      r_feedback(params.r_feedback),
      u_theta(params.u_theta),
      gain(params.gain) {
  params.validate();
}

double summing_output(const NeuronCircuit& neuron,
                      std::span<const double> inputs) {
  if (inputs.size() != neuron.input_pairs.size()) {
    std::ostringstream msg;
    msg << "summing_output: " << inputs.size() << " inputs for "
        << neuron.input_pairs.size() << " pairs";
    throw DimensionMismatch(msg.str());
  }
  for (double u : inputs) {
    // 1e-9 slack: interpolated activation tables may overshoot 1 by a few
    // ulps, which is not a safety violation.
    if (std::abs(u) > 1.0 + 1e-9) {
      std::ostringstream msg;
      msg << "summing_output: input " << u
          << " V outside the +-1 V safe operating range";
      throw UnsafeInputVoltage(msg.str());
    }
  }
  const double r_star = neuron.r_feedback;
  double sum = neuron.u_theta *
               (1.0 / neuron.theta_pair.upper.resistance() -
                1.0 / neuron.theta_pair.lower.resistance()) *
               r_star;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ComplementaryPair& pair = neuron.input_pairs[i];
    sum += inputs[i] *
           (1.0 / pair.upper.resistance() - 1.0 / pair.lower.resistance()) *
           r_star;
  }
  return sum * neuron.gain;
}

}  // namespace memsim

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "memsim/device.hpp"

namespace memsim {

// Two memristive devices sharing a mid-point. The direct input drives the
// upper device, the inverted input the lower one; the conductance
// difference encodes one bipolar weight.
struct ComplementaryPair {
  DeviceState upper;
  DeviceState lower;

  ComplementaryPair(DeviceState upper_device, DeviceState lower_device);
};

// Summing-amplifier constants shared by every node of a board.
struct CircuitParams {
  double r_feedback = 300.0;  // feedback resistor, ohm
  double u_theta = 1.0;       // adjusting-input voltage, V
  double gain = 1.0;          // post-summing amplification

  void validate() const;
};

// Bipolar weight encoded by a pair: gain * r_feedback * (1/R_up - 1/R_low).
double pair_weight(double r_upper, double r_lower, double r_feedback,
                   double gain);
double pair_weight(const ComplementaryPair& pair, double r_feedback,
                   double gain);

// Largest |weight| a pair of this profile can encode:
// gain * r_feedback * (1/r_lrs - 1/r_hrs).
double weight_bound(const OxideProfile& profile, double r_feedback,
                    double gain);

// Gain that normalizes the extreme achievable weight to exactly +-1 for the
// given oxide, making step-size selection oxide-independent.
double normalizing_gain(const OxideProfile& profile, double r_feedback);

// Symmetric |weight| bound realizable by this concrete pair when the parked
// device sits at the smaller of the two HRS values. With device-to-device
// variation this is slightly below the nominal weight_bound.
double pair_weight_bound(const ComplementaryPair& pair, double r_feedback,
                         double gain);

// Coarser tables would break the finite-difference consistency contract
// between the value and derivative samples.
inline constexpr int kMinActivationSamples = 1025;

// Tabulated neuron nonlinearity with matching derivative samples. Values
// linearly interpolate between equally spaced samples and clamp outside the
// domain (a real limiter saturates).
class ActivationTable {
public:
  // Builds a table from a generating function on a symmetric domain. When
  // `slope_fn` is null the derivative samples come from centered finite
  // differences of the value samples (one-sided at the ends).
  static ActivationTable tabulate(const std::function<double(double)>& fn,
                                  const std::function<double(double)>& slope_fn,
                                  double s_min, double s_max, int n_samples);

  static ActivationTable tanh_table(double s_min = -4.0, double s_max = 4.0,
                                    int n_samples = 1025);

  // Literal limiting-amplifier transfer curve: clamp(s, -1, 1). The flat
  // saturation has zero derivative, which stalls training; kept as an
  // alternative, not the default.
  static ActivationTable hard_clip_table(double s_min = -4.0,
                                         double s_max = 4.0,
                                         int n_samples = 1025);

  static ActivationTable from_samples(double s_min, double s_max,
                                      std::vector<double> values,
                                      std::vector<double> slopes);

  [[nodiscard]] double s_min() const { return s_min_; }
  [[nodiscard]] double s_max() const { return s_max_; }
  [[nodiscard]] std::size_t n_samples() const { return values_.size(); }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] const std::vector<double>& slopes() const { return slopes_; }

  [[nodiscard]] double value(double s) const;
  [[nodiscard]] double slope(double s) const;

  void save_csv(const std::filesystem::path& path) const;
  static ActivationTable load_csv(const std::filesystem::path& path);

private:
  ActivationTable(double s_min, double s_max, std::vector<double> values,
                  std::vector<double> slopes);

  double s_min_;
  double s_max_;
  double step_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

double activate(const ActivationTable& table, double s);
double activate_deriv(const ActivationTable& table, double s);

// Neuron nonlinearity as used by the network: the tabulated default, or an
// analytic tanh used by gradient verification (finite differences across a
// piecewise-linear table are meaningless at 1e-6 scale).
class Activation {
public:
  enum class Kind { TanhTable, HardClipTable, CustomTable, SmoothTanh };

  static Activation table(ActivationTable table, Kind kind = Kind::CustomTable);
  static Activation tanh_table(double s_min = -4.0, double s_max = 4.0,
                               int n_samples = 1025);
  static Activation hard_clip_table(double s_min = -4.0, double s_max = 4.0,
                                    int n_samples = 1025);
  static Activation smooth_tanh();

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] bool is_table() const { return kind_ != Kind::SmoothTanh; }
  [[nodiscard]] const ActivationTable& table_ref() const;

  [[nodiscard]] double value(double s) const;
  [[nodiscard]] double slope(double s) const;

private:
  Activation(Kind kind, std::optional<ActivationTable> table);

  Kind kind_;
  std::optional<ActivationTable> table_;  // empty for SmoothTanh
};

// One ANN node in the voltage domain: complementary input pairs, the
// threshold pair on the adjusting input, and the summing-amplifier stage.
struct NeuronCircuit {
  std::vector<ComplementaryPair> input_pairs;
  ComplementaryPair theta_pair;
  double r_feedback = 300.0;
  double u_theta = 1.0;
  double gain = 1.0;

  NeuronCircuit(std::vector<ComplementaryPair> inputs, ComplementaryPair theta,
                const CircuitParams& params);

  [[nodiscard]] CircuitParams params() const {
    return {r_feedback, u_theta, gain};
  }
};

// Summing-amplifier output voltage:
//   U = gain * [ U_theta (1/R1 - 1/R2) R* + sum_i U_i (1/R1i - 1/R2i) R* ]
// The board's two inverting stages cancel, so this is the non-inverted
// composite. Throws UnsafeInputVoltage when any |input| exceeds 1 V and
// DimensionMismatch when the input count differs from the pair count.
double summing_output(const NeuronCircuit& neuron,
                      std::span<const double> inputs);

}  // namespace memsim

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memsim/network.hpp"
#include "memsim/training.hpp"

namespace memsim {

// Bank of complementary pairs the perceptron is mapped onto, all sharing
// one summing-amplifier parameter set. Pair k owns devices 2k (upper) and
// 2k+1 (lower).
struct DeviceArray {
  OxideKind oxide = OxideKind::ZrO2Y;
  CircuitParams params;
  std::vector<ComplementaryPair> pairs;

  // Tightest symmetric weight bound over all pairs; the training clamp a
  // net must respect to remain transferable onto this array.
  [[nodiscard]] double min_weight_bound() const;
};

// 2 * n_pairs devices, each with an individually perturbed profile
// (device-to-device variation `device_sigma`, relative) and a synthesized
// response table, all starting at HRS. The amplifier gain is chosen so the
// nominal profile's extreme weight is exactly 1.
DeviceArray synth_array(const OxideProfile& nominal, int n_pairs,
                        double device_sigma, Rng& rng, int curve_points = 33);

// Writes `array.json` plus one response-table CSV per device into `dir`.
void save_array(const DeviceArray& array, const std::filesystem::path& dir);
DeviceArray load_array(const std::filesystem::path& dir);

// Resistance goals for one pair and the SET amplitudes that reach them.
// An amplitude of 0 marks a skipped SET (the device only needs its RESET).
struct PairTarget {
  double r_upper = 0.0;
  double r_lower = 0.0;
  double set_upper_v = 0.0;
  double set_lower_v = 0.0;
};

// Splits a weight across a pair. The parked device sits at the shared
// anchor min(r_hrs_upper, r_hrs_lower); the driven device's resistance
// solves pair_weight(..) = w exactly. With identical profiles this reduces
// to: w >= 0 parks the lower device at r_hrs and w = +bound drives the
// upper one to r_lrs. Throws WeightOutOfRange beyond the pair's bound.
PairTarget weight_to_resistances(double w, const ComplementaryPair& pair,
                                 double r_feedback, double gain);

// One issued pulse, as logged by the audit trail.
struct PulseRecord {
  int pair = 0;
  std::string device;  // "upper" or "lower"
  PulsePolarity polarity = PulsePolarity::ResetPositive;
  double amplitude_v = 0.0;
  double duration_s = 0.0;
  double result_ohm = 0.0;
};

struct PulseAudit {
  std::vector<PulseRecord> records;

  void save_csv(const std::filesystem::path& path) const;
};

// Per-pair programming goals for a whole network, in canonical pair order:
// layer by layer, neuron by neuron, fan-in pairs then the threshold pair.
struct ProgramPlan {
  std::vector<PairTarget> targets;
  int verify_iters = 0;

  [[nodiscard]] std::string to_json() const;
  void save_json(const std::filesystem::path& path) const;
};

// Programs both devices: RESET to HRS, then SET at the amplitude the
// device's own table maps to the target; the SET is skipped when the
// target is the device's r_hrs (the RESET alone is exact). verify_iters > 0
// enables write-verify: while the relative error exceeds the device's
// sigma_pulse, retry the reset+set cycle up to verify_iters times and keep
// the best attempt. Issued pulses are appended to `audit` when non-null.
void program_pair(ComplementaryPair& pair, const PairTarget& target, Rng& rng,
                  int verify_iters, PulseAudit* audit = nullptr,
                  int pair_index = 0);

struct TransferResult {
  Perceptron net;  // device-backed; weights are the realized pair weights
  ProgramPlan plan;
  PulseAudit audit;
};

// Maps a software net onto the array: plans every pair, programs it, and
// returns the device-backed net whose weights reflect programming noise.
// The array's devices are claimed (and mutated) in canonical order; the
// returned net owns snapshots of them.
TransferResult transfer(const Perceptron& net, DeviceArray& array, Rng& rng,
                        int verify_iters = 0);

// Chip-in-the-loop training: gradients come from the realized weights, and
// every update is applied by reprogramming the pair (reset + set, noisy)
// rather than by writing numbers. Weight targets are clamped to the
// tighter of config.clamp and each pair's own bound.
TrainResult finetune_on_device(const Perceptron& net, const TrainSet& data,
                               const TrainConfig& config, Rng& rng,
                               PulseAudit* audit = nullptr);

}  // namespace memsim

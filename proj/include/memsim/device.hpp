#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "memsim/rng.hpp"

namespace memsim {

enum class OxideKind { ZrO2Y, SiO2 };

std::string to_string(OxideKind kind);
OxideKind oxide_kind_from_string(std::string_view name);

// Static switching parameters of one oxide stack. Voltages are magnitudes;
// SET pulses are negative on the top electrode, RESET pulses positive.
struct OxideProfile {
  OxideKind kind = OxideKind::ZrO2Y;
  double r_hrs = 1e6;               // high-resistance state, ohm
  double r_lrs = 1e3;               // low-resistance state, ohm
  double v_mid = 3.5;               // center of the switching transition, V
  double v_width = 0.3;             // transition width, V
  double v_switch_threshold = 2.0;  // smallest |amplitude| that alters state
  double v_reset = 7.0;             // positive amplitude that restores HRS
  double v_read = 0.5;              // read pulse amplitude
  double sigma_pulse = 0.15;        // relative std of programmed resistance

  // Throws InvalidArgument on violated invariants (r_lrs < r_hrs, reads
  // below the switching threshold, threshold below the transition).
  void validate() const;

  static OxideProfile zro2_y();
  static OxideProfile sio2();
  static OxideProfile defaults(OxideKind kind);

  // Device-to-device variation: jitters v_mid and the resistance endpoints
  // by a relative sigma (truncated at 3 std). The result is re-validated.
  OxideProfile perturbed(Rng& rng, double rel_sigma) const;

  std::string to_json() const;
  static OxideProfile from_json(std::string_view text);
};

struct CalibrationPoint {
  double amplitude_v;     // SET amplitude magnitude
  double resistance_ohm;  // programmed resistance at that amplitude
};

// Per-device monotone table of programmed resistance vs SET amplitude.
// Amplitudes strictly increase, resistances strictly decrease. Lookups and
// inversion interpolate linearly in (V, log10 R) space.
class CalibrationCurve {
public:
  explicit CalibrationCurve(std::vector<CalibrationPoint> points);

  [[nodiscard]] const std::vector<CalibrationPoint>& points() const {
    return points_;
  }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] double r_hrs() const { return points_.front().resistance_ohm; }
  [[nodiscard]] double r_lrs() const { return points_.back().resistance_ohm; }
  [[nodiscard]] double v_min() const { return points_.front().amplitude_v; }
  [[nodiscard]] double v_max() const { return points_.back().amplitude_v; }

  // Largest amplitude gap between neighbouring table entries.
  [[nodiscard]] double max_step() const;

  // Programmed resistance for a SET pulse of this amplitude. Amplitudes
  // beyond the table clamp to the end entries (the device saturates).
  [[nodiscard]] double lookup(double amplitude_v) const;

  // Amplitude that programs `target_ohm`; inverse of lookup(). Throws
  // TargetOutOfRange outside [r_lrs, r_hrs].
  [[nodiscard]] double invert(double target_ohm) const;

  void save_csv(const std::filesystem::path& path) const;
  static CalibrationCurve load_csv(const std::filesystem::path& path);

private:
  std::vector<CalibrationPoint> points_;
};

// Synthetic stand-in for a measured response curve: log-sigmoid in log10
// resistance, sampled uniformly on [v_switch_threshold, v_reset] with the
// end entries pinned to r_hrs / r_lrs exactly.
CalibrationCurve synth_calibration(const OxideProfile& profile, int n_points);

enum class PulsePolarity { SetNegative, ResetPositive };

std::string to_string(PulsePolarity polarity);

struct PulseCommand {
  PulsePolarity polarity = PulsePolarity::SetNegative;
  double amplitude_v = 0.0;  // magnitude
  double duration_s = 5e-3;  // recorded but does not change the outcome

  void validate() const;

  static PulseCommand set(double amplitude_v, double duration_s = 5e-3);
  static PulseCommand reset(double amplitude_v = 7.0, double duration_s = 5e-3);
};

// One memristive device: its profile, its individually measured (or
// synthesized) response table, and the current resistance.
class DeviceState {
public:
  // The curve must match the profile: endpoints pinned to r_hrs/r_lrs,
  // >= 16 entries spanning [v_switch_threshold, v_reset]. Starts at HRS.
  DeviceState(OxideProfile profile, CalibrationCurve curve);

  [[nodiscard]] const OxideProfile& profile() const { return profile_; }
  [[nodiscard]] const CalibrationCurve& curve() const { return curve_; }
  [[nodiscard]] double resistance() const { return resistance_; }

  // Direct state override (file loading, tests). Clamped-range checked.
  void set_resistance(double ohm);

private:
  OxideProfile profile_;
  CalibrationCurve curve_;
  double resistance_;
};

// Convenience: default-profile device with a synthesized curve.
DeviceState make_device(const OxideProfile& profile, int curve_points = 33);

// Applies one pulse and returns the new state.
//   RESET_POSITIVE at or above v_switch_threshold restores r_hrs exactly.
//   SET_NEGATIVE below v_switch_threshold leaves the state unchanged.
//   SET_NEGATIVE at or above it programs curve(amplitude) * (1 + sigma * z),
//   z standard normal truncated to [-3, 3], clamped into [r_lrs, r_hrs].
// The model assumes SET-from-HRS (programming always resets first), so the
// prior state does not enter. Over-reset amplitudes clamp to the last table
// entry; duration is metadata only.
DeviceState apply_pulse(const DeviceState& state, const PulseCommand& pulse,
                        Rng& rng);

// Ohmic readout at v_read; non-destructive.
double read_current(const DeviceState& state);

// Free-function form of CalibrationCurve::invert.
double invert_calibration(const CalibrationCurve& curve, double target_ohm);

}  // namespace memsim

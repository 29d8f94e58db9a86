#include "memsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr int kMinCurvePoints = 16;

}  // namespace

std::string to_string(OxideKind kind) {
  switch (kind) {
    case OxideKind::ZrO2Y:
      return "zro2_y";
    case OxideKind::SiO2:
      return "sio2";
  }
  throw InvalidArgument("unknown oxide kind");
}

OxideKind oxide_kind_from_string(std::string_view name) {
  if (name == "zro2_y") return OxideKind::ZrO2Y;
  if (name == "sio2") return OxideKind::SiO2;
  throw InvalidArgument("unknown oxide kind '" + std::string(name) +
                        "' (expected zro2_y or sio2)");
}

void OxideProfile::validate() const {
  if (!(r_lrs > 0.0) || !(r_hrs > 0.0) || !(r_lrs < r_hrs)) {
    throw InvalidArgument("profile: need 0 < r_lrs < r_hrs");
  }
  if (!(v_read < v_switch_threshold)) {
    throw InvalidArgument("profile: v_read must stay below v_switch_threshold");
  }
  if (!(v_switch_threshold <= v_mid - v_width)) {
    throw InvalidArgument(
        "profile: v_switch_threshold must not exceed v_mid - v_width");
  }
  if (!(v_switch_threshold < v_reset)) {
    throw InvalidArgument("profile: v_reset must exceed v_switch_threshold");
  }
  if (!(v_width > 0.0)) {
    throw InvalidArgument("profile: v_width must be positive");
  }
  if (!(sigma_pulse >= 0.0)) {
    throw InvalidArgument("profile: sigma_pulse must be non-negative");
  }
}

OxideProfile OxideProfile::zro2_y() {
  OxideProfile p;
  p.kind = OxideKind::ZrO2Y;
  p.r_hrs = 1e6;
  p.r_lrs = 1e3;
  p.v_mid = 3.5;
  p.v_width = 0.3;
  return p;
}

OxideProfile OxideProfile::sio2() {
  OxideProfile p;
  p.kind = OxideKind::SiO2;
  p.r_hrs = 1e3;
  p.r_lrs = 1e2;
  p.v_mid = 3.5;
  p.v_width = 0.9;
  return p;
}

OxideProfile OxideProfile::defaults(OxideKind kind) {
  return kind == OxideKind::ZrO2Y ? zro2_y() : sio2();
}

OxideProfile OxideProfile::perturbed(Rng& rng, double rel_sigma) const {
  if (rel_sigma < 0.0) {
    throw InvalidArgument("perturbed: rel_sigma must be non-negative");
  }
  OxideProfile p = *this;
  p.v_mid = v_mid * (1.0 + rel_sigma * rng.truncated_normal(-3.0, 3.0));
  p.r_hrs = r_hrs * (1.0 + rel_sigma * rng.truncated_normal(-3.0, 3.0));
  p.r_lrs = r_lrs * (1.0 + rel_sigma * rng.truncated_normal(-3.0, 3.0));
  // Keep the transition inside the programmable window.
  p.v_mid = std::clamp(p.v_mid, v_switch_threshold + v_width,
                       v_reset - v_width);
  if (!(p.r_lrs < p.r_hrs)) {
    std::swap(p.r_lrs, p.r_hrs);
  }
  p.validate();
  return p;
}

std::string OxideProfile::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["r_hrs"] = r_hrs;
  j["r_lrs"] = r_lrs;
  j["v_mid"] = v_mid;
  j["v_width"] = v_width;
  j["v_switch_threshold"] = v_switch_threshold;
  j["v_reset"] = v_reset;
  j["v_read"] = v_read;
  j["sigma_pulse"] = sigma_pulse;
  return j.dump(2);
}

OxideProfile OxideProfile::from_json(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw IoError("profile: invalid JSON");
  }
  OxideProfile p;
  try {
    p.kind = oxide_kind_from_string(j.at("kind").get<std::string>());
    p.r_hrs = j.at("r_hrs").get<double>();
    p.r_lrs = j.at("r_lrs").get<double>();
    p.v_mid = j.at("v_mid").get<double>();
    p.v_width = j.at("v_width").get<double>();
    p.v_switch_threshold = j.at("v_switch_threshold").get<double>();
    p.v_reset = j.at("v_reset").get<double>();
    p.v_read = j.at("v_read").get<double>();
    p.sigma_pulse = j.at("sigma_pulse").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("profile: ") + e.what());
  }
  p.validate();
  return p;
}

CalibrationCurve::CalibrationCurve(std::vector<CalibrationPoint> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InvalidArgument("curve: need at least 2 points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].resistance_ohm > 0.0)) {
      throw InvalidArgument("curve: resistances must be positive");
    }
    if (i > 0) {
      if (!(points_[i].amplitude_v > points_[i - 1].amplitude_v)) {
        throw InvalidArgument("curve: amplitudes must strictly increase");
      }
      if (!(points_[i].resistance_ohm < points_[i - 1].resistance_ohm)) {
        throw InvalidArgument("curve: resistances must strictly decrease");
      }
    }
  }
}

double CalibrationCurve::max_step() const {
  double step = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    step = std::max(step, points_[i].amplitude_v - points_[i - 1].amplitude_v);
  }
  return step;
}

double CalibrationCurve::lookup(double amplitude_v) const {
  if (amplitude_v <= points_.front().amplitude_v) {
    return points_.front().resistance_ohm;
  }
  if (amplitude_v >= points_.back().amplitude_v) {
    return points_.back().resistance_ohm;
  }
  auto it = std::upper_bound(
      points_.begin(), points_.end(), amplitude_v,
      [](double v, const CalibrationPoint& p) { return v < p.amplitude_v; });
  const CalibrationPoint& hi = *it;
  const CalibrationPoint& lo = *(it - 1);
  double t = (amplitude_v - lo.amplitude_v) / (hi.amplitude_v - lo.amplitude_v);
  double log_r = std::log10(lo.resistance_ohm) +
                 t * (std::log10(hi.resistance_ohm) -
                      std::log10(lo.resistance_ohm));
  return std::pow(10.0, log_r);
}

double CalibrationCurve::invert(double target_ohm) const {
  if (!(target_ohm >= r_lrs() && target_ohm <= r_hrs())) {
    std::ostringstream msg;
    msg << "invert: target " << target_ohm << " ohm outside [" << r_lrs()
        << ", " << r_hrs() << "]";
    throw TargetOutOfRange(msg.str());
  }
  if (target_ohm >= points_.front().resistance_ohm) {
    return points_.front().amplitude_v;
  }
  if (target_ohm <= points_.back().resistance_ohm) {
    return points_.back().amplitude_v;
  }
  // Resistances strictly decrease; find the bracketing segment.
  auto it = std::upper_bound(points_.begin(), points_.end(), target_ohm,
                             [](double r, const CalibrationPoint& p) {
                               return r > p.resistance_ohm;
                             });
  const CalibrationPoint& hi = *it;        // lower resistance
  const CalibrationPoint& lo = *(it - 1);  // higher resistance
  double log_lo = std::log10(lo.resistance_ohm);
  double log_hi = std::log10(hi.resistance_ohm);
  double t = (log_lo - std::log10(target_ohm)) / (log_lo - log_hi);
  return lo.amplitude_v + t * (hi.amplitude_v - lo.amplitude_v);
}

void CalibrationCurve::save_csv(const std::filesystem::path& path) const {
  std::string out = "amplitude_v,resistance_ohm\n";
  for (const auto& p : points_) {
    out += io::format_double(p.amplitude_v);
    out += ',';
    out += io::format_double(p.resistance_ohm);
    out += '\n';
  }
  io::atomic_write(path, out);
}

CalibrationCurve CalibrationCurve::load_csv(const std::filesystem::path& path) {
  io::CsvTable table = io::read_csv(path, "amplitude_v,resistance_ohm");
  std::vector<CalibrationPoint> points;
  points.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    if (row.size() != 2) {
      throw IoError(path.string() + ": expected 2 columns per row");
    }
    points.push_back({io::parse_double(row[0]), io::parse_double(row[1])});
  }
  return CalibrationCurve(std::move(points));
}

CalibrationCurve synth_calibration(const OxideProfile& profile, int n_points) {
  profile.validate();
  if (n_points < kMinCurvePoints) {
    throw InvalidArgument("synth_calibration: need at least 16 points");
  }
  double log_hrs = std::log10(profile.r_hrs);
  double log_lrs = std::log10(profile.r_lrs);
  double v_lo = profile.v_switch_threshold;
  double v_hi = profile.v_reset;
  std::vector<CalibrationPoint> points;
  points.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    double v = v_lo + (v_hi - v_lo) * static_cast<double>(i) /
                          static_cast<double>(n_points - 1);
    double s = logistic((v - profile.v_mid) / profile.v_width);
    double r = std::pow(10.0, log_hrs - (log_hrs - log_lrs) * s);
    points.push_back({v, r});
  }
  points.front() = {v_lo, profile.r_hrs};
  points.back() = {v_hi, profile.r_lrs};
  return CalibrationCurve(std::move(points));
}

std::string to_string(PulsePolarity polarity) {
  return polarity == PulsePolarity::SetNegative ? "set_negative"
                                                : "reset_positive";
}

void PulseCommand::validate() const {
  if (!(amplitude_v >= 0.0)) {
    throw InvalidArgument("pulse: amplitude must be non-negative");
  }
  if (!(duration_s > 0.0)) {
    throw InvalidArgument("pulse: duration must be positive");
  }
}

PulseCommand PulseCommand::set(double amplitude_v, double duration_s) {
  PulseCommand p{PulsePolarity::SetNegative, amplitude_v, duration_s};
  p.validate();
  return p;
}

PulseCommand PulseCommand::reset(double amplitude_v, double duration_s) {
  PulseCommand p{PulsePolarity::ResetPositive, amplitude_v, duration_s};
  p.validate();
  return p;
}

DeviceState::DeviceState(OxideProfile profile, CalibrationCurve curve)
    : profile_(std::move(profile)),
      curve_(std::move(curve)),
      resistance_(profile_.r_hrs) {
  profile_.validate();
  if (curve_.size() < kMinCurvePoints) {
    throw InvalidArgument("device: curve needs at least 16 points");
  }
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
  };
  if (!close(curve_.r_hrs(), profile_.r_hrs) ||
      !close(curve_.r_lrs(), profile_.r_lrs)) {
    throw InvalidArgument("device: curve endpoints must equal r_hrs / r_lrs");
  }
  if (!close(curve_.v_min(), profile_.v_switch_threshold) ||
      !close(curve_.v_max(), profile_.v_reset)) {
    throw InvalidArgument(
        "device: curve must span [v_switch_threshold, v_reset]");
  }
}

void DeviceState::set_resistance(double ohm) {
  if (!(ohm >= profile_.r_lrs && ohm <= profile_.r_hrs)) {
    std::ostringstream msg;
    msg << "device: resistance " << ohm << " ohm outside [" << profile_.r_lrs
        << ", " << profile_.r_hrs << "]";
    throw TargetOutOfRange(msg.str());
  }
  resistance_ = ohm;
}

DeviceState make_device(const OxideProfile& profile, int curve_points) {
  return DeviceState(profile, synth_calibration(profile, curve_points));
}

DeviceState apply_pulse(const DeviceState& state, const PulseCommand& pulse,
                        Rng& rng) {
  pulse.validate();
  const OxideProfile& prof = state.profile();
  DeviceState next = state;
  if (pulse.amplitude_v < prof.v_switch_threshold) {
    return next;  // sub-threshold pulses (reads included) never program
  }
  if (pulse.polarity == PulsePolarity::ResetPositive) {
    next.set_resistance(prof.r_hrs);
    return next;
  }
  double programmed = state.curve().lookup(pulse.amplitude_v);
  if (prof.sigma_pulse > 0.0) {
    double z = rng.truncated_normal(-3.0, 3.0);
    programmed *= 1.0 + prof.sigma_pulse * z;
  }
  programmed = std::clamp(programmed, prof.r_lrs, prof.r_hrs);
  next.set_resistance(programmed);
  return next;
}

double read_current(const DeviceState& state) {
  return state.profile().v_read / state.resistance();
}

double invert_calibration(const CalibrationCurve& curve, double target_ohm) {
  return curve.invert(target_ohm);
}

}  // namespace memsim

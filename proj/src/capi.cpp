#include "memsim.h"

#include <cstring>
#include <exception>
#include <string>
#include <utility>

#include "memsim/errors.hpp"
#include "memsim/experiment.hpp"

struct ms_rng {
  memsim::Rng impl;
};

struct ms_profile {
  memsim::OxideProfile impl;
};

struct ms_device {
  memsim::DeviceState impl;
};

struct ms_net {
  memsim::Perceptron impl;
};

namespace {

static_assert(MS_OK == static_cast<int>(memsim::Status::Ok));
static_assert(MS_ERR_INVALID_ARGUMENT ==
              static_cast<int>(memsim::Status::InvalidArgument));
static_assert(MS_ERR_CONFIG == static_cast<int>(memsim::Status::ConfigError));
static_assert(MS_ERR_NUMERIC ==
              static_cast<int>(memsim::Status::NumericError));
static_assert(MS_ERR_IO == static_cast<int>(memsim::Status::IoError));
static_assert(MS_ERR_RANGE == static_cast<int>(memsim::Status::RangeError));
static_assert(MS_ERR_UNSAFE_VOLTAGE ==
              static_cast<int>(memsim::Status::UnsafeVoltage));
static_assert(MS_ERR_DIMENSION ==
              static_cast<int>(memsim::Status::DimensionMismatch));

thread_local std::string t_last_error;

ms_status fail(ms_status status, const char* what) {
  t_last_error = what;
  return status;
}

template <typename Fn>
ms_status guarded(Fn&& fn) noexcept {
  try {
    return fn();
  } catch (const memsim::Error& e) {
    return fail(static_cast<ms_status>(e.status()), e.what());
  } catch (const std::exception& e) {
    return fail(MS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MS_ERR_INTERNAL, "unidentified failure");
  }
}

ms_status require(bool ok, const char* what) {
  return ok ? MS_OK : fail(MS_ERR_INVALID_ARGUMENT, what);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string or_empty(const char* s) { return s ? s : ""; }

memsim::ExperimentConfig parse_config(const char* config_json) {
  if (!config_json) {
    throw memsim::InvalidArgument("config_json is NULL");
  }
  memsim::ExperimentConfig config =
      memsim::ExperimentConfig::from_json(config_json);
  config.validate();
  return config;
}

}  // namespace

extern "C" {

const char* ms_last_error(void) { return t_last_error.c_str(); }

void ms_string_free(char* s) { delete[] s; }

ms_status ms_rng_new(uint64_t seed, ms_rng** out) {
  if (ms_status s = require(out != nullptr, "ms_rng_new: out is NULL")) {
    return s;
  }
  return guarded([&] {
    *out = new ms_rng{memsim::Rng(seed)};
    return MS_OK;
  });
}

void ms_rng_free(ms_rng* rng) { delete rng; }

uint64_t ms_seed_derive(uint64_t master, const char* tag) {
  return memsim::derive_seed(master, tag ? tag : "");
}

ms_status ms_profile_default(ms_oxide oxide, ms_profile** out) {
  if (ms_status s =
          require(out != nullptr, "ms_profile_default: out is NULL")) {
    return s;
  }
  return guarded([&] {
    memsim::OxideKind kind = oxide == MS_OXIDE_SIO2
                                 ? memsim::OxideKind::SiO2
                                 : memsim::OxideKind::ZrO2Y;
    if (oxide != MS_OXIDE_ZRO2_Y && oxide != MS_OXIDE_SIO2) {
      throw memsim::InvalidArgument("ms_profile_default: unknown oxide");
    }
    *out = new ms_profile{memsim::OxideProfile::defaults(kind)};
    return MS_OK;
  });
}

ms_status ms_profile_from_json(const char* json, ms_profile** out) {
  if (ms_status s = require(json != nullptr && out != nullptr,
                            "ms_profile_from_json: NULL argument")) {
    return s;
  }
  return guarded([&] {
    *out = new ms_profile{memsim::OxideProfile::from_json(json)};
    return MS_OK;
  });
}

ms_status ms_profile_to_json(const ms_profile* profile, char** out) {
  if (ms_status s = require(profile != nullptr && out != nullptr,
                            "ms_profile_to_json: NULL argument")) {
    return s;
  }
  return guarded([&] {
    *out = copy_string(profile->impl.to_json());
    return MS_OK;
  });
}

void ms_profile_free(ms_profile* profile) { delete profile; }

ms_status ms_device_make(const ms_profile* profile, int curve_points,
                         ms_device** out) {
  if (ms_status s = require(profile != nullptr && out != nullptr,
                            "ms_device_make: NULL argument")) {
    return s;
  }
  return guarded([&] {
    *out = new ms_device{memsim::make_device(profile->impl, curve_points)};
    return MS_OK;
  });
}

void ms_device_free(ms_device* device) { delete device; }

double ms_device_resistance(const ms_device* device) {
  return device ? device->impl.resistance() : 0.0;
}

ms_status ms_device_pulse(ms_device* device, ms_polarity polarity,
                          double amplitude_v, double duration_s, ms_rng* rng) {
  if (ms_status s = require(device != nullptr && rng != nullptr,
                            "ms_device_pulse: NULL argument")) {
    return s;
  }
  return guarded([&] {
    memsim::PulseCommand cmd;
    cmd.polarity = polarity == MS_RESET_POSITIVE
                       ? memsim::PulsePolarity::ResetPositive
                       : memsim::PulsePolarity::SetNegative;
    cmd.amplitude_v = amplitude_v;
    cmd.duration_s = duration_s;
    device->impl = memsim::apply_pulse(device->impl, cmd, rng->impl);
    return MS_OK;
  });
}

ms_status ms_device_invert(const ms_device* device, double target_ohm,
                           double* out_v) {
  if (ms_status s = require(device != nullptr && out_v != nullptr,
                            "ms_device_invert: NULL argument")) {
    return s;
  }
  return guarded([&] {
    *out_v = memsim::invert_calibration(device->impl.curve(), target_ohm);
    return MS_OK;
  });
}

ms_status ms_net_load(const char* path, ms_net** out) {
  if (ms_status s = require(path != nullptr && out != nullptr,
                            "ms_net_load: NULL argument")) {
    return s;
  }
  return guarded([&] {
    *out = new ms_net{memsim::load_network(path)};
    return MS_OK;
  });
}

ms_status ms_net_save(const ms_net* net, const char* path) {
  if (ms_status s = require(net != nullptr && path != nullptr,
                            "ms_net_save: NULL argument")) {
    return s;
  }
  return guarded([&] {
    memsim::save_network(net->impl, path);
    return MS_OK;
  });
}

void ms_net_free(ms_net* net) { delete net; }

int ms_net_device_backed(const ms_net* net) {
  return net && net->impl.device_backed() ? 1 : 0;
}

ms_status ms_net_forward(const ms_net* net, const double* x, size_t n_in,
                         double* y, size_t n_out) {
  if (ms_status s = require(net != nullptr && x != nullptr && y != nullptr,
                            "ms_net_forward: NULL argument")) {
    return s;
  }
  return guarded([&] {
    memsim::ForwardTrace trace =
        memsim::forward(net->impl, std::span<const double>(x, n_in));
    const std::vector<double>& outputs = trace.outputs();
    if (outputs.size() != n_out) {
      throw memsim::DimensionMismatch(
          "ms_net_forward: n_out does not match the network");
    }
    std::memcpy(y, outputs.data(), n_out * sizeof(double));
    return MS_OK;
  });
}

ms_status ms_net_classify(const ms_net* net, const double* x, size_t n_in,
                          ms_label* out) {
  if (ms_status s = require(net != nullptr && x != nullptr && out != nullptr,
                            "ms_net_classify: NULL argument")) {
    return s;
  }
  return guarded([&] {
    memsim::Label label =
        memsim::classify(net->impl, std::span<const double>(x, n_in));
    *out = label == memsim::Label::Concave ? MS_LABEL_CONCAVE
                                           : MS_LABEL_CONVEX;
    return MS_OK;
  });
}

ms_status ms_cmd_synth(const char* config_json) {
  return guarded([&] {
    memsim::cmd_synth(parse_config(config_json));
    return MS_OK;
  });
}

ms_status ms_cmd_train(const char* config_json) {
  return guarded([&] {
    memsim::cmd_train(parse_config(config_json));
    return MS_OK;
  });
}

ms_status ms_cmd_transfer(const char* config_json, const char* network_file) {
  return guarded([&] {
    memsim::cmd_transfer(parse_config(config_json), or_empty(network_file));
    return MS_OK;
  });
}

ms_status ms_cmd_eval(const char* config_json, const char* network_file,
                      const char* dataset_file) {
  return guarded([&] {
    memsim::cmd_eval(parse_config(config_json), or_empty(network_file),
                     or_empty(dataset_file));
    return MS_OK;
  });
}

ms_status ms_cmd_sweep(const char* config_json) {
  return guarded([&] {
    memsim::cmd_sweep(parse_config(config_json));
    return MS_OK;
  });
}

}  // extern "C"

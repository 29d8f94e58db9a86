#ifndef MEMSIM_H
#define MEMSIM_H

/* C interface of the memristive perceptron simulator. Handles are opaque;
 * every fallible call returns an ms_status and leaves a human-readable
 * message in ms_last_error() (thread-local) on failure. */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ms_status {
  MS_OK = 0,
  MS_ERR_INVALID_ARGUMENT = 1,
  MS_ERR_CONFIG = 2,
  MS_ERR_NUMERIC = 3,
  MS_ERR_IO = 4,
  MS_ERR_RANGE = 5,          /* resistance or weight outside its window */
  MS_ERR_UNSAFE_VOLTAGE = 6, /* input beyond the +-1 V operating range */
  MS_ERR_DIMENSION = 7,
  MS_ERR_INTERNAL = 8
} ms_status;

/* Message for the most recent failure on the calling thread. Never NULL;
 * empty string when nothing failed yet. Owned by the library. */
const char* ms_last_error(void);

typedef enum ms_oxide {
  MS_OXIDE_ZRO2_Y = 0,
  MS_OXIDE_SIO2 = 1
} ms_oxide;

typedef enum ms_polarity {
  MS_SET_NEGATIVE = 0,
  MS_RESET_POSITIVE = 1
} ms_polarity;

typedef enum ms_label {
  MS_LABEL_CONCAVE = 0,
  MS_LABEL_CONVEX = 1
} ms_label;

typedef struct ms_rng ms_rng;
typedef struct ms_profile ms_profile;
typedef struct ms_device ms_device;
typedef struct ms_net ms_net;

/* Frees strings returned through char** out-parameters. */
void ms_string_free(char* s);

/* Seeded random stream. */
ms_status ms_rng_new(uint64_t seed, ms_rng** out);
void ms_rng_free(ms_rng* rng);

/* Stream seed for a component tag, identical to what the pipeline uses. */
uint64_t ms_seed_derive(uint64_t master, const char* tag);

/* Device profiles. */
ms_status ms_profile_default(ms_oxide oxide, ms_profile** out);
ms_status ms_profile_from_json(const char* json, ms_profile** out);
ms_status ms_profile_to_json(const ms_profile* profile, char** out);
void ms_profile_free(ms_profile* profile);

/* A single memristive device with a synthesized response table, starting
 * at its high-resistance state. */
ms_status ms_device_make(const ms_profile* profile, int curve_points,
                         ms_device** out);
void ms_device_free(ms_device* device);
double ms_device_resistance(const ms_device* device);

/* Applies one programming pulse. The rng feeds the pulse-to-pulse noise. */
ms_status ms_device_pulse(ms_device* device, ms_polarity polarity,
                          double amplitude_v, double duration_s, ms_rng* rng);

/* SET amplitude that this device's table maps to target_ohm. */
ms_status ms_device_invert(const ms_device* device, double target_ohm,
                           double* out_v);

/* Networks (the JSON files written by the train/transfer commands). */
ms_status ms_net_load(const char* path, ms_net** out);
ms_status ms_net_save(const ms_net* net, const char* path);
void ms_net_free(ms_net* net);
int ms_net_device_backed(const ms_net* net);
ms_status ms_net_forward(const ms_net* net, const double* x, size_t n_in,
                         double* y, size_t n_out);
ms_status ms_net_classify(const ms_net* net, const double* x, size_t n_in,
                          ms_label* out);

/* Experiment commands. config_json is the experiment configuration object;
 * unknown keys are rejected, absent keys keep their defaults. Outputs land
 * in the configured output directory. Optional path arguments may be NULL
 * or empty to use the command's default. */
ms_status ms_cmd_synth(const char* config_json);
ms_status ms_cmd_train(const char* config_json);
ms_status ms_cmd_transfer(const char* config_json, const char* network_file);
ms_status ms_cmd_eval(const char* config_json, const char* network_file,
                      const char* dataset_file);
ms_status ms_cmd_sweep(const char* config_json);

#ifdef __cplusplus
}
#endif

#endif /* MEMSIM_H */

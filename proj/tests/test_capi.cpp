// Exercises the shared library strictly through its C surface.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "memsim.h"

namespace {

std::filesystem::path scratch_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string config_json(const std::filesystem::path& dir,
                        unsigned long long seed = 7) {
  std::string json = "{\"seed\": ";
  json += std::to_string(seed);
  json += ", \"mc_trials\": 3, \"test_per_class\": 10, \"out_dir\": \"";
  json += dir.string();
  json += "\"}";
  return json;
}

}  // namespace

TEST_CASE("status codes and last error") {
  CHECK(ms_cmd_train(nullptr) == MS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(ms_last_error()).find("NULL") != std::string::npos);
  CHECK(ms_cmd_train("{\"epsilon\": 2.0}") == MS_ERR_CONFIG);
  CHECK(ms_cmd_train("nonsense") == MS_ERR_CONFIG);
  CHECK(ms_cmd_train("{\"no_such_key\": 1}") == MS_ERR_CONFIG);
  CHECK(std::string(ms_last_error()).find("no_such_key") !=
        std::string::npos);
}

TEST_CASE("rng handles derive and stream") {
  CHECK(ms_seed_derive(1, "synth") != ms_seed_derive(1, "train/init"));
  CHECK(ms_seed_derive(1, "synth") == ms_seed_derive(1, "synth"));
  ms_rng* rng = nullptr;
  REQUIRE(ms_rng_new(42, &rng) == MS_OK);
  REQUIRE(rng != nullptr);
  ms_rng_free(rng);
  CHECK(ms_rng_new(42, nullptr) == MS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("profile JSON round-trip through the C surface") {
  ms_profile* profile = nullptr;
  REQUIRE(ms_profile_default(MS_OXIDE_SIO2, &profile) == MS_OK);
  char* json = nullptr;
  REQUIRE(ms_profile_to_json(profile, &json) == MS_OK);
  REQUIRE(json != nullptr);
  std::string text(json);
  ms_string_free(json);
  CHECK(text.find("sio2") != std::string::npos);
  ms_profile* back = nullptr;
  REQUIRE(ms_profile_from_json(text.c_str(), &back) == MS_OK);
  ms_profile_free(back);
  ms_profile_free(profile);
  CHECK(ms_profile_from_json("broken", &back) != MS_OK);
}

TEST_CASE("device pulses through the C surface") {
  ms_profile* profile = nullptr;
  REQUIRE(ms_profile_default(MS_OXIDE_ZRO2_Y, &profile) == MS_OK);
  ms_device* dev = nullptr;
  REQUIRE(ms_device_make(profile, 33, &dev) == MS_OK);
  CHECK(ms_device_resistance(dev) == 1e6);
  ms_rng* rng = nullptr;
  REQUIRE(ms_rng_new(5, &rng) == MS_OK);
  REQUIRE(ms_device_pulse(dev, MS_SET_NEGATIVE, 4.0, 5e-3, rng) == MS_OK);
  double r = ms_device_resistance(dev);
  CHECK(r < 1e6);
  CHECK(r >= 1e3);
  double v = 0.0;
  REQUIRE(ms_device_invert(dev, 1e4, &v) == MS_OK);
  CHECK(v > 2.0);
  CHECK(v < 7.0);
  CHECK(ms_device_invert(dev, 1.0, &v) == MS_ERR_RANGE);
  REQUIRE(ms_device_pulse(dev, MS_RESET_POSITIVE, 7.0, 5e-3, rng) == MS_OK);
  CHECK(ms_device_resistance(dev) == 1e6);
  ms_rng_free(rng);
  ms_device_free(dev);
  ms_profile_free(profile);
}

TEST_CASE("pipeline commands and network access") {
  auto dir = scratch_dir("memsim_capi_pipe");
  std::string config = config_json(dir);
  REQUIRE(ms_cmd_synth(config.c_str()) == MS_OK);
  REQUIRE(ms_cmd_train(config.c_str()) == MS_OK);
  REQUIRE(ms_cmd_transfer(config.c_str(), nullptr) == MS_OK);
  REQUIRE(ms_cmd_eval(config.c_str(), nullptr, nullptr) == MS_OK);
  REQUIRE(ms_cmd_sweep(config.c_str()) == MS_OK);
  CHECK(std::filesystem::exists(dir / "network.json"));
  CHECK(std::filesystem::exists(dir / "device_network.json"));
  CHECK(std::filesystem::exists(dir / "metrics.json"));
  CHECK(std::filesystem::exists(dir / "sweep.csv"));

  ms_net* net = nullptr;
  std::string net_path = (dir / "network.json").string();
  REQUIRE(ms_net_load(net_path.c_str(), &net) == MS_OK);
  CHECK(ms_net_device_backed(net) == 0);
  double x[4] = {0.8, -0.8, -0.8, 0.8};
  double y = 0.0;
  REQUIRE(ms_net_forward(net, x, 4, &y, 1) == MS_OK);
  CHECK(std::abs(y) <= 1.0);
  CHECK(y > 0.0);  // trained net calls the concave nominal concave
  ms_label label = MS_LABEL_CONVEX;
  REQUIRE(ms_net_classify(net, x, 4, &label) == MS_OK);
  CHECK(label == MS_LABEL_CONCAVE);
  CHECK(ms_net_forward(net, x, 3, &y, 1) == MS_ERR_DIMENSION);
  double hot[4] = {2.0, 0.0, 0.0, 0.0};
  CHECK(ms_net_forward(net, hot, 4, &y, 1) == MS_ERR_UNSAFE_VOLTAGE);

  std::string copy_path = (dir / "copy.json").string();
  REQUIRE(ms_net_save(net, copy_path.c_str()) == MS_OK);
  ms_net* copy = nullptr;
  REQUIRE(ms_net_load(copy_path.c_str(), &copy) == MS_OK);
  double y2 = 0.0;
  REQUIRE(ms_net_forward(copy, x, 4, &y2, 1) == MS_OK);
  CHECK(y2 == y);
  ms_net_free(copy);
  ms_net_free(net);

  ms_net* dev_net = nullptr;
  std::string dev_path = (dir / "device_network.json").string();
  REQUIRE(ms_net_load(dev_path.c_str(), &dev_net) == MS_OK);
  CHECK(ms_net_device_backed(dev_net) == 1);
  REQUIRE(ms_net_forward(dev_net, x, 4, &y, 1) == MS_OK);
  ms_net_free(dev_net);
  std::filesystem::remove_all(dir);
}

TEST_CASE("io failures surface as MS_ERR_IO") {
  ms_net* net = nullptr;
  CHECK(ms_net_load("/nonexistent/net.json", &net) == MS_ERR_IO);
  CHECK(net == nullptr);
  CHECK(std::string(ms_last_error()).find("nonexistent") !=
        std::string::npos);
}

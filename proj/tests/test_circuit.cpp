#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "memsim/circuit.hpp"
#include "memsim/device.hpp"
#include "memsim/errors.hpp"
#include "memsim/rng.hpp"

using namespace memsim;

namespace {

constexpr double kGainZrO2 = 3.3366700033366699;  // normalizes w_max to 1

DeviceState device_at(double ohm) {
  DeviceState dev = make_device(OxideProfile::zro2_y());
  dev.set_resistance(ohm);
  return dev;
}

ComplementaryPair pair_at(double upper_ohm, double lower_ohm) {
  return {device_at(upper_ohm), device_at(lower_ohm)};
}

}  // namespace

TEST_CASE("pair weight matches the independently computed values") {
  CHECK(normalizing_gain(OxideProfile::zro2_y(), 300.0) ==
        doctest::Approx(kGainZrO2).epsilon(1e-15));
  // Frozen from the defining formula gain * R * (1/R_up - 1/R_low).
  CHECK(pair_weight(2e3, 5e4, 300.0, kGainZrO2) ==
        doctest::Approx(0.48048048048048048).epsilon(1e-14));
  CHECK(pair_weight(8e5, 1.2e3, 300.0, kGainZrO2) ==
        doctest::Approx(-0.83291624958291632).epsilon(1e-14));
  // LRS over HRS is the positive extreme; equal resistances cancel.
  CHECK(pair_weight(1e3, 1e6, 300.0, kGainZrO2) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pair_weight(5e4, 5e4, 300.0, kGainZrO2) == 0.0);
}

TEST_CASE("weight bound is symmetric and normalized by the gain") {
  OxideProfile p = OxideProfile::zro2_y();
  double g = normalizing_gain(p, 300.0);
  CHECK(weight_bound(p, 300.0, g) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pair_weight(p.r_lrs, p.r_hrs, 300.0, g) ==
        doctest::Approx(weight_bound(p, 300.0, g)).epsilon(1e-14));
  CHECK(pair_weight(p.r_hrs, p.r_lrs, 300.0, g) ==
        doctest::Approx(-weight_bound(p, 300.0, g)).epsilon(1e-14));
  // SiO2 normalizes to 1 with its own gain too.
  OxideProfile s = OxideProfile::sio2();
  CHECK(weight_bound(s, 300.0, normalizing_gain(s, 300.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("per-pair bound accounts for device-to-device variation") {
  Rng rng(9);
  OxideProfile nominal = OxideProfile::zro2_y();
  double g = normalizing_gain(nominal, 300.0);
  for (int i = 0; i < 200; ++i) {
    OxideProfile a = nominal.perturbed(rng, 0.05);
    OxideProfile b = nominal.perturbed(rng, 0.05);
    ComplementaryPair pair{make_device(a), make_device(b)};
    double bound = pair_weight_bound(pair, 300.0, g);
    CHECK(bound > 0.0);
    double expect = g * 300.0 *
                    (1.0 / std::max(a.r_lrs, b.r_lrs) -
                     1.0 / std::min(a.r_hrs, b.r_hrs));
    CHECK(bound == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("circuit params validation") {
  CircuitParams params;
  params.r_feedback = 0.0;
  CHECK_THROWS_AS(params.validate(), InvalidArgument);
  params = {};
  params.gain = -1.0;
  CHECK_THROWS_AS(params.validate(), InvalidArgument);
}

TEST_CASE("summing output reproduces the frozen amplifier value") {
  CircuitParams params{300.0, 1.0, kGainZrO2};
  std::vector<ComplementaryPair> inputs;
  inputs.push_back(pair_at(1500.0, 30000.0));
  inputs.push_back(pair_at(250000.0, 1200.0));
  NeuronCircuit neuron{std::move(inputs), pair_at(2000.0, 900000.0), params};
  std::vector<double> u = {0.7, -0.4};
  CHECK(summing_output(neuron, u) ==
        doctest::Approx(1.2752307863418975).epsilon(1e-12));
}

TEST_CASE("summing output equals the weight-form sum on random boards") {
  Rng rng(41);
  CircuitParams params{300.0, 1.0, kGainZrO2};
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + static_cast<int>(rng.below(5));
    std::vector<ComplementaryPair> inputs;
    std::vector<double> u;
    auto random_ohm = [&rng] {
      return std::pow(10.0, rng.uniform(3.0, 6.0));
    };
    for (int i = 0; i < n; ++i) {
      inputs.push_back(pair_at(random_ohm(), random_ohm()));
      u.push_back(rng.uniform(-1.0, 1.0));
    }
    NeuronCircuit neuron{std::move(inputs), pair_at(random_ohm(), random_ohm()),
                         params};
    double expect = params.gain * params.r_feedback *
                    (1.0 / neuron.theta_pair.upper.resistance() -
                     1.0 / neuron.theta_pair.lower.resistance()) *
                    params.u_theta;
    for (int i = 0; i < n; ++i) {
      expect += params.gain * params.r_feedback *
                (1.0 / neuron.input_pairs[static_cast<size_t>(i)]
                           .upper.resistance() -
                 1.0 / neuron.input_pairs[static_cast<size_t>(i)]
                           .lower.resistance()) *
                u[static_cast<size_t>(i)];
    }
    double got = summing_output(neuron, u);
    CHECK(std::abs(got - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("summing output rejects unsafe inputs and wrong arity") {
  CircuitParams params{300.0, 1.0, kGainZrO2};
  std::vector<ComplementaryPair> inputs;
  inputs.push_back(pair_at(1e4, 1e5));
  NeuronCircuit neuron{std::move(inputs), pair_at(1e4, 1e4), params};
  std::vector<double> hot = {1.5};  // beyond the non-destructive window
  CHECK_THROWS_AS(summing_output(neuron, hot), UnsafeInputVoltage);
  std::vector<double> two = {0.1, 0.1};
  CHECK_THROWS_AS(summing_output(neuron, two), DimensionMismatch);
}

TEST_CASE("tanh table tracks the smooth function") {
  ActivationTable t = ActivationTable::tanh_table();
  for (double s = -4.0; s <= 4.0; s += 0.0317) {
    CHECK(t.value(s) == doctest::Approx(std::tanh(s)).epsilon(1e-5));
    double sech2 = 1.0 - std::tanh(s) * std::tanh(s);
    CHECK(std::abs(t.slope(s) - sech2) < 1e-4);
  }
  // Saturation clamps: beyond the table the limiter holds its rails, and the
  // derivative pins to its (nearly flat) endpoint sample.
  CHECK(t.value(10.0) == t.value(4.0));
  CHECK(t.value(-10.0) == t.value(-4.0));
  CHECK(t.slope(10.0) == t.slope(4.0));
  CHECK(t.slope(10.0) < 2e-3);
}

TEST_CASE("activation tables are odd and non-decreasing") {
  for (const ActivationTable& t :
       {ActivationTable::tanh_table(), ActivationTable::hard_clip_table()}) {
    CHECK(t.value(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    double prev = t.value(t.s_min());
    for (double s = t.s_min(); s <= t.s_max() + 1e-9; s += 0.05) {
      double v = t.value(s);
      CHECK(std::abs(v) <= 1.0 + 1e-12);
      CHECK(v >= prev - 1e-12);
      CHECK(std::abs(t.value(-s) + v) <= 1e-9);
      CHECK(t.slope(s) >= -1e-12);
      prev = v;
    }
  }
}

TEST_CASE("hard clip is the identity inside its rails") {
  ActivationTable t = ActivationTable::hard_clip_table();
  CHECK(t.value(0.25) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(t.value(-0.8) == doctest::Approx(-0.8).epsilon(1e-9));
  CHECK(t.value(2.0) == 1.0);
  CHECK(t.value(-3.0) == -1.0);
}

TEST_CASE("table construction rejects broken invariants") {
  auto tanh_fn = [](double s) { return std::tanh(s); };
  auto tanh_slope = [](double s) {
    return 1.0 - std::tanh(s) * std::tanh(s);
  };
  // Too coarse a grid for the derivative consistency contract.
  CHECK_THROWS_AS(
      ActivationTable::tabulate(tanh_fn, tanh_slope, -4.0, 4.0, 513),
      InvalidArgument);
  // Asymmetric domain.
  CHECK_THROWS_AS(
      ActivationTable::tabulate(tanh_fn, tanh_slope, -3.0, 4.0, 1025),
      InvalidArgument);
  // Non-monotone samples.
  CHECK_THROWS_AS(
      ActivationTable::tabulate([](double s) { return std::sin(3.0 * s); },
                                [](double s) { return 3.0 * std::cos(3.0 * s); },
                                -4.0, 4.0, 1025),
      InvalidArgument);
  // Values escaping the unit rail.
  CHECK_THROWS_AS(
      ActivationTable::tabulate([&](double s) { return 1.5 * std::tanh(s); },
                                [&](double s) { return 1.5 * tanh_slope(s); },
                                -4.0, 4.0, 1025),
      InvalidArgument);
}

TEST_CASE("activation table CSV round-trips") {
  ActivationTable t = ActivationTable::tanh_table(-4.0, 4.0, 1025);
  auto path = std::filesystem::temp_directory_path() / "memsim_act.csv";
  t.save_csv(path);
  ActivationTable u = ActivationTable::load_csv(path);
  REQUIRE(u.n_samples() == t.n_samples());
  for (size_t i = 0; i < t.n_samples(); ++i) {
    CHECK(u.values()[i] == t.values()[i]);
    CHECK(u.slopes()[i] == t.slopes()[i]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("smooth activation kind evaluates tanh directly") {
  Activation a = Activation::smooth_tanh();
  CHECK(!a.is_table());
  CHECK(a.value(0.3) == std::tanh(0.3));
  double sech2 = 1.0 - std::tanh(0.3) * std::tanh(0.3);
  CHECK(a.slope(0.3) == doctest::Approx(sech2).epsilon(1e-15));
}

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "memsim/rng.hpp"

namespace memsim {

enum class Label { Concave, Convex };

std::string to_string(Label label);
Label label_from_string(std::string_view name);

// Noise level of the generated samples; also the headroom the input scaling
// reserves, so any sample at or below this noise fits the +-1 range.
inline constexpr double kEtaMax = 0.25;

// Four-point waveform: a nominal shape pattern plus per-entry noise.
struct Sample {
  std::array<double, 4> x;
  Label label;
};

using Dataset = std::vector<Sample>;

// Noise-free pattern of a class: concave {1,-1,-1,1}, convex {-1,1,1,-1}.
std::array<double, 4> nominal(Label label);

// Training target of the single output neuron: concave +1, convex -1.
double target_value(Label label);

// `count_per_class` samples of each class, interleaved concave/convex.
// Each entry is nominal + eta * u with u uniform on [-1, 1]; draws happen
// in sample order, four per sample.
Dataset generate(int count_per_class, double eta, Rng& rng);

// Divides the entries by (1 + kEtaMax) so any sample generated with
// eta <= kEtaMax lands in [-1, 1] and is safe to present as a voltage.
Sample scale_for_input(const Sample& sample);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace memsim

#include "memsim/dataset.hpp"

#include <sstream>
#include <string>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

std::string to_string(Label label) {
  return label == Label::Concave ? "concave" : "convex";
}

Label label_from_string(std::string_view name) {
  if (name == "concave") return Label::Concave;
  if (name == "convex") return Label::Convex;
  throw InvalidArgument("label: expected \"concave\" or \"convex\", got \"" +
                        std::string(name) + "\"");
}

std::array<double, 4> nominal(Label label) {
  if (label == Label::Concave) return {1.0, -1.0, -1.0, 1.0};
  return {-1.0, 1.0, 1.0, -1.0};
}

double target_value(Label label) {
  return label == Label::Concave ? 1.0 : -1.0;
}

Dataset generate(int count_per_class, double eta, Rng& rng) {
  if (count_per_class < 0) {
    throw InvalidArgument("dataset: count_per_class must be non-negative");
  }
  if (eta < 0.0) {
    throw InvalidArgument("dataset: eta must be non-negative");
  }
  Dataset data;
  data.reserve(2 * static_cast<std::size_t>(count_per_class));
  for (int q = 0; q < count_per_class; ++q) {
    for (Label label : {Label::Concave, Label::Convex}) {
      Sample s;
      s.label = label;
      s.x = nominal(label);
      for (double& v : s.x) {
        v += eta * rng.uniform(-1.0, 1.0);
      }
      data.push_back(s);
    }
  }
  return data;
}

Sample scale_for_input(const Sample& sample) {
  Sample scaled = sample;
  for (double& v : scaled.x) {
    v /= 1.0 + kEtaMax;
  }
  return scaled;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::string out = "x0,x1,x2,x3,label\n";
  for (const Sample& s : data) {
    for (double v : s.x) {
      out += io::format_double(v);
      out += ',';
    }
    out += to_string(s.label);
    out += '\n';
  }
  io::atomic_write(path, out);
}

Dataset load_dataset(const std::filesystem::path& path) {
  io::CsvTable table = io::read_csv(path, "x0,x1,x2,x3,label");
  Dataset data;
  data.reserve(table.rows.size());
  for (const std::vector<std::string>& row : table.rows) {
    Sample s;
    for (std::size_t i = 0; i < 4; ++i) {
      s.x[i] = io::parse_double(row[i]);
    }
    s.label = label_from_string(row[4]);
    data.push_back(s);
  }
  return data;
}

}  // namespace memsim

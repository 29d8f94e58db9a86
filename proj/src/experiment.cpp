#include "memsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "memsim/errors.hpp"
#include "memsim/io.hpp"

namespace memsim {

namespace {

using nlohmann::ordered_json;

Rng tagged_rng(std::uint64_t master, std::string_view tag) {
  return Rng(derive_seed(master, tag));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (device_sigma < 0.0) {
    throw ConfigError("config: device_sigma must be non-negative");
  }
  if (curve_points < 16) {
    throw ConfigError("config: curve_points must be at least 16");
  }
  topology.validate();
  TrainConfig tc;
  tc.epsilon = epsilon;
  tc.max_steps = max_steps;
  tc.batch = batch;
  tc.stop_error = stop_error;
  tc.validate();
  if (init_scale < 0.0) {
    throw ConfigError("config: init_scale must be non-negative");
  }
  if (train_per_class < 1 || test_per_class < 1) {
    throw ConfigError("config: dataset counts must be at least 1 per class");
  }
  if (eta < 0.0 || eta > kEtaMax) {
    std::ostringstream msg;
    msg << "config: eta must lie in [0, " << kEtaMax
        << "] so scaled inputs stay within +-1";
    throw ConfigError(msg.str());
  }
  if (verify_iters < 0) {
    throw ConfigError("config: verify_iters must be non-negative");
  }
  if (mc_trials < 0) {
    throw ConfigError("config: mc_trials must be non-negative");
  }
  if (finetune_steps < 0) {
    throw ConfigError("config: finetune_steps must be non-negative");
  }
}

std::string ExperimentConfig::to_json() const {
  ordered_json j;
  j["oxide"] = to_string(oxide);
  j["device_sigma"] = device_sigma;
  j["curve_points"] = curve_points;
  j["topology"] = {{"n_inputs", topology.n_inputs},
                   {"hidden", topology.hidden},
                   {"n_outputs", topology.n_outputs},
                   {"pair_budget", topology.pair_budget}};
  j["epsilon"] = epsilon;
  j["max_steps"] = max_steps;
  j["batch"] = to_string(batch);
  j["stop_error"] = stop_error;
  j["init_scale"] = init_scale;
  j["train_per_class"] = train_per_class;
  j["test_per_class"] = test_per_class;
  j["eta"] = eta;
  j["transfer_sigma"] = transfer_sigma;
  j["verify_iters"] = verify_iters;
  j["mc_trials"] = mc_trials;
  j["finetune_steps"] = finetune_steps;
  j["seed"] = seed;
  j["out_dir"] = out_dir.string();
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError("config: invalid JSON");
  }
  static constexpr const char* known[] = {
      "oxide",          "device_sigma",   "curve_points",  "topology",
      "epsilon",        "max_steps",      "batch",         "stop_error",
      "init_scale",     "train_per_class", "test_per_class", "eta",
      "transfer_sigma", "verify_iters",   "mc_trials",     "finetune_steps",
      "seed",           "out_dir"};
  static constexpr const char* known_topology[] = {"n_inputs", "hidden",
                                                   "n_outputs", "pair_budget"};
  auto reject_unknown = [](const ordered_json& obj, std::span<const char* const> keys,
                           const char* where) {
    for (const auto& item : obj.items()) {
      if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
            return item.key() == k;
          }) == keys.end()) {
        throw ConfigError(std::string("config: unknown ") + where + " key \"" +
                          item.key() + "\"");
      }
    }
  };
  reject_unknown(j, known, "config");
  if (j.contains("topology") && j["topology"].is_object()) {
    reject_unknown(j["topology"], known_topology, "topology");
  }
  ExperimentConfig c;
  try {
    // Every field is optional; absent ones keep their defaults.
    if (j.contains("oxide")) {
      c.oxide = oxide_kind_from_string(j["oxide"].get<std::string>());
    }
    if (j.contains("device_sigma")) {
      c.device_sigma = j["device_sigma"].get<double>();
    }
    if (j.contains("curve_points")) {
      c.curve_points = j["curve_points"].get<int>();
    }
    if (j.contains("topology")) {
      const ordered_json& t = j["topology"];
      if (t.contains("n_inputs")) c.topology.n_inputs = t["n_inputs"].get<int>();
      if (t.contains("hidden")) {
        c.topology.hidden = t["hidden"].get<std::vector<int>>();
      }
      if (t.contains("n_outputs")) {
        c.topology.n_outputs = t["n_outputs"].get<int>();
      }
      if (t.contains("pair_budget")) {
        c.topology.pair_budget = t["pair_budget"].get<int>();
      }
    }
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("max_steps")) c.max_steps = j["max_steps"].get<int>();
    if (j.contains("batch")) {
      c.batch = batch_mode_from_string(j["batch"].get<std::string>());
    }
    if (j.contains("stop_error")) c.stop_error = j["stop_error"].get<double>();
    if (j.contains("init_scale")) c.init_scale = j["init_scale"].get<double>();
    if (j.contains("train_per_class")) {
      c.train_per_class = j["train_per_class"].get<int>();
    }
    if (j.contains("test_per_class")) {
      c.test_per_class = j["test_per_class"].get<int>();
    }
    if (j.contains("eta")) c.eta = j["eta"].get<double>();
    if (j.contains("transfer_sigma")) {
      c.transfer_sigma = j["transfer_sigma"].get<double>();
    }
    if (j.contains("verify_iters")) {
      c.verify_iters = j["verify_iters"].get<int>();
    }
    if (j.contains("mc_trials")) c.mc_trials = j["mc_trials"].get<int>();
    if (j.contains("finetune_steps")) {
      c.finetune_steps = j["finetune_steps"].get<int>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) {
      c.out_dir = j["out_dir"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

std::filesystem::path ExperimentConfig::resolved_out_dir() const {
  if (!out_dir.empty()) {
    return out_dir;
  }
  if (const char* env = std::getenv(kOutDirEnv); env && *env) {
    return env;
  }
  return ".";
}

std::string EvalMetrics::to_json() const {
  ordered_json j;
  j["format"] = "memsim-metrics";
  j["samples"] = samples;
  j["accuracy"] = accuracy;
  j["confusion"] = {{"concave_as_concave", concave_as_concave},
                    {"concave_as_convex", concave_as_convex},
                    {"convex_as_concave", convex_as_concave},
                    {"convex_as_convex", convex_as_convex}};
  j["mean_abs_margin"] = mean_abs_margin;
  return j.dump(2);
}

EvalMetrics evaluate(const Perceptron& net, const Dataset& data) {
  if (data.empty()) {
    throw InvalidArgument("evaluate: empty dataset");
  }
  if (net.topology.n_outputs != 1) {
    throw InvalidArgument("evaluate: needs a single-output network");
  }
  EvalMetrics m;
  m.samples = static_cast<int>(data.size());
  double margin_sum = 0.0;
  int correct = 0;
  for (const Sample& s : data) {
    Sample scaled = scale_for_input(s);
    double y = forward(net, scaled.x).outputs()[0];
    margin_sum += std::abs(y);
    Label predicted = y >= 0.0 ? Label::Concave : Label::Convex;
    if (s.label == Label::Concave) {
      (predicted == Label::Concave ? m.concave_as_concave
                                   : m.concave_as_convex)++;
    } else {
      (predicted == Label::Concave ? m.convex_as_concave
                                   : m.convex_as_convex)++;
    }
    if (predicted == s.label) {
      ++correct;
    }
  }
  m.accuracy = static_cast<double>(correct) / m.samples;
  m.mean_abs_margin = margin_sum / m.samples;
  return m;
}

namespace {

DeviceArray build_array(const ExperimentConfig& config) {
  Rng rng = tagged_rng(config.seed, "synth");
  return synth_array(OxideProfile::defaults(config.oxide),
                     config.topology.pair_budget, config.device_sigma, rng,
                     config.curve_points);
}

// The saved bank when one exists, else the same bank cmd_synth would write;
// either way the bytes that follow are identical.
DeviceArray load_or_build_array(const ExperimentConfig& config) {
  std::filesystem::path manifest = config.resolved_out_dir() / "array.json";
  if (std::filesystem::exists(manifest)) {
    DeviceArray array = load_array(config.resolved_out_dir());
    if (array.oxide != config.oxide) {
      throw ConfigError("config: stored array oxide differs from config");
    }
    return array;
  }
  return build_array(config);
}

double training_clamp(const DeviceArray& array) {
  return std::min(1.0, array.min_weight_bound());
}

TrainConfig build_train_config(const ExperimentConfig& config,
                               const DeviceArray& array) {
  TrainConfig tc;
  tc.epsilon = config.epsilon;
  tc.max_steps = config.max_steps;
  tc.clamp = training_clamp(array);
  tc.batch = config.batch;
  tc.seed = derive_seed(config.seed, "train/shuffle");
  tc.stop_error = config.stop_error;
  return tc;
}

DeviceArray with_pulse_sigma(DeviceArray array, double sigma) {
  if (sigma < 0.0) {
    return array;
  }
  for (ComplementaryPair& pair : array.pairs) {
    for (DeviceState* dev : {&pair.upper, &pair.lower}) {
      OxideProfile p = dev->profile();
      p.sigma_pulse = sigma;
      DeviceState replaced(p, dev->curve());
      replaced.set_resistance(dev->resistance());
      *dev = std::move(replaced);
    }
  }
  return array;
}

}  // namespace

DeviceArray cmd_synth(const ExperimentConfig& config) {
  config.validate();
  DeviceArray array = build_array(config);
  save_array(array, config.resolved_out_dir());
  return array;
}

TrainOutcome cmd_train(const ExperimentConfig& config) {
  config.validate();
  DeviceArray array = load_or_build_array(config);
  Rng data_rng = tagged_rng(config.seed, "dataset/train");
  Dataset train_set = generate(config.train_per_class, config.eta, data_rng);
  Rng init_rng = tagged_rng(config.seed, "train/init");
  Perceptron net0 = init_random(config.topology, init_rng, config.init_scale);
  TrainResult result =
      train(net0, to_train_set(train_set), build_train_config(config, array));

  std::filesystem::path dir = config.resolved_out_dir();
  save_network(result.net, dir / "network.json");
  result.history.save_csv(dir / "history.csv");
  save_dataset(train_set, dir / "train.csv");
  return {std::move(result.net), std::move(result.history),
          std::move(train_set)};
}

TransferOutcome cmd_transfer(const ExperimentConfig& config,
                             const std::filesystem::path& network_file) {
  config.validate();
  std::filesystem::path dir = config.resolved_out_dir();
  Perceptron net = load_network(
      network_file.empty() ? dir / "network.json" : network_file);
  DeviceArray pristine =
      with_pulse_sigma(load_or_build_array(config), config.transfer_sigma);
  Rng eval_rng = tagged_rng(config.seed, "dataset/eval");
  Dataset eval_set = generate(config.test_per_class, config.eta, eval_rng);

  TransferOutcome outcome;
  DeviceArray main_array = pristine;
  Rng main_rng = tagged_rng(config.seed, "transfer/main");
  outcome.main = transfer(net, main_array, main_rng, config.verify_iters);
  outcome.software_eval = evaluate(net, eval_set);
  outcome.device_eval = evaluate(outcome.main.net, eval_set);

  save_network(outcome.main.net, dir / "device_network.json");
  outcome.main.plan.save_json(dir / "program_plan.json");
  outcome.main.audit.save_csv(dir / "pulse_audit.csv");

  if (config.finetune_steps > 0) {
    Rng data_rng = tagged_rng(config.seed, "dataset/train");
    Dataset train_set =
        generate(config.train_per_class, config.eta, data_rng);
    TrainConfig tc = build_train_config(config, pristine);
    tc.max_steps = config.finetune_steps;
    Rng ft_rng = tagged_rng(config.seed, "transfer/finetune");
    TrainResult ft = finetune_on_device(outcome.main.net,
                                        to_train_set(train_set), tc, ft_rng);
    save_network(ft.net, dir / "finetuned_network.json");
    ft.history.save_csv(dir / "finetune_history.csv");
  }

  if (config.mc_trials > 0) {
    std::string csv = "trial,accuracy,drop_points\n";
    outcome.trial_accuracy.reserve(static_cast<std::size_t>(config.mc_trials));
    for (int t = 0; t < config.mc_trials; ++t) {
      DeviceArray trial_array = pristine;
      Rng trial_rng =
          tagged_rng(config.seed, "transfer/trial/" + std::to_string(t));
      TransferResult r =
          transfer(net, trial_array, trial_rng, config.verify_iters);
      double acc = evaluate(r.net, eval_set).accuracy;
      outcome.trial_accuracy.push_back(acc);
      csv += std::to_string(t);
      csv += ',';
      csv += io::format_double(acc);
      csv += ',';
      csv += io::format_double(100.0 * (outcome.software_eval.accuracy - acc));
      csv += '\n';
    }
    io::atomic_write(dir / "transfer_accuracy.csv", csv);
  }
  return outcome;
}

EvalMetrics cmd_eval(const ExperimentConfig& config,
                     const std::filesystem::path& network_file,
                     const std::filesystem::path& dataset_file) {
  config.validate();
  std::filesystem::path dir = config.resolved_out_dir();
  Perceptron net = load_network(
      network_file.empty() ? dir / "network.json" : network_file);
  Dataset data;
  if (dataset_file.empty()) {
    Rng rng = tagged_rng(config.seed, "dataset/test");
    data = generate(config.test_per_class, config.eta, rng);
  } else {
    data = load_dataset(dataset_file);
  }
  EvalMetrics metrics = evaluate(net, data);
  io::atomic_write(dir / "metrics.json", metrics.to_json() + "\n");
  return metrics;
}

namespace {

SweepRow run_sweep_trial(const ExperimentConfig& config, int t) {
  std::uint64_t trial_seed =
      derive_seed(config.seed, "sweep/trial/" + std::to_string(t));
  Rng synth_rng = tagged_rng(trial_seed, "synth");
  DeviceArray array =
      synth_array(OxideProfile::defaults(config.oxide),
                  config.topology.pair_budget, config.device_sigma, synth_rng,
                  config.curve_points);
  DeviceArray programmed =
      with_pulse_sigma(array, config.transfer_sigma);

  Rng data_rng = tagged_rng(trial_seed, "dataset/train");
  Dataset train_set = generate(config.train_per_class, config.eta, data_rng);
  Rng init_rng = tagged_rng(trial_seed, "train/init");
  Perceptron net0 = init_random(config.topology, init_rng, config.init_scale);
  ExperimentConfig seeded = config;
  seeded.seed = trial_seed;
  TrainResult trained =
      train(net0, to_train_set(train_set), build_train_config(seeded, array));

  Rng eval_rng = tagged_rng(trial_seed, "dataset/eval");
  Dataset eval_set = generate(config.test_per_class, config.eta, eval_rng);
  Rng transfer_rng = tagged_rng(trial_seed, "transfer/main");
  TransferResult moved =
      transfer(trained.net, programmed, transfer_rng, config.verify_iters);

  SweepRow row;
  row.trial = t;
  row.steps = trained.history.entries.back().step;
  row.final_normalized_error =
      trained.history.entries.back().normalized_error;
  row.software_accuracy = evaluate(trained.net, eval_set).accuracy;
  row.device_accuracy = evaluate(moved.net, eval_set).accuracy;
  row.drop_points = 100.0 * (row.software_accuracy - row.device_accuracy);
  return row;
}

}  // namespace

std::vector<SweepRow> cmd_sweep(const ExperimentConfig& config) {
  config.validate();
  int trials = config.mc_trials;
  std::vector<SweepRow> rows(static_cast<std::size_t>(trials));

  if (trials > 0) {
    unsigned workers = std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(trials));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto drain = [&] {
      for (;;) {
        int t = next.fetch_add(1);
        if (t >= trials) {
          return;
        }
        try {
          rows[static_cast<std::size_t>(t)] = run_sweep_trial(config, t);
        } catch (...) {
          std::lock_guard<std::mutex> hold(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next.store(trials);
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back(drain);
    }
    for (std::thread& th : pool) {
      th.join();
    }
    if (failure) {
      std::rethrow_exception(failure);
    }
  }

  std::string csv =
      "trial,steps,final_normalized_error,software_accuracy,device_accuracy,"
      "drop_points\n";
  for (const SweepRow& r : rows) {
    csv += std::to_string(r.trial);
    csv += ',';
    csv += std::to_string(r.steps);
    csv += ',';
    csv += io::format_double(r.final_normalized_error);
    csv += ',';
    csv += io::format_double(r.software_accuracy);
    csv += ',';
    csv += io::format_double(r.device_accuracy);
    csv += ',';
    csv += io::format_double(r.drop_points);
    csv += '\n';
  }
  io::atomic_write(config.resolved_out_dir() / "sweep.csv", csv);
  return rows;
}

}  // namespace memsim

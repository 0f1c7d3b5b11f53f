#ifndef ZSML_EXPERIMENT_HPP
#define ZSML_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "zsml/metrics.hpp"
#include "zsml/synth.hpp"
#include "zsml/zsl.hpp"

namespace zsml {

// A full train -> predict -> (self-train) -> decode -> evaluate run,
// resolved from a JSON config. Unknown config keys are rejected.
struct ExperimentConfig {
  std::string embeddings_path;
  std::string source_path;
  std::string target_path;
  std::string out_dir;
  RegressorKind regressor = RegressorKind::joint;
  TrainConfig train;
  Scalar ridge_penalty = 1e-4;
  ZslMethod method = ZslMethod::dmp;
  int k_graph = kDefaultGraphK;
  int k_selftrain = kDefaultSelfTrainK;
  bool selftrain = true;
  Scalar threshold = kDefaultThreshold;
  DistanceKind distance = DistanceKind::cosine;
  SigmaConvention sigma = SigmaConvention::median_sq;
  std::uint64_t seed = 0;

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

// Accepts either a config file or a manifest written by a previous run
// (the manifest embeds the resolved config under "config").
ExperimentConfig load_experiment_config(const std::string& path);

// FNV-1a over the canonical (sorted-key) JSON form; hex string.
std::string config_hash(const std::string& canonical_json);

struct ExperimentOutcome {
  EvalReport report;
  PredictionResult prediction;
  Matrix y_hat;
  std::string hash;
  std::vector<std::string> outputs;  // files written under out_dir
};

// Writes predictions.csv, scores.csv, yhat.csv, report.json, manifest.json
// into cfg.out_dir. Every artifact embeds the config hash and seed;
// re-running the manifest reproduces the outputs byte for byte.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

// Benchmark comparison config for the `compare` command.
struct CompareConfig {
  SynthConfig synth;
  std::vector<MethodSpec> methods;
  std::vector<bool> selftrain_modes = {true};
  std::vector<std::uint64_t> seeds = {0};
  HarnessOptions harness;
  // Fresh dataset per seed (default) or one dataset shared by all seeds.
  bool regenerate_per_seed = true;
  std::string out = "compare.csv";

  void validate() const;
};

CompareConfig compare_config_from_json(const std::string& text);
std::string compare_config_to_json(const CompareConfig& cfg);
CompareConfig load_compare_config(const std::string& path);

struct CompareOutcome {
  std::vector<BenchRow> rows;
  std::string hash;
  std::vector<std::string> outputs;
};

CompareOutcome run_compare(const CompareConfig& cfg);

// SynthConfig JSON (used by synth-gen and inside compare configs).
SynthConfig synth_config_from_json_text(const std::string& text);
std::string synth_config_to_json(const SynthConfig& cfg);

// Writes embeddings.txt, source.csv, target.csv, manifest.json.
std::vector<std::string> write_synth_dataset(const SynthDataset& data,
                                             const std::string& out_dir);

} // namespace zsml

#endif // ZSML_EXPERIMENT_HPP

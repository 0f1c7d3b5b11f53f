#ifndef ZSML_SYNTH_HPP
#define ZSML_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zsml/dataset.hpp"
#include "zsml/metrics.hpp"
#include "zsml/regression.hpp"
#include "zsml/wordspace.hpp"
#include "zsml/zsl.hpp"

namespace zsml {

// Hidden feature map applied to the label-sum embedding of each instance.
// identity requires feature_dim == dim; linear/relu require
// feature_dim >= dim so the map stays invertible-ish.
enum class MapKind { identity, linear, relu };

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& s);

struct SynthConfig {
  int dim = 16;
  int source_labels = 16;   // disjoint from target labels
  int target_labels = 5;
  int source_instances = 1000;
  int target_instances = 500;
  int feature_dim = 16;
  Scalar multilabel_rate = 0.3;  // probability of >1 label per instance
  // Override for the source split; mirrors benchmarks whose auxiliary set
  // is single-label only. Unset = same as multilabel_rate.
  std::optional<Scalar> multilabel_rate_source;
  Scalar correlation = 0.0;   // pairwise co-occurrence bias, in [0, 1]
  Scalar noise_sigma = 0.0;   // feature noise scale
  Scalar shift = 0.0;         // systematic target-domain feature offset
  MapKind map = MapKind::linear;
  std::uint64_t seed = 0;

  void validate() const;
};

// Instance features are noisy images of their label-sum embeddings under a
// hidden seeded map, so the compositional structure holds by construction
// up to noise. Source and target label sets are disjoint.
struct SynthDataset {
  EmbeddingTable embeddings;  // over the union of both vocabularies
  Dataset source;
  Dataset target;
  SynthConfig provenance;
};

SynthDataset generate(const SynthConfig& cfg);

// One competitor: a regressor kind paired with a prediction algorithm.
// Spelled "<regressor>+<method>", e.g. "joint+dmp", "independent+exdap".
struct MethodSpec {
  RegressorKind regressor = RegressorKind::joint;
  ZslMethod method = ZslMethod::dmp;

  bool operator==(const MethodSpec&) const = default;
};

std::string to_string(const MethodSpec& spec);
MethodSpec method_spec_from_string(const std::string& s);

// The admissible competitor matrix.
const std::vector<MethodSpec>& all_method_specs();

struct HarnessOptions {
  TrainConfig train;             // per-cell seed is derived, not taken from here
  Scalar ridge_penalty = 1e-4;   // independent regressor
  int k_graph = kDefaultGraphK;
  int k_selftrain = kDefaultSelfTrainK;
  Scalar threshold = kDefaultThreshold;
  DistanceKind distance = DistanceKind::cosine;
  SigmaConvention sigma = SigmaConvention::median_sq;
};

struct BenchRow {
  MethodSpec method;
  bool selftrain = false;
  std::uint64_t seed = 0;
  EvalReport report;
};

// Full competitor table on one dataset: trains the designated regressor on
// the source split, predicts target embeddings, applies the prediction
// algorithm with or without the self-training step, and evaluates all four
// metrics. One row per (method, selftrain, seed).
std::vector<BenchRow> run_matrix(const SynthDataset& data,
                                 const std::vector<MethodSpec>& methods,
                                 const std::vector<bool>& selftrain_modes,
                                 const std::vector<std::uint64_t>& seeds,
                                 const HarnessOptions& options = {});

// CSV with columns method,selftrain,seed,hamming,microf1,rankloss,ap.
void save_bench_csv(const std::vector<BenchRow>& rows, const std::string& path,
                    const std::vector<std::string>& comments = {});

} // namespace zsml

#endif // ZSML_SYNTH_HPP

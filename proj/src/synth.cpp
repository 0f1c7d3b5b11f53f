#include "zsml/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "zsml/random.hpp"
#include "zsml/text_format.hpp"

namespace zsml {

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::identity: return "identity";
    case MapKind::linear: return "linear";
    case MapKind::relu: return "relu";
  }
  return "?";
}

MapKind map_kind_from_string(const std::string& s) {
  if (s == "identity") return MapKind::identity;
  if (s == "linear") return MapKind::linear;
  if (s == "relu") return MapKind::relu;
  throw validation_error("unknown map kind '" + s + "'");
}

void SynthConfig::validate() const {
  if (dim < 1) throw validation_error("SynthConfig: dim must be >= 1");
  if (source_labels < 2 || target_labels < 2)
    throw validation_error("SynthConfig: label counts must be >= 2");
  if (source_instances < 1 || target_instances < 1)
    throw validation_error("SynthConfig: instance counts must be >= 1");
  if (feature_dim < 1) throw validation_error("SynthConfig: feature_dim must be >= 1");
  auto in_unit = [](Scalar v) { return v >= 0 && v <= 1; };
  if (!in_unit(multilabel_rate))
    throw validation_error("SynthConfig: multilabel_rate must be in [0, 1]");
  if (multilabel_rate_source && !in_unit(*multilabel_rate_source))
    throw validation_error("SynthConfig: multilabel_rate_source must be in [0, 1]");
  if (!in_unit(correlation))
    throw validation_error(
        "SynthConfig: correlation must be in [0, 1]; the pairwise "
        "co-occurrence structure is infeasible otherwise");
  if (!(noise_sigma >= 0)) throw validation_error("SynthConfig: noise_sigma must be >= 0");
  if (!(shift >= 0)) throw validation_error("SynthConfig: shift must be >= 0");
  if (map == MapKind::identity && feature_dim != dim)
    throw validation_error("SynthConfig: identity map requires feature_dim == dim");
  if (map != MapKind::identity && feature_dim < dim)
    throw validation_error("SynthConfig: feature_dim must be >= dim for an "
                           "invertible-ish map");
}

namespace {

std::vector<std::string> make_labels(const std::string& prefix, int count) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(count));
  const int width = count <= 100 ? 2 : 3;
  for (int i = 0; i < count; ++i) {
    std::ostringstream name;
    name << prefix << std::setw(width) << std::setfill('0') << i;
    labels.push_back(name.str());
  }
  return labels;
}

// Label clusters used by the co-occurrence bias: groups of three (final
// group may be two). Multi-label sets drawn mostly within a group when
// correlation is high.
std::vector<int> make_groups(int m, std::mt19937_64& rng) {
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> group(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) group[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i / 3;
  return group;
}

// Ising-style pairwise bias with rejection: propose uniform subsets, accept
// with probability exp(-sharpness * correlation * (1 - within_group_frac)).
// Capped; the best-scoring proposal wins if none is accepted.
std::vector<int> sample_label_set(int m, Scalar multilabel_rate,
                                  Scalar correlation,
                                  const std::vector<int>& group,
                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_label(0, m - 1);
  if (unit(rng) >= multilabel_rate) return {any_label(rng)};

  int size = 2;
  while (size < m && unit(rng) < Scalar(0.35)) ++size;

  constexpr Scalar sharpness = 4.0;
  constexpr int max_tries = 200;
  std::vector<int> pool(static_cast<std::size_t>(m));
  std::vector<int> best;
  Scalar best_bonus = -1;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::iota(pool.begin(), pool.end(), 0);
    for (int j = 0; j < size; ++j) {
      std::uniform_int_distribution<int> pick(j, m - 1);
      std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> candidate(pool.begin(), pool.begin() + size);
    int same = 0, pairs = 0;
    for (int a = 0; a < size; ++a)
      for (int b = a + 1; b < size; ++b) {
        ++pairs;
        if (group[static_cast<std::size_t>(candidate[static_cast<std::size_t>(a)])] ==
            group[static_cast<std::size_t>(candidate[static_cast<std::size_t>(b)])])
          ++same;
      }
    const Scalar bonus = pairs > 0 ? static_cast<Scalar>(same) / pairs : Scalar(1);
    if (bonus > best_bonus) {
      best_bonus = bonus;
      best = candidate;
    }
    if (unit(rng) < std::exp(-sharpness * correlation * (1 - bonus)))
      return candidate;
  }
  return best;
}

Matrix semi_orthogonal_map(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

struct SplitSpec {
  const std::vector<std::string>& vocabulary;
  int instances;
  Scalar multilabel_rate;
  char id_prefix;
  bool shifted;
};

Dataset generate_split(const SynthConfig& cfg, const SplitSpec& spec,
                       const EmbeddingTable& table, const Matrix& map,
                       const Vector& relu_offset, const Vector& shift_offset,
                       Split split, std::uint64_t master) {
  const int m = static_cast<int>(spec.vocabulary.size());
  const std::string tag = to_string(split);
  auto label_rng = make_engine(master, "labels." + tag);
  auto group_rng = make_engine(master, "groups." + tag);
  auto noise_rng = make_engine(master, "noise." + tag);
  std::normal_distribution<Scalar> gauss(0.0, 1.0);

  const std::vector<int> groups = make_groups(m, group_rng);
  const Matrix embeddings = table.rows_for(spec.vocabulary);

  Dataset ds;
  ds.split = split;
  ds.vocabulary = spec.vocabulary;
  ds.features.resize(spec.instances, cfg.feature_dim);
  ds.labels.setZero(spec.instances, m);

  const int width = spec.instances <= 10000 ? 4 : 6;
  for (int i = 0; i < spec.instances; ++i) {
    std::ostringstream id;
    id << spec.id_prefix << std::setw(width) << std::setfill('0') << i;
    ds.ids.push_back(id.str());

    const std::vector<int> labels = sample_label_set(
        m, spec.multilabel_rate, cfg.correlation, groups, label_rng);
    Vector sum = Vector::Zero(cfg.dim);
    std::vector<int> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    for (int l : sorted) {
      ds.labels(i, l) = 1;
      sum += embeddings.row(l).transpose();
    }

    Vector x;
    switch (cfg.map) {
      case MapKind::identity: x = sum; break;
      case MapKind::linear: x = map * sum; break;
      case MapKind::relu: x = (map * sum + relu_offset).cwiseMax(Scalar(0)); break;
    }
    for (Eigen::Index j = 0; j < x.size(); ++j)
      x(j) += cfg.noise_sigma * gauss(noise_rng);
    if (spec.shifted) x += shift_offset;
    ds.features.row(i) = x.transpose();
  }
  ds.validate();
  return ds;
}

} // namespace

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::uint64_t master = cfg.seed;

  const std::vector<std::string> source_vocab = make_labels("src", cfg.source_labels);
  const std::vector<std::string> target_vocab = make_labels("tgt", cfg.target_labels);

  auto embed_rng = make_engine(master, "embeddings");
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  EmbeddingTable table(cfg.dim);
  auto add_labels = [&](const std::vector<std::string>& vocab) {
    for (const auto& label : vocab) {
      Vector v(cfg.dim);
      for (Eigen::Index j = 0; j < cfg.dim; ++j) v(j) = gauss(embed_rng);
      table.insert(label, std::move(v));
    }
  };
  add_labels(source_vocab);
  add_labels(target_vocab);

  auto map_rng = make_engine(master, "map");
  Matrix map;
  Vector relu_offset = Vector::Zero(cfg.feature_dim);
  if (cfg.map != MapKind::identity) {
    map = semi_orthogonal_map(cfg.feature_dim, cfg.dim, map_rng);
    if (cfg.map == MapKind::relu)
      for (Eigen::Index j = 0; j < cfg.feature_dim; ++j)
        relu_offset(j) = Scalar(0.5) * std::abs(gauss(map_rng));
  }

  auto shift_rng = make_engine(master, "shift");
  Vector shift_offset(cfg.feature_dim);
  for (Eigen::Index j = 0; j < cfg.feature_dim; ++j)
    shift_offset(j) = cfg.shift * gauss(shift_rng);

  SynthDataset data{std::move(table), Dataset{}, Dataset{}, cfg};
  const Scalar source_rate =
      cfg.multilabel_rate_source.value_or(cfg.multilabel_rate);
  data.source = generate_split(
      cfg, {source_vocab, cfg.source_instances, source_rate, 's', false},
      data.embeddings, map, relu_offset, shift_offset, Split::source, master);
  data.target = generate_split(
      cfg,
      {target_vocab, cfg.target_instances, cfg.multilabel_rate, 't', true},
      data.embeddings, map, relu_offset, shift_offset, Split::target, master);
  return data;
}

std::string to_string(const MethodSpec& spec) {
  return to_string(spec.regressor) + "+" + to_string(spec.method);
}

MethodSpec method_spec_from_string(const std::string& s) {
  const auto plus = s.find('+');
  if (plus == std::string::npos)
    throw validation_error("method must be '<regressor>+<algorithm>', got '" +
                           s + "'");
  MethodSpec spec;
  spec.regressor = regressor_kind_from_string(s.substr(0, plus));
  spec.method = zsl_method_from_string(s.substr(plus + 1));
  for (const MethodSpec& allowed : all_method_specs())
    if (allowed == spec) return spec;
  throw validation_error("method '" + s + "' is not in the competitor matrix");
}

const std::vector<MethodSpec>& all_method_specs() {
  static const std::vector<MethodSpec> specs = {
      {RegressorKind::independent, ZslMethod::exdap},
      {RegressorKind::independent, ZslMethod::dmp},
      {RegressorKind::joint, ZslMethod::exdap},
      {RegressorKind::joint, ZslMethod::dmp},
      {RegressorKind::joint, ZslMethod::tramp},
  };
  return specs;
}

std::vector<BenchRow> run_matrix(const SynthDataset& data,
                                 const std::vector<MethodSpec>& methods,
                                 const std::vector<bool>& selftrain_modes,
                                 const std::vector<std::uint64_t>& seeds,
                                 const HarnessOptions& options) {
  if (methods.empty()) throw validation_error("run_matrix: no methods");
  if (selftrain_modes.empty()) throw validation_error("run_matrix: no selftrain modes");
  if (seeds.empty()) throw validation_error("run_matrix: no seeds");
  for (const MethodSpec& m : methods)
    method_spec_from_string(to_string(m));  // rejects combos outside the matrix

  const Matrix source_targets = synthesize_targets(
      data.embeddings, data.source.vocabulary, data.source.labels);
  const PrototypeSet base_prototypes =
      build_power_set(data.embeddings, data.target.vocabulary);
  const Matrix target_label_vectors =
      data.embeddings.rows_for(data.target.vocabulary);

  // The trained regressor and its target predictions depend only on
  // (kind, seed); share them across cells.
  std::map<std::pair<int, std::uint64_t>, Matrix> predictions;
  auto predicted = [&](RegressorKind kind, std::uint64_t seed) -> const Matrix& {
    const auto key = std::make_pair(static_cast<int>(kind), seed);
    auto it = predictions.find(key);
    if (it != predictions.end()) return it->second;
    RegressionModel model;
    if (kind == RegressorKind::joint) {
      TrainConfig cfg = options.train;
      cfg.seed = derive_seed(seed, "train.joint");
      model = train_joint(data.source.features, source_targets, cfg);
    } else {
      model = train_independent(data.source.features, source_targets,
                                options.ridge_penalty);
    }
    return predictions
        .emplace(key, predict(model, data.target.features))
        .first->second;
  };

  GraphOptions graph_options{options.k_graph, options.distance, options.sigma};

  std::vector<BenchRow> rows;
  for (const MethodSpec& method : methods)
    for (bool selftrain : selftrain_modes)
      for (std::uint64_t seed : seeds) {
        const Matrix& y_hat = predicted(method.regressor, seed);

        PredictionResult result;
        if (method.method == ZslMethod::exdap) {
          result = exdap_predict(y_hat, target_label_vectors, options.threshold);
        } else {
          PrototypeSet prototypes = base_prototypes;
          if (selftrain)
            prototypes =
                self_train_prototypes(prototypes, y_hat, options.k_selftrain);
          if (method.method == ZslMethod::dmp) {
            result = dmp_predict(y_hat, prototypes);
          } else {
            const KnnGraph graph =
                build_knn_graph(y_hat, prototypes, graph_options);
            result = tramp_predict(graph, prototypes.label_matrix,
                                   options.threshold);
          }
        }

        BenchRow row;
        row.method = method;
        row.selftrain = selftrain;
        row.seed = seed;
        row.report =
            evaluate_all(result.binary, result.scores, data.target.labels);
        rows.push_back(std::move(row));
      }
  return rows;
}

void save_bench_csv(const std::vector<BenchRow>& rows, const std::string& path,
                    const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write benchmark file: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "method,selftrain,seed,hamming,microf1,rankloss,ap\n";
  for (const BenchRow& row : rows) {
    out << to_string(row.method) << "," << (row.selftrain ? "on" : "off") << ","
        << row.seed << "," << format_double(row.report.hamming_loss) << ","
        << format_double(row.report.micro_f1) << ","
        << format_double(row.report.ranking_loss) << ","
        << format_double(row.report.average_precision) << "\n";
  }
}

} // namespace zsml

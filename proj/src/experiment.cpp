#include "zsml/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "zsml/random.hpp"
#include "zsml/text_format.hpp"

namespace zsml {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(what + ": invalid JSON: " + e.what());
  }
}

void reject_unknown_keys(const json& j, const std::string& context,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw validation_error(context + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw validation_error(context + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw validation_error(std::string("config: bad value for '") + key + "'");
  }
}

void read_string_enum(const json& j, const char* key, std::string& out) {
  read_field(j, key, out);
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown_keys(j, "train config",
                      {"hidden_units", "learning_rate", "epochs", "batch_size",
                       "l2_penalty"});
  TrainConfig cfg;
  read_field(j, "hidden_units", cfg.hidden_units);
  read_field(j, "learning_rate", cfg.learning_rate);
  read_field(j, "epochs", cfg.epochs);
  read_field(j, "batch_size", cfg.batch_size);
  read_field(j, "l2_penalty", cfg.l2_penalty);
  cfg.validate();
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"hidden_units", cfg.hidden_units},
              {"learning_rate", cfg.learning_rate},
              {"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"l2_penalty", cfg.l2_penalty}};
}

SynthConfig synth_config_from_json(const json& j) {
  reject_unknown_keys(
      j, "synth config",
      {"dim", "source_labels", "target_labels", "source_instances",
       "target_instances", "feature_dim", "multilabel_rate",
       "multilabel_rate_source", "correlation", "noise_sigma", "shift", "map",
       "seed"});
  SynthConfig cfg;
  read_field(j, "dim", cfg.dim);
  read_field(j, "source_labels", cfg.source_labels);
  read_field(j, "target_labels", cfg.target_labels);
  read_field(j, "source_instances", cfg.source_instances);
  read_field(j, "target_instances", cfg.target_instances);
  read_field(j, "feature_dim", cfg.feature_dim);
  read_field(j, "multilabel_rate", cfg.multilabel_rate);
  if (j.contains("multilabel_rate_source")) {
    Scalar rate = 0;
    read_field(j, "multilabel_rate_source", rate);
    cfg.multilabel_rate_source = rate;
  }
  read_field(j, "correlation", cfg.correlation);
  read_field(j, "noise_sigma", cfg.noise_sigma);
  read_field(j, "shift", cfg.shift);
  if (j.contains("map")) {
    std::string map;
    read_string_enum(j, "map", map);
    cfg.map = map_kind_from_string(map);
  }
  read_field(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

json synth_config_to_json_obj(const SynthConfig& cfg) {
  json j{{"dim", cfg.dim},
         {"source_labels", cfg.source_labels},
         {"target_labels", cfg.target_labels},
         {"source_instances", cfg.source_instances},
         {"target_instances", cfg.target_instances},
         {"feature_dim", cfg.feature_dim},
         {"multilabel_rate", cfg.multilabel_rate},
         {"correlation", cfg.correlation},
         {"noise_sigma", cfg.noise_sigma},
         {"shift", cfg.shift},
         {"map", to_string(cfg.map)},
         {"seed", cfg.seed}};
  if (cfg.multilabel_rate_source)
    j["multilabel_rate_source"] = *cfg.multilabel_rate_source;
  return j;
}

json experiment_config_to_json_obj(const ExperimentConfig& cfg) {
  return json{{"embeddings", cfg.embeddings_path},
              {"source", cfg.source_path},
              {"target", cfg.target_path},
              {"out_dir", cfg.out_dir},
              {"regressor", to_string(cfg.regressor)},
              {"train", train_config_to_json(cfg.train)},
              {"ridge_penalty", cfg.ridge_penalty},
              {"method", to_string(cfg.method)},
              {"k_graph", cfg.k_graph},
              {"k_selftrain", cfg.k_selftrain},
              {"selftrain", cfg.selftrain},
              {"threshold", cfg.threshold},
              {"distance", to_string(cfg.distance)},
              {"sigma_convention", to_string(cfg.sigma)},
              {"seed", cfg.seed}};
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + what + ": " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write file: " + path);
  out << content;
}

} // namespace

void ExperimentConfig::validate() const {
  if (embeddings_path.empty() || source_path.empty() || target_path.empty())
    throw validation_error("config: embeddings, source and target paths are required");
  if (out_dir.empty()) throw validation_error("config: out_dir is required");
  train.validate();
  if (!(ridge_penalty >= 0)) throw validation_error("config: ridge_penalty must be >= 0");
  if (k_graph < 1) throw validation_error("config: k_graph must be >= 1");
  if (k_selftrain < 1) throw validation_error("config: k_selftrain must be >= 1");
  if (!(threshold >= 0 && threshold <= 1))
    throw validation_error("config: threshold must be in [0, 1]");
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  json j = parse_json(text, "config");
  reject_unknown_keys(j, "config",
                      {"embeddings", "source", "target", "out_dir", "regressor",
                       "train", "ridge_penalty", "method", "k_graph",
                       "k_selftrain", "selftrain", "threshold", "distance",
                       "sigma_convention", "seed"});
  ExperimentConfig cfg;
  read_field(j, "embeddings", cfg.embeddings_path);
  read_field(j, "source", cfg.source_path);
  read_field(j, "target", cfg.target_path);
  read_field(j, "out_dir", cfg.out_dir);
  if (j.contains("regressor")) {
    std::string s;
    read_string_enum(j, "regressor", s);
    cfg.regressor = regressor_kind_from_string(s);
  }
  if (j.contains("train")) cfg.train = train_config_from_json(j.at("train"));
  read_field(j, "ridge_penalty", cfg.ridge_penalty);
  if (j.contains("method")) {
    std::string s;
    read_string_enum(j, "method", s);
    cfg.method = zsl_method_from_string(s);
  }
  read_field(j, "k_graph", cfg.k_graph);
  read_field(j, "k_selftrain", cfg.k_selftrain);
  read_field(j, "selftrain", cfg.selftrain);
  read_field(j, "threshold", cfg.threshold);
  if (j.contains("distance")) {
    std::string s;
    read_string_enum(j, "distance", s);
    cfg.distance = distance_kind_from_string(s);
  }
  if (j.contains("sigma_convention")) {
    std::string s;
    read_string_enum(j, "sigma_convention", s);
    cfg.sigma = sigma_convention_from_string(s);
  }
  read_field(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  return experiment_config_to_json_obj(cfg).dump(2);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  json j = parse_json(read_file(path, "config file"), "config");
  if (j.is_object() && j.contains("config"))
    return experiment_config_from_json(j.at("config").dump());
  return experiment_config_from_json(j.dump());
}

std::string config_hash(const std::string& canonical_json) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_json)));
  return buf;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!std::filesystem::exists(cfg.embeddings_path))
    throw validation_error("embeddings file does not exist: " + cfg.embeddings_path);
  if (!std::filesystem::exists(cfg.source_path))
    throw validation_error("source dataset does not exist: " + cfg.source_path);
  if (!std::filesystem::exists(cfg.target_path))
    throw validation_error("target dataset does not exist: " + cfg.target_path);

  const Dataset source = load_dataset(cfg.source_path, Split::source);
  const Dataset target = load_dataset(cfg.target_path, Split::target);
  for (const auto& label : target.vocabulary)
    if (std::find(source.vocabulary.begin(), source.vocabulary.end(), label) !=
        source.vocabulary.end())
      throw validation_error("source and target vocabularies overlap on '" +
                             label + "'");
  if (source.feature_dim() != target.feature_dim())
    throw validation_error("source/target feature dimensionality mismatch");

  std::vector<std::string> vocabulary = source.vocabulary;
  vocabulary.insert(vocabulary.end(), target.vocabulary.begin(),
                    target.vocabulary.end());
  const EmbeddingTable table = load_embeddings(cfg.embeddings_path, vocabulary);

  const std::string canonical = experiment_config_to_json_obj(cfg).dump();
  ExperimentOutcome outcome;
  outcome.hash = config_hash(canonical);

  const Matrix source_targets =
      synthesize_targets(table, source.vocabulary, source.labels);
  RegressionModel model;
  if (cfg.regressor == RegressorKind::joint) {
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = derive_seed(cfg.seed, "train.joint");
    model = train_joint(source.features, source_targets, train_cfg);
  } else {
    model = train_independent(source.features, source_targets, cfg.ridge_penalty);
  }
  outcome.y_hat = predict(model, target.features);

  if (cfg.method == ZslMethod::exdap) {
    outcome.prediction = exdap_predict(
        outcome.y_hat, table.rows_for(target.vocabulary), cfg.threshold);
  } else {
    PrototypeSet prototypes = build_power_set(table, target.vocabulary);
    if (cfg.selftrain)
      prototypes =
          self_train_prototypes(prototypes, outcome.y_hat, cfg.k_selftrain);
    if (cfg.method == ZslMethod::dmp) {
      outcome.prediction = dmp_predict(outcome.y_hat, prototypes);
    } else {
      const KnnGraph graph = build_knn_graph(
          outcome.y_hat, prototypes, {cfg.k_graph, cfg.distance, cfg.sigma});
      outcome.prediction =
          tramp_predict(graph, prototypes.label_matrix, cfg.threshold);
    }
  }
  outcome.report = evaluate_all(outcome.prediction.binary,
                                outcome.prediction.scores, target.labels);

  std::filesystem::create_directories(cfg.out_dir);
  const std::vector<std::string> stamp = {
      "config_hash=" + outcome.hash + " seed=" + std::to_string(cfg.seed)};
  auto out_path = [&](const char* name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };

  save_label_csv(target.ids, outcome.prediction.binary, target.vocabulary,
                 out_path("predictions.csv"), stamp);
  save_score_csv(target.ids, outcome.prediction.scores, target.vocabulary,
                 out_path("scores.csv"), stamp);
  save_embedding_csv(target.ids, outcome.y_hat, out_path("yhat.csv"), stamp);

  json report_json = json::parse(outcome.report.to_json());
  report_json["config_hash"] = outcome.hash;
  report_json["seed"] = cfg.seed;
  report_json["method"] = to_string(cfg.method);
  report_json["regressor"] = to_string(cfg.regressor);
  report_json["selftrain"] = cfg.selftrain;
  if (!outcome.prediction.diagnostics.empty())
    report_json["diagnostics"] = outcome.prediction.diagnostics;
  write_file(out_path("report.json"), report_json.dump(2) + "\n");

  json manifest{{"config", json::parse(experiment_config_to_json(cfg))},
                {"config_hash", outcome.hash},
                {"seed", cfg.seed},
                {"outputs", {"predictions.csv", "scores.csv", "yhat.csv",
                             "report.json"}}};
  write_file(out_path("manifest.json"), manifest.dump(2) + "\n");

  outcome.outputs = {out_path("predictions.csv"), out_path("scores.csv"),
                     out_path("yhat.csv"), out_path("report.json"),
                     out_path("manifest.json")};
  return outcome;
}

void CompareConfig::validate() const {
  synth.validate();
  if (methods.empty()) throw validation_error("compare config: no methods");
  if (selftrain_modes.empty())
    throw validation_error("compare config: no selftrain modes");
  if (seeds.empty()) throw validation_error("compare config: no seeds");
  if (out.empty()) throw validation_error("compare config: out path required");
  harness.train.validate();
}

namespace {

CompareConfig compare_config_from_json_obj(const json& j) {
  reject_unknown_keys(j, "compare config",
                      {"synth", "methods", "selftrain", "seeds", "train",
                       "ridge_penalty", "k_graph", "k_selftrain", "threshold",
                       "distance", "sigma_convention", "regenerate_per_seed",
                       "out"});
  CompareConfig cfg;
  if (!j.contains("synth"))
    throw validation_error("compare config: 'synth' block is required");
  cfg.synth = synth_config_from_json(j.at("synth"));

  if (!j.contains("methods"))
    throw validation_error("compare config: 'methods' list is required");
  cfg.methods.clear();
  for (const auto& item : j.at("methods"))
    cfg.methods.push_back(method_spec_from_string(item.get<std::string>()));

  if (j.contains("selftrain")) {
    cfg.selftrain_modes.clear();
    const json& st = j.at("selftrain");
    auto parse_mode = [](const std::string& s) {
      if (s == "on") return true;
      if (s == "off") return false;
      throw validation_error("compare config: selftrain entries must be 'on' or 'off'");
    };
    if (st.is_string()) {
      cfg.selftrain_modes.push_back(parse_mode(st.get<std::string>()));
    } else if (st.is_array()) {
      for (const auto& item : st)
        cfg.selftrain_modes.push_back(parse_mode(item.get<std::string>()));
    } else {
      throw validation_error("compare config: 'selftrain' must be a string or list");
    }
  }

  if (j.contains("seeds")) {
    cfg.seeds.clear();
    const json& seeds = j.at("seeds");
    if (seeds.is_number_unsigned() || seeds.is_number_integer()) {
      const auto count = seeds.get<long long>();
      if (count < 1) throw validation_error("compare config: seed count must be >= 1");
      for (long long s = 0; s < count; ++s)
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    } else if (seeds.is_array()) {
      for (const auto& item : seeds)
        cfg.seeds.push_back(item.get<std::uint64_t>());
    } else {
      throw validation_error("compare config: 'seeds' must be a count or list");
    }
  }

  if (j.contains("train"))
    cfg.harness.train = train_config_from_json(j.at("train"));
  read_field(j, "ridge_penalty", cfg.harness.ridge_penalty);
  read_field(j, "k_graph", cfg.harness.k_graph);
  read_field(j, "k_selftrain", cfg.harness.k_selftrain);
  read_field(j, "threshold", cfg.harness.threshold);
  if (j.contains("distance")) {
    std::string s;
    read_string_enum(j, "distance", s);
    cfg.harness.distance = distance_kind_from_string(s);
  }
  if (j.contains("sigma_convention")) {
    std::string s;
    read_string_enum(j, "sigma_convention", s);
    cfg.harness.sigma = sigma_convention_from_string(s);
  }
  read_field(j, "regenerate_per_seed", cfg.regenerate_per_seed);
  read_field(j, "out", cfg.out);
  cfg.validate();
  return cfg;
}

json compare_config_to_json_obj(const CompareConfig& cfg) {
  json methods = json::array();
  for (const MethodSpec& m : cfg.methods) methods.push_back(to_string(m));
  json modes = json::array();
  for (bool mode : cfg.selftrain_modes) modes.push_back(mode ? "on" : "off");
  json seeds = json::array();
  for (std::uint64_t s : cfg.seeds) seeds.push_back(s);
  return json{{"synth", synth_config_to_json_obj(cfg.synth)},
              {"methods", methods},
              {"selftrain", modes},
              {"seeds", seeds},
              {"train", train_config_to_json(cfg.harness.train)},
              {"ridge_penalty", cfg.harness.ridge_penalty},
              {"k_graph", cfg.harness.k_graph},
              {"k_selftrain", cfg.harness.k_selftrain},
              {"threshold", cfg.harness.threshold},
              {"distance", to_string(cfg.harness.distance)},
              {"sigma_convention", to_string(cfg.harness.sigma)},
              {"regenerate_per_seed", cfg.regenerate_per_seed},
              {"out", cfg.out}};
}

} // namespace

CompareConfig compare_config_from_json(const std::string& text) {
  return compare_config_from_json_obj(parse_json(text, "compare config"));
}

std::string compare_config_to_json(const CompareConfig& cfg) {
  return compare_config_to_json_obj(cfg).dump(2);
}

CompareConfig load_compare_config(const std::string& path) {
  json j = parse_json(read_file(path, "compare config"), "compare config");
  if (j.is_object() && j.contains("config"))
    return compare_config_from_json_obj(j.at("config"));
  return compare_config_from_json_obj(j);
}

CompareOutcome run_compare(const CompareConfig& cfg) {
  cfg.validate();
  CompareOutcome outcome;
  outcome.hash = config_hash(compare_config_to_json_obj(cfg).dump());

  if (cfg.regenerate_per_seed) {
    std::vector<std::vector<BenchRow>> per_seed;
    for (std::uint64_t seed : cfg.seeds) {
      SynthConfig synth = cfg.synth;
      synth.seed = derive_seed(seed, "compare.data");
      const SynthDataset data = generate(synth);
      per_seed.push_back(
          run_matrix(data, cfg.methods, cfg.selftrain_modes, {seed}, cfg.harness));
    }
    // Reassemble in run_matrix's method -> selftrain -> seed nesting.
    const std::size_t cells = cfg.methods.size() * cfg.selftrain_modes.size();
    for (std::size_t cell = 0; cell < cells; ++cell)
      for (const auto& rows : per_seed) outcome.rows.push_back(rows[cell]);
  } else {
    const SynthDataset data = generate(cfg.synth);
    outcome.rows =
        run_matrix(data, cfg.methods, cfg.selftrain_modes, cfg.seeds, cfg.harness);
  }

  const std::vector<std::string> stamp = {"config_hash=" + outcome.hash};
  save_bench_csv(outcome.rows, cfg.out, stamp);

  const std::string manifest_path = cfg.out + ".manifest.json";
  json manifest{{"config", json::parse(compare_config_to_json(cfg))},
                {"config_hash", outcome.hash},
                {"outputs", {cfg.out}}};
  write_file(manifest_path, manifest.dump(2) + "\n");

  outcome.outputs = {cfg.out, manifest_path};
  return outcome;
}

SynthConfig synth_config_from_json_text(const std::string& text) {
  return synth_config_from_json(parse_json(text, "synth config"));
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  return synth_config_to_json_obj(cfg).dump(2);
}

std::vector<std::string> write_synth_dataset(const SynthDataset& data,
                                             const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string canonical = synth_config_to_json_obj(data.provenance).dump();
  const std::string hash = config_hash(canonical);
  const std::vector<std::string> stamp = {
      "config_hash=" + hash +
      " seed=" + std::to_string(data.provenance.seed)};
  auto out_path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };

  save_embeddings(data.embeddings, out_path("embeddings.txt"), stamp);
  save_dataset(data.source, out_path("source.csv"), stamp);
  save_dataset(data.target, out_path("target.csv"), stamp);

  json manifest{{"config", json::parse(synth_config_to_json(data.provenance))},
                {"config_hash", hash},
                {"seed", data.provenance.seed},
                {"outputs", {"embeddings.txt", "source.csv", "target.csv"}}};
  write_file(out_path("manifest.json"), manifest.dump(2) + "\n");

  return {out_path("embeddings.txt"), out_path("source.csv"),
          out_path("target.csv"), out_path("manifest.json")};
}

} // namespace zsml

#include "zsml/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "zsml/dataset.hpp"
#include "zsml/experiment.hpp"
#include "zsml/metrics.hpp"
#include "zsml/random.hpp"
#include "zsml/regression.hpp"
#include "zsml/synth.hpp"
#include "zsml/wordspace.hpp"
#include "zsml/zsl.hpp"

namespace zsml::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_synth_gen(const std::string& config_path, const std::string& out_dir) {
  SynthConfig cfg = synth_config_from_json_text(read_file(config_path));
  const SynthDataset data = generate(cfg);
  const auto outputs = write_synth_dataset(data, out_dir);
  std::cout << "wrote " << outputs.size() << " files to " << out_dir << "\n";
  return 0;
}

struct TrainArgs {
  std::string embeddings, data, kind = "joint", out;
  TrainConfig config;
  Scalar ridge_penalty = 1e-4;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& args) {
  const Dataset source = load_dataset(args.data, Split::source);
  const EmbeddingTable table =
      load_embeddings(args.embeddings, source.vocabulary);
  const Matrix targets =
      synthesize_targets(table, source.vocabulary, source.labels);

  RegressionModel model;
  if (regressor_kind_from_string(args.kind) == RegressorKind::joint) {
    TrainConfig cfg = args.config;
    cfg.seed = derive_seed(args.seed, "train.joint");
    model = train_joint(source.features, targets, cfg);
    std::cout << "final objective " << model.loss_history.back() << "\n";
  } else {
    model = train_independent(source.features, targets, args.ridge_penalty);
  }
  save_model(model, args.out);
  std::cout << "wrote model to " << args.out << "\n";
  return 0;
}

struct PredictArgs {
  std::string model, embeddings, data, method = "dmp", out_dir = ".";
  bool selftrain = false;
  int k_graph = kDefaultGraphK;
  int k_selftrain = kDefaultSelfTrainK;
  Scalar threshold = kDefaultThreshold;
  std::string distance = "cosine", sigma = "median_sq";
};

int cmd_predict(const PredictArgs& args) {
  const RegressionModel model = load_model(args.model);
  const Dataset target = load_dataset(args.data, Split::target);
  const EmbeddingTable table =
      load_embeddings(args.embeddings, target.vocabulary);
  const ZslMethod method = zsl_method_from_string(args.method);

  const Matrix y_hat = predict(model, target.features);

  PredictionResult result;
  if (method == ZslMethod::exdap) {
    result = exdap_predict(y_hat, table.rows_for(target.vocabulary),
                           args.threshold);
  } else {
    PrototypeSet prototypes = build_power_set(table, target.vocabulary);
    if (args.selftrain)
      prototypes = self_train_prototypes(prototypes, y_hat, args.k_selftrain);
    if (method == ZslMethod::dmp) {
      result = dmp_predict(y_hat, prototypes);
    } else {
      const KnnGraph graph = build_knn_graph(
          y_hat, prototypes,
          {args.k_graph, distance_kind_from_string(args.distance),
           sigma_convention_from_string(args.sigma)});
      result = tramp_predict(graph, prototypes.label_matrix, args.threshold);
    }
  }

  std::filesystem::create_directories(args.out_dir);
  auto out_path = [&](const char* name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };
  save_embedding_csv(target.ids, y_hat, out_path("yhat.csv"));
  save_label_csv(target.ids, result.binary, target.vocabulary,
                 out_path("predictions.csv"));
  save_score_csv(target.ids, result.scores, target.vocabulary,
                 out_path("scores.csv"));
  for (const auto& d : result.diagnostics) std::cerr << "note: " << d << "\n";
  std::cout << "wrote yhat.csv, predictions.csv, scores.csv to "
            << args.out_dir << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string pred, truth, scores, out;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const LabelFile pred = load_label_csv(args.pred);
  const LabelFile truth_file = load_label_csv(args.truth);
  if (pred.vocabulary != truth_file.vocabulary)
    throw validation_error("prediction and truth label columns differ");

  // Align truth rows to prediction row order by id.
  std::unordered_map<std::string, Eigen::Index> truth_row;
  for (std::size_t i = 0; i < truth_file.ids.size(); ++i)
    truth_row.emplace(truth_file.ids[i], static_cast<Eigen::Index>(i));
  BinaryMatrix truth(pred.labels.rows(), pred.labels.cols());
  for (std::size_t i = 0; i < pred.ids.size(); ++i) {
    auto it = truth_row.find(pred.ids[i]);
    if (it == truth_row.end())
      throw validation_error("id '" + pred.ids[i] + "' missing from truth file");
    truth.row(static_cast<Eigen::Index>(i)) = truth_file.labels.row(it->second);
  }

  Matrix scores;
  if (!args.scores.empty()) {
    const ScoreFile sf = load_score_csv(args.scores);
    if (sf.vocabulary != pred.vocabulary)
      throw validation_error("score columns do not match prediction columns");
    if (sf.ids != pred.ids)
      throw validation_error("score file ids do not match prediction ids");
    scores = sf.scores;
  } else {
    // Binary predictions double as scores; ranking ties resolve by index.
    scores = pred.labels.cast<Scalar>();
  }

  const EvalReport report = evaluate_all(pred.labels, scores, truth);
  std::cout << report.to_table();
  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) throw validation_error("cannot write report: " + args.out);
    out << report.to_json() << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const ExperimentOutcome outcome = run_experiment(cfg);
  for (const auto& d : outcome.prediction.diagnostics)
    std::cerr << "note: " << d << "\n";
  std::cout << outcome.report.to_table();
  std::cout << "artifacts in " << cfg.out_dir << " (config_hash "
            << outcome.hash << ")\n";
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_override) {
  CompareConfig cfg = load_compare_config(config_path);
  if (!out_override.empty()) cfg.out = out_override;
  const CompareOutcome outcome = run_compare(cfg);
  std::cout << "wrote " << outcome.rows.size() << " rows to " << cfg.out
            << " (config_hash " << outcome.hash << ")\n";
  return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"zero-shot multi-label prediction in a semantic word space"};
  app.require_subcommand(1);

  std::string synth_config, synth_out = ".";
  CLI::App* synth = app.add_subcommand("synth-gen", "generate a synthetic benchmark dataset");
  synth->add_option("--config", synth_config, "synth config JSON")->required();
  synth->add_option("--out-dir", synth_out, "output directory");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "fit a regressor on a source dataset");
  train->add_option("--embeddings", train_args.embeddings)->required();
  train->add_option("--data", train_args.data, "source dataset CSV")->required();
  train->add_option("--kind", train_args.kind, "joint|independent");
  train->add_option("--out", train_args.out, "model JSON path")->required();
  train->add_option("--hidden", train_args.config.hidden_units);
  train->add_option("--lr", train_args.config.learning_rate);
  train->add_option("--epochs", train_args.config.epochs);
  train->add_option("--batch", train_args.config.batch_size);
  train->add_option("--l2", train_args.config.l2_penalty);
  train->add_option("--ridge-penalty", train_args.ridge_penalty);
  train->add_option("--seed", train_args.seed);

  PredictArgs predict_args;
  CLI::App* predict = app.add_subcommand("predict", "predict labels for a target dataset");
  predict->add_option("--model", predict_args.model)->required();
  predict->add_option("--embeddings", predict_args.embeddings)->required();
  predict->add_option("--data", predict_args.data, "target dataset CSV")->required();
  predict->add_option("--method", predict_args.method, "exdap|dmp|tramp");
  predict->add_flag("--selftrain", predict_args.selftrain);
  predict->add_option("--k-graph", predict_args.k_graph);
  predict->add_option("--k-selftrain", predict_args.k_selftrain);
  predict->add_option("--threshold", predict_args.threshold);
  predict->add_option("--distance", predict_args.distance, "cosine|euclidean");
  predict->add_option("--sigma-convention", predict_args.sigma,
                      "median_sq|paper_literal");
  predict->add_option("--out-dir", predict_args.out_dir);

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against ground truth");
  evaluate->add_option("--pred", eval_args.pred, "predictions CSV")->required();
  evaluate->add_option("--truth", eval_args.truth, "truth CSV")->required();
  evaluate->add_option("--scores", eval_args.scores, "scores CSV (optional)");
  evaluate->add_option("--out", eval_args.out, "report JSON path");

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "full experiment from a config or manifest");
  run->add_option("--config", run_config)->required();

  std::string compare_config, compare_out;
  CLI::App* compare = app.add_subcommand("compare", "competitor benchmark matrix");
  compare->add_option("--config", compare_config)->required();
  compare->add_option("--out", compare_out, "override output CSV path");

  std::vector<const char*> argv;
  argv.push_back("zsml");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth_gen(synth_config, synth_out);
    if (train->parsed()) return cmd_train(train_args);
    if (predict->parsed()) return cmd_predict(predict_args);
    if (evaluate->parsed()) return cmd_evaluate(eval_args);
    if (run->parsed()) return cmd_run(run_config);
    if (compare->parsed()) return cmd_compare(compare_config, compare_out);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

} // namespace zsml::cli

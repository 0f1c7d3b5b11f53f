#include <doctest.h>

#include <algorithm>
#include <set>

#include "zsml/synth.hpp"

using namespace zsml;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.dim = 6;
  cfg.source_labels = 8;
  cfg.target_labels = 3;
  cfg.source_instances = 120;
  cfg.target_instances = 60;
  cfg.feature_dim = 6;
  cfg.multilabel_rate = 0.3;
  cfg.seed = 11;
  return cfg;
}

TrainConfig tiny_train() {
  TrainConfig cfg;
  cfg.hidden_units = 16;
  cfg.learning_rate = 0.1;
  cfg.epochs = 150;
  cfg.batch_size = 32;
  cfg.l2_penalty = 1e-5;
  return cfg;
}

} // namespace

TEST_CASE("generation is deterministic for a fixed seed") {
  const SynthConfig cfg = small_config();
  const SynthDataset a = generate(cfg);
  const SynthDataset b = generate(cfg);
  CHECK(a.source.features == b.source.features);
  CHECK(a.source.labels == b.source.labels);
  CHECK(a.target.features == b.target.features);
  CHECK(a.target.labels == b.target.labels);
  CHECK(a.source.ids == b.source.ids);
  for (const auto& label : a.embeddings.labels())
    CHECK(a.embeddings.vec(label) == b.embeddings.vec(label));
}

TEST_CASE("identity map with zero noise reproduces label sums exactly") {
  SynthConfig cfg = small_config();
  cfg.map = MapKind::identity;
  cfg.noise_sigma = 0;
  cfg.shift = 0;
  const SynthDataset data = generate(cfg);
  const Matrix expected = synthesize_targets(
      data.embeddings, data.target.vocabulary, data.target.labels);
  CHECK(data.target.features == expected);
  const Matrix expected_src = synthesize_targets(
      data.embeddings, data.source.vocabulary, data.source.labels);
  CHECK(data.source.features == expected_src);
}

TEST_CASE("multilabel rate zero produces single-label instances only") {
  SynthConfig cfg = small_config();
  cfg.multilabel_rate = 0;
  const SynthDataset data = generate(cfg);
  for (Eigen::Index i = 0; i < data.target.labels.rows(); ++i)
    CHECK(data.target.labels.row(i).sum() == 1);
  for (Eigen::Index i = 0; i < data.source.labels.rows(); ++i)
    CHECK(data.source.labels.row(i).sum() == 1);
}

TEST_CASE("source-only multilabel override") {
  SynthConfig cfg = small_config();
  cfg.multilabel_rate = 0.5;
  cfg.multilabel_rate_source = 0.0;
  const SynthDataset data = generate(cfg);
  for (Eigen::Index i = 0; i < data.source.labels.rows(); ++i)
    CHECK(data.source.labels.row(i).sum() == 1);
  int multi = 0;
  for (Eigen::Index i = 0; i < data.target.labels.rows(); ++i)
    if (data.target.labels.row(i).sum() > 1) ++multi;
  CHECK(multi > 0);
}

TEST_CASE("empirical multilabel fraction tracks the configured rate") {
  for (std::uint64_t seed : {3ULL, 17ULL}) {
    SynthConfig cfg = small_config();
    cfg.target_instances = 800;
    cfg.multilabel_rate = 0.3;
    cfg.seed = seed;
    const SynthDataset data = generate(cfg);
    int multi = 0;
    for (Eigen::Index i = 0; i < data.target.labels.rows(); ++i)
      if (data.target.labels.row(i).sum() > 1) ++multi;
    const double fraction = static_cast<double>(multi) / 800.0;
    CHECK(fraction == doctest::Approx(0.3).epsilon(0.1));  // +-3 points
  }
}

TEST_CASE("vocabularies are disjoint and embeddings cover both") {
  const SynthDataset data = generate(small_config());
  std::set<std::string> source(data.source.vocabulary.begin(),
                               data.source.vocabulary.end());
  for (const auto& label : data.target.vocabulary)
    CHECK(source.count(label) == 0);
  CHECK(data.embeddings.size() ==
        static_cast<int>(source.size() + data.target.vocabulary.size()));
}

TEST_CASE("correlation biases multi-label sets toward label groups") {
  SynthConfig low = small_config();
  low.target_labels = 6;
  low.source_labels = 6;
  low.target_instances = 1500;
  low.multilabel_rate = 1.0;
  low.correlation = 0.0;
  SynthConfig high = low;
  high.correlation = 1.0;

  // With full correlation the rejection sampler should concentrate pairs
  // inside the hidden groups; measure the average pairwise co-occurrence
  // dispersion instead of group recovery (groups are hidden).
  auto pair_concentration = [](const SynthDataset& data) {
    const int m = data.target.label_count();
    Matrix counts = Matrix::Zero(m, m);
    for (Eigen::Index i = 0; i < data.target.labels.rows(); ++i)
      for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
          if (data.target.labels(i, a) == 1 && data.target.labels(i, b) == 1)
            counts(a, b) += 1;
    const Scalar total = counts.sum();
    Scalar sumsq = 0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) sumsq += std::pow(counts(a, b) / total, 2);
    return sumsq;  // higher = mass on fewer pairs
  };
  CHECK(pair_concentration(generate(high)) > pair_concentration(generate(low)));
}

TEST_CASE("config validation catches infeasible settings") {
  SynthConfig cfg = small_config();
  cfg.correlation = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("infeasible"),
                       validation_error);

  cfg = small_config();
  cfg.map = MapKind::identity;
  cfg.feature_dim = cfg.dim + 1;
  CHECK_THROWS_AS(cfg.validate(), validation_error);

  cfg = small_config();
  cfg.feature_dim = cfg.dim - 1;  // not invertible-ish
  CHECK_THROWS_AS(cfg.validate(), validation_error);

  cfg = small_config();
  cfg.target_labels = 1;
  CHECK_THROWS_AS(cfg.validate(), validation_error);
}

TEST_CASE("method specs parse and reject combos outside the matrix") {
  CHECK(to_string(method_spec_from_string("joint+dmp")) == "joint+dmp");
  CHECK(to_string(method_spec_from_string("independent+exdap")) ==
        "independent+exdap");
  CHECK_THROWS_AS(method_spec_from_string("independent+tramp"), validation_error);
  CHECK_THROWS_AS(method_spec_from_string("joint"), validation_error);
  CHECK_THROWS_AS(method_spec_from_string("joint+nope"), validation_error);
  CHECK(all_method_specs().size() == 5);
}

TEST_CASE("run_matrix emits one row per method, mode and seed") {
  SynthConfig cfg = small_config();
  cfg.noise_sigma = 0.2;
  const SynthDataset data = generate(cfg);

  HarnessOptions options;
  options.train = tiny_train();
  options.k_graph = 6;
  options.k_selftrain = 4;

  const auto rows = run_matrix(data, all_method_specs(), {true, false},
                               {0, 1, 2}, options);
  CHECK(rows.size() == 30);

  // method-major, then selftrain, then seed
  CHECK(to_string(rows[0].method) == "independent+exdap");
  CHECK(rows[0].selftrain);
  CHECK(rows[0].seed == 0);
  CHECK(rows[1].seed == 1);
  CHECK_FALSE(rows[3].selftrain);
  CHECK(to_string(rows[6].method) == "independent+dmp");

  for (const auto& row : rows) {
    CHECK(row.report.hamming_loss >= 0);
    CHECK(row.report.hamming_loss <= 1);
    CHECK(row.report.micro_f1 >= 0);
    CHECK(row.report.micro_f1 <= 1);
    CHECK(row.report.ranking_loss >= 0);
    CHECK(row.report.ranking_loss <= 1);
    CHECK(row.report.average_precision >= 0);
    CHECK(row.report.average_precision <= 1);
  }
}

TEST_CASE("run_matrix is deterministic") {
  SynthConfig cfg = small_config();
  cfg.noise_sigma = 0.1;
  const SynthDataset data = generate(cfg);
  HarnessOptions options;
  options.train = tiny_train();
  const std::vector<MethodSpec> methods = {
      method_spec_from_string("joint+dmp"),
      method_spec_from_string("joint+tramp")};
  const auto a = run_matrix(data, methods, {true}, {7}, options);
  const auto b = run_matrix(data, methods, {true}, {7}, options);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].report.hamming_loss == b[i].report.hamming_loss);
    CHECK(a[i].report.micro_f1 == b[i].report.micro_f1);
    CHECK(a[i].report.ranking_loss == b[i].report.ranking_loss);
    CHECK(a[i].report.average_precision == b[i].report.average_precision);
  }
}

TEST_CASE("noiseless linear pipeline recovers labels exactly") {
  // Zero-shot transfer needs the source label sums to cover the embedding
  // space densely, so the net's fit extends to the unseen target sums:
  // many source labels and a high source multi-label rate.
  SynthConfig cfg = small_config();
  cfg.map = MapKind::linear;
  cfg.noise_sigma = 0;
  cfg.shift = 0;
  cfg.source_labels = 16;
  cfg.source_instances = 1500;
  cfg.multilabel_rate_source = 0.7;
  const SynthDataset data = generate(cfg);

  HarnessOptions options;
  options.train.hidden_units = 64;
  options.train.learning_rate = 0.1;
  options.train.epochs = 800;
  options.train.batch_size = 64;
  options.train.l2_penalty = 0;

  const auto rows = run_matrix(
      data, {method_spec_from_string("joint+dmp")}, {false}, {1}, options);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].report.hamming_loss == 0.0);
  CHECK(rows[0].report.micro_f1 == 1.0);
}

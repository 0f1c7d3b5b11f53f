#include <doctest.h>

#include <random>
#include <vector>

#include "zsml/metrics.hpp"

using namespace zsml;

namespace {

BinaryMatrix random_binary(Eigen::Index rows, Eigen::Index cols,
                           std::mt19937_64& rng, double p = 0.4) {
  std::bernoulli_distribution coin(p);
  BinaryMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = coin(rng) ? 1 : 0;
  return m;
}

Matrix random_scores(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unit(rng);
  return m;
}

} // namespace

TEST_CASE("hamming loss on hand fixtures") {
  BinaryMatrix truth(2, 3);
  truth << 1, 0, 1,
           0, 1, 0;
  CHECK(hamming_loss(truth, truth) == 0.0);

  BinaryMatrix flipped = (1 - truth.array()).matrix();
  CHECK(hamming_loss(flipped, truth) == 1.0);

  BinaryMatrix two_off = truth;
  two_off(0, 0) = 0;
  two_off(1, 2) = 1;
  CHECK(hamming_loss(two_off, truth) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));

  BinaryMatrix wrong_shape(1, 3);
  wrong_shape.setZero();
  CHECK_THROWS_AS(hamming_loss(wrong_shape, truth), validation_error);
}

TEST_CASE("micro F1 on hand fixtures") {
  BinaryMatrix truth(2, 3);
  truth << 1, 0, 1,
           0, 1, 0;
  CHECK(micro_f1(truth, truth) == 1.0);

  BinaryMatrix zeros = BinaryMatrix::Zero(2, 3);
  CHECK(micro_f1(zeros, truth) == 0.0);
  CHECK(micro_f1(zeros, zeros) == 0.0);  // empty denominator convention

  // TP=2, FP=1, FN=1 -> 2*2 / (4 + 1 + 1)
  BinaryMatrix pred(2, 3);
  pred << 1, 1, 0,
          0, 1, 0;
  CHECK(micro_f1(pred, truth) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("ranking loss on hand fixtures") {
  BinaryMatrix truth(1, 3);
  truth << 1, 0, 1;

  Matrix separated(1, 3);
  separated << 0.9, 0.1, 0.8;
  CHECK(ranking_loss(separated, truth) == 0.0);

  Matrix inverted(1, 3);
  inverted << 0.1, 0.9, 0.2;
  CHECK(ranking_loss(inverted, truth) == 1.0);

  Matrix half(1, 3);
  half << 0.9, 0.5, 0.3;  // (l0,l1) ordered right, (l2,l1) wrong
  CHECK(ranking_loss(half, truth) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ranking loss counts ties as half") {
  BinaryMatrix truth(1, 2);
  truth << 1, 0;
  Matrix tied(1, 2);
  tied << 0.5, 0.5;
  CHECK(ranking_loss(tied, truth) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ranking metrics skip degenerate instances and report them") {
  BinaryMatrix truth(3, 2);
  truth << 1, 1,   // no negative: skipped
           0, 0,   // no positive: skipped
           1, 0;
  Matrix scores(3, 2);
  scores << 0.5, 0.5, 0.5, 0.5, 0.9, 0.1;
  int skipped = 0;
  CHECK(ranking_loss(scores, truth, &skipped) == 0.0);
  CHECK(skipped == 2);
  skipped = 0;
  CHECK(average_precision(scores, truth, &skipped) == 1.0);
  CHECK(skipped == 2);

  BinaryMatrix all_degenerate(1, 2);
  all_degenerate << 1, 1;
  Matrix s(1, 2);
  s << 0.5, 0.5;
  CHECK_THROWS_AS(ranking_loss(s, all_degenerate), validation_error);
  CHECK_THROWS_AS(average_precision(s, all_degenerate), validation_error);
}

TEST_CASE("average precision on hand fixtures") {
  BinaryMatrix truth(1, 3);
  truth << 1, 0, 1;

  Matrix first(1, 3);
  first << 0.9, 0.1, 0.8;  // positives occupy the top ranks
  CHECK(average_precision(first, truth) == 1.0);

  BinaryMatrix single(1, 4);
  single << 0, 0, 0, 1;
  Matrix last(1, 4);
  last << 0.9, 0.8, 0.7, 0.1;  // single positive ranked last of m
  CHECK(average_precision(last, single) == doctest::Approx(0.25).epsilon(1e-12));

  Matrix mixed(1, 3);
  mixed << 0.9, 0.5, 0.3;  // ranks 1 and 3 -> (1/1 + 2/3) / 2
  CHECK(average_precision(mixed, truth) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("metrics are invariant to identical column permutations") {
  std::mt19937_64 rng(7);
  const BinaryMatrix truth = random_binary(20, 5, rng);
  BinaryMatrix pred = random_binary(20, 5, rng);
  const Matrix scores = random_scores(20, 5, rng);

  std::vector<int> perm = {3, 0, 4, 1, 2};
  BinaryMatrix truth_p(20, 5), pred_p(20, 5);
  Matrix scores_p(20, 5);
  for (int j = 0; j < 5; ++j) {
    truth_p.col(j) = truth.col(perm[static_cast<std::size_t>(j)]);
    pred_p.col(j) = pred.col(perm[static_cast<std::size_t>(j)]);
    scores_p.col(j) = scores.col(perm[static_cast<std::size_t>(j)]);
  }

  CHECK(hamming_loss(pred_p, truth_p) == hamming_loss(pred, truth));
  CHECK(micro_f1(pred_p, truth_p) == micro_f1(pred, truth));
  CHECK(ranking_loss(scores_p, truth_p) ==
        doctest::Approx(ranking_loss(scores, truth)).epsilon(1e-12));
  CHECK(average_precision(scores_p, truth_p) ==
        doctest::Approx(average_precision(scores, truth)).epsilon(1e-12));
}

TEST_CASE("ranking loss of negated scores complements itself") {
  std::mt19937_64 rng(9);
  const BinaryMatrix truth = random_binary(15, 4, rng);
  const Matrix scores = random_scores(15, 4, rng);  // ties have measure zero
  int skipped = 0;
  const Scalar loss = ranking_loss(scores, truth, &skipped);
  const Scalar negated = ranking_loss(-scores, truth);
  CHECK(loss + negated == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metrics decompose over concatenated datasets") {
  std::mt19937_64 rng(21);
  const BinaryMatrix truth_a = random_binary(12, 4, rng);
  const BinaryMatrix truth_b = random_binary(30, 4, rng);
  const BinaryMatrix pred_a = random_binary(12, 4, rng);
  const BinaryMatrix pred_b = random_binary(30, 4, rng);

  BinaryMatrix truth(42, 4), pred(42, 4);
  truth << truth_a, truth_b;
  pred << pred_a, pred_b;

  const Scalar combined_hamming = hamming_loss(pred, truth);
  const Scalar weighted = (12.0 * hamming_loss(pred_a, truth_a) +
                           30.0 * hamming_loss(pred_b, truth_b)) /
                          42.0;
  CHECK(combined_hamming == doctest::Approx(weighted).epsilon(1e-12));

  // Micro F1 pools counts, not averages of per-part F1.
  auto counts = [](const BinaryMatrix& p, const BinaryMatrix& t) {
    long long tp = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        if (p(i, j) == 1 && t(i, j) == 1) ++tp;
        else if (p(i, j) == 1) ++fp;
        else if (t(i, j) == 1) ++fn;
      }
    return std::array<long long, 3>{tp, fp, fn};
  };
  const auto a = counts(pred_a, truth_a);
  const auto b = counts(pred_b, truth_b);
  const Scalar pooled =
      2.0 * (a[0] + b[0]) /
      static_cast<Scalar>(2 * (a[0] + b[0]) + (a[1] + b[1]) + (a[2] + b[2]));
  CHECK(micro_f1(pred, truth) == doctest::Approx(pooled).epsilon(1e-12));
}

TEST_CASE("evaluate_all assembles the report with complements") {
  BinaryMatrix truth(2, 3);
  truth << 1, 0, 1,
           0, 1, 0;
  Matrix scores(2, 3);
  scores << 0.9, 0.1, 0.8,
            0.2, 0.7, 0.1;
  const EvalReport report = evaluate_all(truth, scores, truth);
  CHECK(report.hamming_loss == 0.0);
  CHECK(report.micro_f1 == 1.0);
  CHECK(report.ranking_loss == 0.0);
  CHECK(report.average_precision == 1.0);
  CHECK(report.one_minus_micro_f1() == 0.0);
  CHECK(report.one_minus_average_precision() == 0.0);
  CHECK(report.n_instances == 2);
  CHECK(report.m_labels == 3);
  CHECK(report.ranking_skipped == 0);

  const std::string json = report.to_json();
  CHECK(json.find("one_minus_micro_f1") != std::string::npos);
  const std::string table = report.to_table();
  CHECK(table.find("hamming_loss") != std::string::npos);
  CHECK(table.find("1 - average_precision") != std::string::npos);
}

TEST_CASE("metrics validate binary inputs") {
  BinaryMatrix bad(1, 2);
  bad << 2, 0;
  BinaryMatrix ok(1, 2);
  ok << 1, 0;
  CHECK_THROWS_AS(hamming_loss(bad, ok), validation_error);
  CHECK_THROWS_AS(micro_f1(ok, bad), validation_error);
}

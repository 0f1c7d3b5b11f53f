#include "zsml/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "zsml/zsl.hpp"

namespace zsml {

namespace {

void check_binary(const BinaryMatrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0 && m(i, j) != 1)
        throw validation_error(std::string(what) + ": entry (" +
                               std::to_string(i) + ", " + std::to_string(j) +
                               ") is not 0/1");
}

void check_same_shape(Eigen::Index r1, Eigen::Index c1, Eigen::Index r2,
                      Eigen::Index c2, const char* what) {
  if (r1 != r2 || c1 != c2)
    throw validation_error(std::string(what) + ": shape mismatch (" +
                           std::to_string(r1) + "x" + std::to_string(c1) +
                           " vs " + std::to_string(r2) + "x" +
                           std::to_string(c2) + ")");
}

} // namespace

Scalar hamming_loss(const BinaryMatrix& pred, const BinaryMatrix& truth) {
  check_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols(),
                   "hamming_loss");
  check_binary(pred, "hamming_loss: pred");
  check_binary(truth, "hamming_loss: truth");
  if (pred.size() == 0) throw validation_error("hamming_loss: empty input");
  Eigen::Index mismatches = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i)
    for (Eigen::Index j = 0; j < pred.cols(); ++j)
      if (pred(i, j) != truth(i, j)) ++mismatches;
  return static_cast<Scalar>(mismatches) / static_cast<Scalar>(pred.size());
}

Scalar micro_f1(const BinaryMatrix& pred, const BinaryMatrix& truth) {
  check_same_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols(),
                   "micro_f1");
  check_binary(pred, "micro_f1: pred");
  check_binary(truth, "micro_f1: truth");
  long long tp = 0, fp = 0, fn = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i)
    for (Eigen::Index j = 0; j < pred.cols(); ++j) {
      if (pred(i, j) == 1 && truth(i, j) == 1) ++tp;
      else if (pred(i, j) == 1) ++fp;
      else if (truth(i, j) == 1) ++fn;
    }
  const long long denom = 2 * tp + fp + fn;
  if (denom == 0) return 0;  // no positives anywhere, by convention
  return static_cast<Scalar>(2 * tp) / static_cast<Scalar>(denom);
}

Scalar ranking_loss(const Matrix& scores, const BinaryMatrix& truth,
                    int* skipped) {
  check_same_shape(scores.rows(), scores.cols(), truth.rows(), truth.cols(),
                   "ranking_loss");
  check_binary(truth, "ranking_loss: truth");
  if (!scores.allFinite())
    throw validation_error("ranking_loss: non-finite score");

  Scalar total = 0;
  int eligible = 0, skip = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    std::vector<Eigen::Index> pos, neg;
    for (Eigen::Index j = 0; j < scores.cols(); ++j)
      (truth(i, j) == 1 ? pos : neg).push_back(j);
    if (pos.empty() || neg.empty()) {
      ++skip;
      continue;
    }
    Scalar wrong = 0;
    for (Eigen::Index p : pos)
      for (Eigen::Index q : neg) {
        if (scores(i, p) < scores(i, q)) wrong += 1;
        else if (scores(i, p) == scores(i, q)) wrong += Scalar(0.5);
      }
    total += wrong / static_cast<Scalar>(pos.size() * neg.size());
    ++eligible;
  }
  if (skipped) *skipped = skip;
  if (eligible == 0)
    throw validation_error(
        "ranking_loss: no instance has both a positive and a negative label");
  return total / static_cast<Scalar>(eligible);
}

Scalar average_precision(const Matrix& scores, const BinaryMatrix& truth,
                         int* skipped) {
  check_same_shape(scores.rows(), scores.cols(), truth.rows(), truth.cols(),
                   "average_precision");
  check_binary(truth, "average_precision: truth");
  if (!scores.allFinite())
    throw validation_error("average_precision: non-finite score");

  const Eigen::MatrixXi order = rank_labels(scores);
  Scalar total = 0;
  int eligible = 0, skip = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    int n_pos = 0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) n_pos += truth(i, j);
    if (n_pos == 0 || n_pos == scores.cols()) {
      ++skip;
      continue;
    }
    Scalar ap = 0;
    int positives_seen = 0;
    for (Eigen::Index r = 0; r < scores.cols(); ++r) {
      if (truth(i, order(i, r)) == 1) {
        ++positives_seen;
        ap += static_cast<Scalar>(positives_seen) / static_cast<Scalar>(r + 1);
      }
    }
    total += ap / static_cast<Scalar>(n_pos);
    ++eligible;
  }
  if (skipped) *skipped = skip;
  if (eligible == 0)
    throw validation_error(
        "average_precision: no instance has both a positive and a negative "
        "label");
  return total / static_cast<Scalar>(eligible);
}

EvalReport evaluate_all(const BinaryMatrix& pred, const Matrix& scores,
                        const BinaryMatrix& truth) {
  EvalReport report;
  report.n_instances = static_cast<int>(truth.rows());
  report.m_labels = static_cast<int>(truth.cols());
  report.hamming_loss = hamming_loss(pred, truth);
  report.micro_f1 = micro_f1(pred, truth);
  int skip_rank = 0, skip_ap = 0;
  report.ranking_loss = ranking_loss(scores, truth, &skip_rank);
  report.average_precision = average_precision(scores, truth, &skip_ap);
  report.ranking_skipped = skip_rank;
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["n_instances"] = n_instances;
  j["m_labels"] = m_labels;
  j["hamming_loss"] = hamming_loss;
  j["micro_f1"] = micro_f1;
  j["one_minus_micro_f1"] = one_minus_micro_f1();
  j["ranking_loss"] = ranking_loss;
  j["average_precision"] = average_precision;
  j["one_minus_average_precision"] = one_minus_average_precision();
  j["ranking_skipped"] = ranking_skipped;
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  auto row = [&out](const char* name, Scalar value) {
    out << std::left << std::setw(28) << name << value << "\n";
  };
  row("hamming_loss", hamming_loss);
  row("micro_f1", micro_f1);
  row("1 - micro_f1", one_minus_micro_f1());
  row("ranking_loss", ranking_loss);
  row("average_precision", average_precision);
  row("1 - average_precision", one_minus_average_precision());
  out << std::left << std::setw(28) << "instances" << n_instances << "\n";
  out << std::left << std::setw(28) << "labels" << m_labels << "\n";
  if (ranking_skipped > 0)
    out << std::left << std::setw(28) << "ranking_skipped" << ranking_skipped
        << "\n";
  return out.str();
}

} // namespace zsml

#ifndef ZSML_METRICS_HPP
#define ZSML_METRICS_HPP

#include <string>

#include "zsml/errors.hpp"
#include "zsml/types.hpp"

namespace zsml {

// The four evaluation criteria plus the 1-MicroF1 / 1-AP reporting
// convention (smaller is better across the board).
struct EvalReport {
  Scalar hamming_loss = 0;
  Scalar micro_f1 = 0;
  Scalar ranking_loss = 0;
  Scalar average_precision = 0;
  int n_instances = 0;
  int m_labels = 0;
  // Instances without both a positive and a negative label; excluded from
  // the two ranking metrics.
  int ranking_skipped = 0;

  Scalar one_minus_micro_f1() const { return 1 - micro_f1; }
  Scalar one_minus_average_precision() const { return 1 - average_precision; }

  std::string to_json() const;
  std::string to_table() const;
};

// Fraction of entries where prediction and truth disagree.
Scalar hamming_loss(const BinaryMatrix& pred, const BinaryMatrix& truth);

// Pooled-count F1 = 2TP / (2TP + FP + FN); 0 when the denominator is 0.
Scalar micro_f1(const BinaryMatrix& pred, const BinaryMatrix& truth);

// Per instance, the fraction of (positive, negative) label pairs ranked in
// the wrong order (score(pos) < score(neg)); ties count 0.5. Averaged over
// instances with at least one positive and one negative label; the others
// are counted in *skipped. Throws when no instance is eligible.
Scalar ranking_loss(const Matrix& scores, const BinaryMatrix& truth,
                    int* skipped = nullptr);

// Label-ranking average precision: for each positive label, the fraction of
// positives within its rank prefix, averaged per instance and then across
// eligible instances (same eligibility as ranking_loss).
Scalar average_precision(const Matrix& scores, const BinaryMatrix& truth,
                         int* skipped = nullptr);

EvalReport evaluate_all(const BinaryMatrix& pred, const Matrix& scores,
                        const BinaryMatrix& truth);

} // namespace zsml

#endif // ZSML_METRICS_HPP

#ifndef ZSML_WORDSPACE_HPP
#define ZSML_WORDSPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "zsml/errors.hpp"
#include "zsml/types.hpp"

namespace zsml {

// Cosine distance 1 - a.b / (|a||b|), clamped into [0, 2].
// Symmetric, invariant to positive scaling of either argument.
template <typename DerivedA, typename DerivedB>
Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                       const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw validation_error("cosine_distance: dimension mismatch (" +
                           std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()) + ")");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0))
    throw numeric_error("cosine_distance: undefined for the zero vector");
  const Scalar d = Scalar(1) - a.dot(b) / (na * nb);
  return std::clamp(d, Scalar(0), Scalar(2));
}

// A subset of a fixed label vocabulary, kept as strictly increasing indices.
class LabelSet {
 public:
  LabelSet() = default;

  // Sorts the given indices; rejects duplicates and, when vocab_size >= 0,
  // indices outside [0, vocab_size).
  explicit LabelSet(std::vector<int> members, int vocab_size = -1);

  static LabelSet from_bitmask(std::uint32_t mask);

  const std::vector<int>& members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  bool contains(int label) const;

  // Members must fit in 32 bits (the power-set cap guarantees this).
  std::uint32_t bitmask() const;

  bool operator==(const LabelSet& other) const = default;

 private:
  std::vector<int> members_;
};

// The map v: labels -> word vectors. Entries are validated on insertion:
// exact dimensionality, finite, nonzero (cosine distance is undefined at
// zero), no duplicate labels. Immutable once built.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim);

  void insert(const std::string& label, Vector vec);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(labels_.size()); }
  bool contains(const std::string& label) const;
  int index_of(const std::string& label) const;  // -1 when absent

  const Vector& vec(const std::string& label) const;
  const Vector& vec(int index) const { return vectors_[static_cast<std::size_t>(index)]; }
  const std::vector<std::string>& labels() const { return labels_; }

  // Stacks the embeddings of the given labels as rows, in the given order.
  Matrix rows_for(const std::vector<std::string>& labels) const;

 private:
  int dim_;
  std::vector<std::string> labels_;
  std::vector<Vector> vectors_;
  std::unordered_map<std::string, int> index_;
};

// One synthesized vector per nonempty label subset, in ascending-bitmask
// order: row j corresponds to bitmask j + 1. label_matrix holds the same
// subsets as 0/1 rows. `refined` flips once self-training has replaced the
// rows, after which rows are no longer plain embedding sums.
struct PrototypeSet {
  Matrix prototypes;
  BinaryMatrix label_matrix;
  std::vector<LabelSet> subsets;
  bool refined = false;

  int count() const { return static_cast<int>(prototypes.rows()); }
  int label_count() const { return static_cast<int>(label_matrix.cols()); }
  int dim() const { return static_cast<int>(prototypes.cols()); }
};

// Materializing 2^m rows is exponential; fail loudly past this.
inline constexpr int kDefaultPowerSetCap = 20;

// Elementwise sum of the member embeddings, accumulated in ascending label
// order. Rejects the empty subset (its vector is zero, where cosine
// distance is undefined) and unknown labels.
Vector synthesize_prototype(const EmbeddingTable& table,
                            const std::vector<std::string>& vocabulary,
                            const LabelSet& subset);

// Per-instance training targets: row i is the sum of the embeddings of the
// labels set in row i of `labels`. Columns of `labels` follow `vocabulary`.
Matrix synthesize_targets(const EmbeddingTable& table,
                          const std::vector<std::string>& vocabulary,
                          const BinaryMatrix& labels);

// All 2^m - 1 nonempty-subset prototypes over the given vocabulary.
PrototypeSet build_power_set(const EmbeddingTable& table,
                             const std::vector<std::string>& vocabulary,
                             int cap = kDefaultPowerSetCap);

// Text embedding file: optional leading '#' comment lines, then a header
// "<count> <dim>", then one "<label> <f1> ... <fdim>" line per entry.
// The returned table is restricted to `vocabulary`, in vocabulary order.
EmbeddingTable load_embeddings(std::istream& in, const std::string& source,
                               const std::vector<std::string>& vocabulary);
EmbeddingTable load_embeddings(const std::string& path,
                               const std::vector<std::string>& vocabulary);

void save_embeddings(const EmbeddingTable& table, std::ostream& out,
                     const std::vector<std::string>& comments = {});
void save_embeddings(const EmbeddingTable& table, const std::string& path,
                     const std::vector<std::string>& comments = {});

} // namespace zsml

#endif // ZSML_WORDSPACE_HPP

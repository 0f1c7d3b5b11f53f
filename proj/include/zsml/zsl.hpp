#ifndef ZSML_ZSL_HPP
#define ZSML_ZSL_HPP

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "zsml/errors.hpp"
#include "zsml/types.hpp"
#include "zsml/wordspace.hpp"

namespace zsml {

enum class ZslMethod { exdap, dmp, tramp };

std::string to_string(ZslMethod method);
ZslMethod zsl_method_from_string(const std::string& s);

// Neighbor/kernel distance for the kNN graph. DMP and self-training always
// use cosine; euclidean exists for graph ablations only.
enum class DistanceKind { cosine, euclidean };

// Bandwidth convention for the Gaussian kernel exp(-d^2 / (2 B)).
//   median_sq:    B = median of squared pairwise distances (default).
//   paper_literal: B = (median of squared pairwise distances)^2.
enum class SigmaConvention { median_sq, paper_literal };

std::string to_string(DistanceKind d);
DistanceKind distance_kind_from_string(const std::string& s);
std::string to_string(SigmaConvention s);
SigmaConvention sigma_convention_from_string(const std::string& s);

inline constexpr Scalar kDefaultThreshold = 0.5;
inline constexpr int kDefaultGraphK = 10;
inline constexpr int kDefaultSelfTrainK = 5;

struct GraphOptions {
  int k = kDefaultGraphK;
  DistanceKind distance = DistanceKind::cosine;
  SigmaConvention sigma = SigmaConvention::median_sq;
};

// Continuous per-label scores plus the binarized label sets. diagnostics
// collects non-fatal conditions (ill-conditioned solves, zero-prediction
// rows, triggered regularization).
struct PredictionResult {
  Matrix scores;        // n x m, higher = more confident
  BinaryMatrix binary;  // n x m in {0,1}
  ZslMethod method = ZslMethod::exdap;
  std::vector<std::string> diagnostics;
  std::vector<int> degenerate_rows;  // instances with undefined cosine
};

// Row-stochastic kNN graph over pooled nodes [test predictions; prototypes].
// Rows sum to 1, no self-loops, at most k nonzeros per row.
struct KnnGraph {
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> weights;
  int n_test = 0;
  int n_prototypes = 0;
  int k = 0;
  Scalar median_sq_dist = 0;  // median of squared pairwise distances
  Scalar bandwidth = 0;       // B in exp(-d^2 / (2 B))
  GraphOptions options;

  int node_count() const { return n_test + n_prototypes; }
};

// Pseudo-inverse decode of label scores from predicted embeddings: the
// least-squares solve of  embeddings^T . l = y_hat  per instance. Treats
// labels independently. Adds a diagnostic when the embedding matrix has
// condition number above 1e8.
PredictionResult exdap_predict(const Matrix& y_hat, const Matrix& label_embeddings,
                               Scalar threshold = kDefaultThreshold);

// Nearest-prototype assignment under cosine distance. The binary row is the
// label set of the nearest prototype; distance ties prefer the smaller
// subset, then the lower bitmask. Per-label ranking scores are the best
// similarity among prototypes containing that label. Zero-prediction rows
// get an empty label set and a diagnostic.
PredictionResult dmp_predict(const Matrix& y_hat, const PrototypeSet& prototypes);

KnnGraph build_knn_graph(const Matrix& y_hat, const PrototypeSet& prototypes,
                         const GraphOptions& options = {});

// Transductive label propagation from prototype rows to test rows, solved
// in closed form: scores = (I - w_UU)^{-1} w_UL L_P. Adds eps*I once if the
// unregularized factorization is singular.
PredictionResult tramp_predict(const KnnGraph& graph,
                               const BinaryMatrix& prototype_labels,
                               Scalar threshold = kDefaultThreshold);

// One self-training step: every prototype row moves to the mean of its k
// nearest predicted test vectors (cosine). Label rows are unchanged; the
// result is marked refined.
PrototypeSet self_train_prototypes(const PrototypeSet& prototypes,
                                   const Matrix& y_hat, int k);

// Per-instance label order by descending score; ties by ascending index.
Eigen::MatrixXi rank_labels(const Matrix& scores);
Eigen::MatrixXi rank_labels(const PredictionResult& result);

} // namespace zsml

#endif // ZSML_ZSL_HPP

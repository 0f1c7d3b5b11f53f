#include "zsml/zsl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "zsml/parallel.hpp"

namespace zsml {

std::string to_string(ZslMethod method) {
  switch (method) {
    case ZslMethod::exdap: return "exdap";
    case ZslMethod::dmp: return "dmp";
    case ZslMethod::tramp: return "tramp";
  }
  return "?";
}

ZslMethod zsl_method_from_string(const std::string& s) {
  if (s == "exdap") return ZslMethod::exdap;
  if (s == "dmp") return ZslMethod::dmp;
  if (s == "tramp") return ZslMethod::tramp;
  throw validation_error("unknown zsl method '" + s + "'");
}

std::string to_string(DistanceKind d) {
  return d == DistanceKind::cosine ? "cosine" : "euclidean";
}

DistanceKind distance_kind_from_string(const std::string& s) {
  if (s == "cosine") return DistanceKind::cosine;
  if (s == "euclidean") return DistanceKind::euclidean;
  throw validation_error("unknown distance kind '" + s + "'");
}

std::string to_string(SigmaConvention s) {
  return s == SigmaConvention::median_sq ? "median_sq" : "paper_literal";
}

SigmaConvention sigma_convention_from_string(const std::string& s) {
  if (s == "median_sq") return SigmaConvention::median_sq;
  if (s == "paper_literal") return SigmaConvention::paper_literal;
  throw validation_error("unknown sigma convention '" + s + "'");
}

namespace {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw validation_error(std::string(what) + ": non-finite entry");
}

// Pairwise squared distances over the rows of `points`. Cosine distances are
// computed from row-normalized points; a zero row is a domain error.
Matrix pairwise_squared_distances(const Matrix& points, DistanceKind kind,
                                  const char* what) {
  const Eigen::Index n = points.rows();
  Matrix d2(n, n);
  if (kind == DistanceKind::cosine) {
    Matrix unit = points;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar norm = unit.row(i).norm();
      if (norm == Scalar(0))
        throw numeric_error(std::string(what) + ": row " + std::to_string(i) +
                            " is the zero vector; cosine distance undefined");
      unit.row(i) /= norm;
    }
    const Matrix cosine = Matrix::Ones(n, n) - unit * unit.transpose();
    d2 = cosine.cwiseMax(Scalar(0)).cwiseMin(Scalar(2)).array().square();
  } else {
    const Vector sq = points.rowwise().squaredNorm();
    d2 = (sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
          Scalar(2) * points * points.transpose())
             .cwiseMax(Scalar(0));
  }
  d2.diagonal().setZero();
  return d2;
}

// Middle element of the values; for an even count, the mean of the two
// central elements.
Scalar median_of(std::vector<Scalar> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  Scalar upper = values[mid];
  if (n % 2 == 1) return upper;
  Scalar lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / 2;
}

} // namespace

PredictionResult exdap_predict(const Matrix& y_hat,
                               const Matrix& label_embeddings,
                               Scalar threshold) {
  check_finite(y_hat, "exdap_predict: y_hat");
  check_finite(label_embeddings, "exdap_predict: embeddings");
  if (y_hat.cols() != label_embeddings.cols())
    throw validation_error("exdap_predict: embedding dim " +
                           std::to_string(label_embeddings.cols()) +
                           " does not match prediction dim " +
                           std::to_string(y_hat.cols()));
  for (Eigen::Index j = 0; j < label_embeddings.rows(); ++j)
    if (label_embeddings.row(j).norm() == Scalar(0))
      throw validation_error("exdap_predict: zero embedding row " +
                             std::to_string(j));

  PredictionResult result;
  result.method = ZslMethod::exdap;

  // Minimum-norm least squares l = pinv(E^T) y per instance, via SVD of E^T.
  Eigen::JacobiSVD<Matrix> svd(label_embeddings.transpose(),
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const Scalar smax = sv.size() > 0 ? sv(0) : Scalar(0);
  const Scalar cutoff = smax *
      std::max(label_embeddings.rows(), label_embeddings.cols()) *
      std::numeric_limits<Scalar>::epsilon();
  Vector inv_sv(sv.size());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    inv_sv(i) = sv(i) > cutoff ? Scalar(1) / sv(i) : Scalar(0);
    if (sv(i) > cutoff) ++rank;
  }

  const bool deficient = rank < std::min(label_embeddings.rows(),
                                         label_embeddings.cols());
  const Scalar smin = sv(sv.size() - 1);
  if (deficient || smax > Scalar(1e8) * smin)
    result.diagnostics.push_back(
        "exdap: ill-conditioned embedding matrix (condition number " +
        std::string(deficient ? "infinite" : std::to_string(smax / smin)) +
        "); scores use the pseudo-inverse cutoff");

  // scores^T = V diag(1/s) U^T y^T, i.e. scores = y U diag(1/s) V^T.
  result.scores = y_hat * svd.matrixU() * inv_sv.asDiagonal() *
                  svd.matrixV().transpose();

  result.binary = (result.scores.array() >= threshold).cast<int>();
  return result;
}

PredictionResult dmp_predict(const Matrix& y_hat,
                             const PrototypeSet& prototypes) {
  check_finite(y_hat, "dmp_predict: y_hat");
  check_finite(prototypes.prototypes, "dmp_predict: prototypes");
  if (y_hat.cols() != prototypes.prototypes.cols())
    throw validation_error("dmp_predict: dimension mismatch");
  const Eigen::Index n = y_hat.rows();
  const Eigen::Index np = prototypes.count();
  const Eigen::Index m = prototypes.label_count();
  if (np == 0) throw validation_error("dmp_predict: empty prototype set");

  Matrix proto_unit = prototypes.prototypes;
  for (Eigen::Index j = 0; j < np; ++j) {
    const Scalar norm = proto_unit.row(j).norm();
    if (norm == Scalar(0))
      throw validation_error("dmp_predict: prototype row " +
                             std::to_string(j) + " is the zero vector");
    proto_unit.row(j) /= norm;
  }

  PredictionResult result;
  result.method = ZslMethod::dmp;
  result.scores = Matrix::Zero(n, m);
  result.binary = BinaryMatrix::Zero(n, m);
  std::vector<char> degenerate(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<int>(n), [&](int i) {
    const Scalar norm = y_hat.row(i).norm();
    if (norm == Scalar(0)) {
      degenerate[static_cast<std::size_t>(i)] = 1;
      return;
    }
    const Vector sims = proto_unit * (y_hat.row(i).transpose() / norm);

    // argmin of distance = argmax of similarity; ties prefer the smaller
    // subset, then the lower bitmask (= lower row index).
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < np; ++j) {
      if (sims(j) > sims(best) ||
          (sims(j) == sims(best) &&
           prototypes.subsets[static_cast<std::size_t>(j)].size() <
               prototypes.subsets[static_cast<std::size_t>(best)].size()))
        best = j;
    }
    result.binary.row(i) = prototypes.label_matrix.row(best);

    for (Eigen::Index l = 0; l < m; ++l) {
      Scalar s = std::numeric_limits<Scalar>::lowest();
      for (Eigen::Index j = 0; j < np; ++j)
        if (prototypes.label_matrix(j, l) != 0) s = std::max(s, sims(j));
      result.scores(i, l) = s;
    }
  });

  for (Eigen::Index i = 0; i < n; ++i)
    if (degenerate[static_cast<std::size_t>(i)]) {
      result.degenerate_rows.push_back(static_cast<int>(i));
      result.diagnostics.push_back(
          "dmp: instance " + std::to_string(i) +
          " predicted the zero vector; cosine undefined, empty label set assigned");
    }
  return result;
}

KnnGraph build_knn_graph(const Matrix& y_hat, const PrototypeSet& prototypes,
                         const GraphOptions& options) {
  check_finite(y_hat, "build_knn_graph: y_hat");
  check_finite(prototypes.prototypes, "build_knn_graph: prototypes");
  if (y_hat.cols() != prototypes.prototypes.cols())
    throw validation_error("build_knn_graph: dimension mismatch");
  if (options.k <= 0) throw validation_error("build_knn_graph: k must be positive");

  const Eigen::Index n_test = y_hat.rows();
  const Eigen::Index n_proto = prototypes.count();
  const Eigen::Index n = n_test + n_proto;
  if (options.k >= n)
    throw validation_error("build_knn_graph: k = " + std::to_string(options.k) +
                           " must be smaller than the node count " +
                           std::to_string(n));

  Matrix pooled(n, y_hat.cols());
  pooled.topRows(n_test) = y_hat;
  pooled.bottomRows(n_proto) = prototypes.prototypes;

  const Matrix d2 =
      pairwise_squared_distances(pooled, options.distance, "build_knn_graph");

  std::vector<Scalar> upper;
  upper.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index z = i + 1; z < n; ++z) upper.push_back(d2(i, z));
  const Scalar median = median_of(std::move(upper));
  if (median == Scalar(0))
    throw numeric_error(
        "build_knn_graph: median pairwise distance is zero (nodes coincide); "
        "the kernel bandwidth is degenerate");

  KnnGraph graph;
  graph.n_test = static_cast<int>(n_test);
  graph.n_prototypes = static_cast<int>(n_proto);
  graph.k = options.k;
  graph.options = options;
  graph.median_sq_dist = median;
  graph.bandwidth =
      options.sigma == SigmaConvention::median_sq ? median : median * median;

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * options.k);
  std::vector<Eigen::Index> order;

  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index z = 0; z < n; ++z)
      if (z != i) order.push_back(z);  // no self-loops
    std::partial_sort(order.begin(), order.begin() + options.k, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return d2(i, a) != d2(i, b) ? d2(i, a) < d2(i, b)
                                                    : a < b;
                      });

    // exp(-(d^2 - dmin^2) / 2B) is the same weight row up to the common
    // factor exp(-dmin^2 / 2B), which cancels in the normalization; the
    // shift keeps the row from underflowing to all zeros.
    const Scalar dmin = d2(i, order[0]);
    Vector w(options.k);
    for (int z = 0; z < options.k; ++z)
      w(z) = std::exp(-(d2(i, order[static_cast<std::size_t>(z)]) - dmin) /
                      (2 * graph.bandwidth));
    w /= w.sum();
    for (int z = 0; z < options.k; ++z)
      if (w(z) > Scalar(0))
        triplets.emplace_back(i, order[static_cast<std::size_t>(z)], w(z));
  }

  graph.weights.resize(n, n);
  graph.weights.setFromTriplets(triplets.begin(), triplets.end());
  graph.weights.makeCompressed();
  return graph;
}

PredictionResult tramp_predict(const KnnGraph& graph,
                               const BinaryMatrix& prototype_labels,
                               Scalar threshold) {
  if (prototype_labels.rows() != graph.n_prototypes)
    throw validation_error("tramp_predict: prototype label rows " +
                           std::to_string(prototype_labels.rows()) +
                           " do not match graph prototypes " +
                           std::to_string(graph.n_prototypes));
  if (graph.n_test <= 0)
    throw validation_error("tramp_predict: graph has no test rows");

  const Eigen::Index n = graph.n_test;
  const Eigen::Index p = graph.n_prototypes;
  const Matrix dense(graph.weights);
  const Matrix w_uu = dense.topLeftCorner(n, n);
  const Matrix w_ul = dense.topRightCorner(n, p);

  PredictionResult result;
  result.method = ZslMethod::tramp;

  Matrix a_uu = Matrix::Identity(n, n) - w_uu;
  Eigen::FullPivLU<Matrix> lu(a_uu);
  if (!lu.isInvertible()) {
    constexpr Scalar eps = 1e-10;
    a_uu.diagonal().array() += eps;
    lu.compute(a_uu);
    result.diagnostics.push_back(
        "tramp: singular propagation system; regularized with eps = 1e-10");
    if (!lu.isInvertible()) {
      Eigen::JacobiSVD<Matrix> svd(a_uu);
      throw numeric_error(
          "tramp_predict: propagation system singular even after "
          "regularization (smallest singular value " +
          std::to_string(svd.singularValues()(n - 1)) + ")");
    }
  }

  result.scores = lu.solve(w_ul * prototype_labels.cast<Scalar>());
  result.binary = (result.scores.array() >= threshold).cast<int>();
  return result;
}

PrototypeSet self_train_prototypes(const PrototypeSet& prototypes,
                                   const Matrix& y_hat, int k) {
  check_finite(y_hat, "self_train_prototypes: y_hat");
  check_finite(prototypes.prototypes, "self_train_prototypes: prototypes");
  if (y_hat.cols() != prototypes.prototypes.cols())
    throw validation_error("self_train_prototypes: dimension mismatch");
  const Eigen::Index n = y_hat.rows();
  if (k < 1) throw validation_error("self_train_prototypes: k must be >= 1");
  if (k > n)
    throw validation_error("self_train_prototypes: k = " + std::to_string(k) +
                           " exceeds the number of test instances " +
                           std::to_string(n));

  Matrix unit = y_hat;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar norm = unit.row(i).norm();
    if (norm == Scalar(0))
      throw numeric_error("self_train_prototypes: test row " +
                          std::to_string(i) +
                          " is the zero vector; cosine distance undefined");
    unit.row(i) /= norm;
  }

  PrototypeSet refined = prototypes;
  refined.refined = true;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < prototypes.count(); ++j) {
    const Scalar pnorm = prototypes.prototypes.row(j).norm();
    if (pnorm == Scalar(0))
      throw validation_error("self_train_prototypes: prototype row " +
                             std::to_string(j) + " is the zero vector");
    const Vector sims =
        unit * (prototypes.prototypes.row(j).transpose() / pnorm);
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return sims(a) != sims(b) ? sims(a) > sims(b) : a < b;
                      });
    RowVector mean = RowVector::Zero(y_hat.cols());
    for (int z = 0; z < k; ++z) mean += y_hat.row(order[static_cast<std::size_t>(z)]);
    mean /= static_cast<Scalar>(k);
    if (mean.norm() == Scalar(0))
      throw numeric_error(
          "self_train_prototypes: refined prototype for subset mask " +
          std::to_string(prototypes.subsets[static_cast<std::size_t>(j)].bitmask()) +
          " (row " + std::to_string(j) + ") is the zero vector");
    refined.prototypes.row(j) = mean;
  }
  return refined;
}

Eigen::MatrixXi rank_labels(const Matrix& scores) {
  check_finite(scores, "rank_labels: scores");
  const Eigen::Index n = scores.rows();
  const Eigen::Index m = scores.cols();
  Eigen::MatrixXi ranks(n, m);
  std::vector<int> order(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return scores(i, a) != scores(i, b) ? scores(i, a) > scores(i, b) : a < b;
    });
    for (Eigen::Index r = 0; r < m; ++r)
      ranks(i, r) = order[static_cast<std::size_t>(r)];
  }
  return ranks;
}

Eigen::MatrixXi rank_labels(const PredictionResult& result) {
  return rank_labels(result.scores);
}

} // namespace zsml

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "zsml/wordspace.hpp"
#include "zsml/zsl.hpp"

using namespace zsml;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                     Scalar scale = 1.0) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * gauss(rng);
  return m;
}

EmbeddingTable random_table(const std::vector<std::string>& vocab, int dim,
                            std::mt19937_64& rng) {
  EmbeddingTable table(dim);
  for (const auto& label : vocab) {
    Vector v(dim);
    std::normal_distribution<Scalar> gauss(0.0, 1.0);
    for (int j = 0; j < dim; ++j) v(j) = gauss(rng);
    table.insert(label, v);
  }
  return table;
}

std::vector<std::string> letters(int m) {
  std::vector<std::string> vocab;
  for (int i = 0; i < m; ++i) vocab.push_back(std::string(1, static_cast<char>('a' + i)));
  return vocab;
}

// Nearest prototype by exhaustive scan, written against cosine_distance
// directly rather than the normalized-similarity path of dmp_predict.
Eigen::Index brute_force_nearest(const RowVector& y, const PrototypeSet& ps) {
  Eigen::Index best = -1;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  int best_card = 0;
  for (Eigen::Index j = 0; j < ps.count(); ++j) {
    const Scalar d = cosine_distance(y.transpose(), ps.prototypes.row(j).transpose());
    const int card = ps.subsets[static_cast<std::size_t>(j)].size();
    const bool improves =
        d < best_d || (d == best_d && card < best_card);
    if (improves) {
      best = j;
      best_d = d;
      best_card = card;
    }
  }
  return best;
}

// Clamped label propagation F_U <- w_UU F_U + w_UL L_P iterated to a fixed
// point; the independent route for the closed-form solve.
Matrix propagate_iteratively(const KnnGraph& graph, const BinaryMatrix& lp,
                             Scalar tol, int max_iter) {
  const Eigen::Index n = graph.n_test;
  const Eigen::Index p = graph.n_prototypes;
  const Matrix dense = Matrix(graph.weights);
  const Matrix w_uu = dense.topLeftCorner(n, n);
  const Matrix w_ul = dense.topRightCorner(n, p);
  const Matrix source = w_ul * lp.cast<Scalar>();
  Matrix f = Matrix::Zero(n, lp.cols());
  for (int it = 0; it < max_iter; ++it) {
    const Matrix next = w_uu * f + source;
    const Scalar delta = (next - f).cwiseAbs().maxCoeff();
    f = next;
    if (delta < tol) return f;
  }
  FAIL("propagation did not converge");
  return f;
}

} // namespace

TEST_CASE("exdap with orthonormal embeddings is a projection") {
  Matrix e = Matrix::Identity(2, 2);
  Matrix y(1, 2);
  y << 0.9, 0.1;
  const PredictionResult r = exdap_predict(y, e);
  CHECK(r.scores(0, 0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(r.scores(0, 1) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.binary(0, 0) == 1);
  CHECK(r.binary(0, 1) == 0);
  CHECK(r.method == ZslMethod::exdap);
}

TEST_CASE("exdap recovers exact subset sums") {
  std::mt19937_64 rng(11);
  const Matrix e = random_matrix(4, 6, rng);  // 4 labels, independent w.p. 1
  Matrix y(2, 6);
  y.row(0) = e.row(0) + e.row(1);       // {a, b}
  y.row(1) = e.row(2);                  // {c}
  const PredictionResult r = exdap_predict(y, e);
  Matrix expected(2, 4);
  expected << 1, 1, 0, 0, 0, 0, 1, 0;
  CHECK((r.scores - expected).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(r.binary(0, 0) == 1);
  CHECK(r.binary(0, 1) == 1);
  CHECK(r.binary(0, 2) == 0);
  CHECK(r.binary(1, 2) == 1);
}

TEST_CASE("exdap matches an elimination-based least-squares oracle") {
  std::mt19937_64 rng(13);
  const int m = 4, dim = 7, n = 12;
  const Matrix e = random_matrix(m, dim, rng);
  const Matrix y = random_matrix(n, dim, rng);
  const PredictionResult r = exdap_predict(y, e);

  // Normal equations (E E^T) l = E y, solved by Gaussian elimination with
  // partial pivoting, written out by hand.
  const Matrix gram = e * e.transpose();
  for (int i = 0; i < n; ++i) {
    Matrix aug(m, m + 1);
    aug.leftCols(m) = gram;
    aug.col(m) = e * y.row(i).transpose();
    for (int col = 0; col < m; ++col) {
      int pivot = col;
      for (int row = col + 1; row < m; ++row)
        if (std::abs(aug(row, col)) > std::abs(aug(pivot, col))) pivot = row;
      aug.row(col).swap(aug.row(pivot));
      for (int row = col + 1; row < m; ++row) {
        const Scalar factor = aug(row, col) / aug(col, col);
        aug.row(row) -= factor * aug.row(col);
      }
    }
    Vector sol(m);
    for (int row = m - 1; row >= 0; --row) {
      Scalar acc = aug(row, m);
      for (int col = row + 1; col < m; ++col) acc -= aug(row, col) * sol(col);
      sol(row) = acc / aug(row, row);
    }
    CHECK((r.scores.row(i).transpose() - sol).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("exdap warns on an ill-conditioned embedding matrix") {
  Matrix e(2, 3);
  e << 1, 0, 0,
       1, 1e-10, 0;  // nearly collinear
  Matrix y(1, 3);
  y << 1, 0, 0;
  const PredictionResult r = exdap_predict(y, e);
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].find("condition") != std::string::npos);

  Matrix rank_deficient(2, 3);
  rank_deficient << 1, 0, 0, 1, 0, 0;
  const PredictionResult r2 = exdap_predict(y, rank_deficient);
  CHECK_FALSE(r2.diagnostics.empty());  // pseudo-inverse still defined
}

TEST_CASE("dmp assigns the label set of the nearest prototype") {
  std::mt19937_64 rng(17);
  EmbeddingTable table = random_table(letters(3), 5, rng);
  const PrototypeSet ps = build_power_set(table, letters(3));

  Matrix y(1, 5);
  y = ps.prototypes.row(4);  // subset mask 5 = {a, c}
  const PredictionResult r = dmp_predict(y, ps);
  CHECK(r.binary(0, 0) == 1);
  CHECK(r.binary(0, 1) == 0);
  CHECK(r.binary(0, 2) == 1);
}

TEST_CASE("dmp on two orthonormal labels picks the pair for the diagonal") {
  EmbeddingTable table(2);
  Vector a(2), b(2);
  a << 1, 0;
  b << 0, 1;
  table.insert("a", a);
  table.insert("b", b);
  const PrototypeSet ps = build_power_set(table, {"a", "b"});

  Matrix y(1, 2);
  y << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  const PredictionResult r = dmp_predict(y, ps);
  CHECK(r.binary(0, 0) == 1);
  CHECK(r.binary(0, 1) == 1);

  // Both labels' best containing prototype is {a,b} at distance 0: tied
  // scores of 1, ranked (a, b) by the index rule.
  CHECK(r.scores(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.scores(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::MatrixXi order = rank_labels(r);
  CHECK(order(0, 0) == 0);
  CHECK(order(0, 1) == 1);
}

TEST_CASE("dmp equals the brute-force prototype scan") {
  std::mt19937_64 rng(19);
  for (int fixture = 0; fixture < 30; ++fixture) {
    EmbeddingTable table = random_table(letters(3), 4, rng);
    const PrototypeSet ps = build_power_set(table, letters(3));
    const Matrix y = random_matrix(10, 4, rng);
    const PredictionResult r = dmp_predict(y, ps);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const Eigen::Index expected = brute_force_nearest(y.row(i), ps);
      CHECK(r.binary.row(i) == ps.label_matrix.row(expected));
    }
  }
}

TEST_CASE("dmp distance ties prefer smaller subsets then lower masks") {
  // Hand-built prototype set: {a} and {b} equidistant from the diagonal.
  PrototypeSet ps;
  ps.prototypes.resize(2, 2);
  ps.prototypes << 1, 0,
                   0, 1;
  ps.label_matrix.resize(2, 2);
  ps.label_matrix << 1, 0,
                     0, 1;
  ps.subsets = {LabelSet({0}), LabelSet({1})};

  Matrix y(1, 2);
  y << 1, 1;
  const PredictionResult r = dmp_predict(y, ps);
  CHECK(r.binary(0, 0) == 1);  // bitmask 1 beats bitmask 2
  CHECK(r.binary(0, 1) == 0);
  CHECK(brute_force_nearest(y.row(0), ps) == 0);
}

TEST_CASE("dmp flags zero predictions instead of failing") {
  std::mt19937_64 rng(23);
  EmbeddingTable table = random_table(letters(2), 3, rng);
  const PrototypeSet ps = build_power_set(table, letters(2));
  Matrix y = random_matrix(3, 3, rng);
  y.row(1).setZero();
  const PredictionResult r = dmp_predict(y, ps);
  CHECK(r.degenerate_rows == std::vector<int>{1});
  CHECK(r.binary.row(1).sum() == 0);
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].find("instance 1") != std::string::npos);
}

TEST_CASE("dmp is invariant to positive scaling of a prediction") {
  std::mt19937_64 rng(29);
  EmbeddingTable table = random_table(letters(3), 6, rng);
  const PrototypeSet ps = build_power_set(table, letters(3));
  Matrix y = random_matrix(8, 6, rng);
  const PredictionResult base = dmp_predict(y, ps);
  // Power-of-two scales keep the normalization bit-exact.
  y.row(2) *= 4.0;
  y.row(5) *= 0.25;
  const PredictionResult scaled = dmp_predict(y, ps);
  CHECK(base.binary == scaled.binary);
}

TEST_CASE("knn graph rejects degenerate geometry and bad k") {
  PrototypeSet ps;
  ps.prototypes.resize(1, 2);
  ps.prototypes << 1, 0;
  ps.label_matrix.resize(1, 1);
  ps.label_matrix << 1;
  ps.subsets = {LabelSet({0})};

  Matrix y(1, 2);
  y << 1, 0;  // coincides with the only prototype: zero median distance
  CHECK_THROWS_AS(build_knn_graph(y, ps, {1}), numeric_error);

  CHECK_THROWS_AS(build_knn_graph(y, ps, {0}), validation_error);
  CHECK_THROWS_AS(build_knn_graph(y, ps, {2}), validation_error);
}

TEST_CASE("knn graph normalizes each row over its k neighbors") {
  std::mt19937_64 rng(31);
  EmbeddingTable table = random_table(letters(2), 4, rng);
  const PrototypeSet ps = build_power_set(table, letters(2));
  const Matrix y = random_matrix(1, 4, rng);
  const KnnGraph graph = build_knn_graph(y, ps, {3});
  REQUIRE(graph.node_count() == 4);
  const Matrix dense = Matrix(graph.weights);
  CHECK(dense(0, 0) == 0);
  int nonzeros = 0;
  for (int z = 1; z < 4; ++z)
    if (dense(0, z) > 0) ++nonzeros;
  CHECK(nonzeros == 3);
  CHECK(dense.row(0).sum() == doctest::Approx(1).epsilon(1e-10));
}

TEST_CASE("knn graph matches a dense recomputation") {
  std::mt19937_64 rng(37);
  for (SigmaConvention convention :
       {SigmaConvention::median_sq, SigmaConvention::paper_literal}) {
    EmbeddingTable table = random_table(letters(2), 5, rng);
    const PrototypeSet ps = build_power_set(table, letters(2));
    const Matrix y = random_matrix(2, 5, rng);  // 5 nodes total
    const int k = 3;
    const KnnGraph graph = build_knn_graph(y, ps, {k, DistanceKind::cosine, convention});

    // All pairwise cosine distances through the public scalar routine.
    Matrix pooled(5, 5);
    pooled.topRows(2) = y;
    pooled.bottomRows(3) = ps.prototypes;
    Matrix d2(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int z = 0; z < 5; ++z)
        d2(i, z) = i == z ? 0
                          : std::pow(cosine_distance(pooled.row(i).transpose(),
                                                     pooled.row(z).transpose()),
                                     2);
    std::vector<Scalar> upper;
    for (int i = 0; i < 5; ++i)
      for (int z = i + 1; z < 5; ++z) upper.push_back(d2(i, z));
    std::sort(upper.begin(), upper.end());
    const Scalar median = (upper[4] + upper[5]) / 2;  // 10 pairs
    const Scalar bandwidth =
        convention == SigmaConvention::median_sq ? median : median * median;
    CHECK(graph.median_sq_dist == doctest::Approx(median).epsilon(1e-12));

    const Matrix dense = Matrix(graph.weights);
    for (int i = 0; i < 5; ++i) {
      // naive kernel over the k nearest (ties by index)
      std::vector<int> order;
      for (int z = 0; z < 5; ++z)
        if (z != i) order.push_back(z);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return d2(i, a) != d2(i, b) ? d2(i, a) < d2(i, b) : a < b;
      });
      Vector w = Vector::Zero(5);
      for (int r = 0; r < k; ++r)
        w(order[static_cast<std::size_t>(r)]) =
            std::exp(-d2(i, order[static_cast<std::size_t>(r)]) / (2 * bandwidth));
      w /= w.sum();
      for (int z = 0; z < 5; ++z)
        CHECK(dense(i, z) == doctest::Approx(w(z)).epsilon(1e-12));
    }
  }
}

TEST_CASE("knn graph properties on a larger random fixture") {
  std::mt19937_64 rng(41);
  EmbeddingTable table = random_table(letters(4), 6, rng);
  const PrototypeSet ps = build_power_set(table, letters(4));
  const Matrix y = random_matrix(20, 6, rng);
  for (DistanceKind kind : {DistanceKind::cosine, DistanceKind::euclidean}) {
    const KnnGraph graph = build_knn_graph(y, ps, {7, kind});
    const Matrix dense = Matrix(graph.weights);
    for (int i = 0; i < graph.node_count(); ++i) {
      CHECK(dense(i, i) == 0);
      int nonzeros = 0;
      for (int z = 0; z < graph.node_count(); ++z)
        if (dense(i, z) != 0) ++nonzeros;
      CHECK(nonzeros <= 7);
      CHECK(std::abs(dense.row(i).sum() - 1) < 1e-10);
    }
  }
}

TEST_CASE("tramp propagates one step when all neighbors are prototypes") {
  std::mt19937_64 rng(43);
  EmbeddingTable table = random_table(letters(2), 4, rng);
  const PrototypeSet ps = build_power_set(table, letters(2));
  const Matrix y = random_matrix(1, 4, rng);
  const KnnGraph graph = build_knn_graph(y, ps, {3});
  const PredictionResult r = tramp_predict(graph, ps.label_matrix);

  const Matrix dense = Matrix(graph.weights);
  const Matrix expected =
      dense.row(0).tail(3) * ps.label_matrix.cast<Scalar>();
  CHECK((r.scores - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("tramp with a delta weight copies the prototype labels") {
  std::mt19937_64 rng(47);
  EmbeddingTable table = random_table(letters(3), 5, rng);
  const PrototypeSet ps = build_power_set(table, letters(3));
  Matrix y(2, 5);
  y.row(0) = ps.prototypes.row(0);      // exactly the {a} prototype
  y.row(1) = random_matrix(1, 5, rng);
  const KnnGraph graph = build_knn_graph(y, ps, {1});
  const PredictionResult r = tramp_predict(graph, ps.label_matrix);
  CHECK(r.scores(0, 0) == doctest::Approx(1).epsilon(1e-10));
  CHECK(r.scores(0, 1) == doctest::Approx(0).epsilon(1e-10));
  CHECK(r.scores(0, 2) == doctest::Approx(0).epsilon(1e-10));
  CHECK(r.binary(0, 0) == 1);
  CHECK(r.binary.row(0).sum() == 1);
}

TEST_CASE("tramp closed form equals iterative propagation") {
  std::mt19937_64 rng(53);
  for (int fixture = 0; fixture < 10; ++fixture) {
    EmbeddingTable table = random_table(letters(3), 6, rng);
    const PrototypeSet ps = build_power_set(table, letters(3));
    const Matrix y = random_matrix(4, 6, rng);
    const KnnGraph graph = build_knn_graph(y, ps, {5});
    const PredictionResult r = tramp_predict(graph, ps.label_matrix);
    const Matrix iterated =
        propagate_iteratively(graph, ps.label_matrix, 1e-10, 100000);
    CHECK((r.scores - iterated).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.scores.minCoeff() > -1e-10);
    CHECK(r.scores.maxCoeff() < 1 + 1e-10);
  }
}

TEST_CASE("tramp regularizes a singular propagation system") {
  // Two nearly identical test nodes far from the prototypes, k = 1: each
  // picks the other as its only neighbor and w_UU becomes a permutation.
  PrototypeSet ps;
  ps.prototypes.resize(1, 2);
  ps.prototypes << 0, 1;
  ps.label_matrix.resize(1, 1);
  ps.label_matrix << 1;
  ps.subsets = {LabelSet({0})};

  Matrix y(2, 2);
  y << 1, 0,
       1, 1e-9;
  const KnnGraph graph = build_knn_graph(y, ps, {1});
  const PredictionResult r = tramp_predict(graph, ps.label_matrix);
  REQUIRE_FALSE(r.diagnostics.empty());
  CHECK(r.diagnostics[0].find("regularized") != std::string::npos);
}

TEST_CASE("self-training replaces prototypes by neighbor means") {
  std::mt19937_64 rng(59);
  EmbeddingTable table = random_table(letters(2), 4, rng);
  const PrototypeSet ps = build_power_set(table, letters(2));

  SUBCASE("k = 1 jumps to the nearest prediction") {
    const Matrix y = random_matrix(6, 4, rng);
    const PrototypeSet refined = self_train_prototypes(ps, y, 1);
    CHECK(refined.refined);
    CHECK(refined.label_matrix == ps.label_matrix);
    for (int j = 0; j < ps.count(); ++j) {
      Eigen::Index nearest = 0;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const Scalar d = cosine_distance(ps.prototypes.row(j).transpose(),
                                         y.row(i).transpose());
        if (d < best) {
          best = d;
          nearest = i;
        }
      }
      CHECK(refined.prototypes.row(j) == y.row(nearest));
    }
  }

  SUBCASE("constant predictions collapse every prototype") {
    Matrix y(5, 4);
    for (int i = 0; i < 5; ++i) y.row(i) << 1, 2, 3, 4;
    for (int k : {1, 3, 5}) {
      const PrototypeSet refined = self_train_prototypes(ps, y, k);
      for (int j = 0; j < ps.count(); ++j)
        CHECK((refined.prototypes.row(j) - y.row(0)).cwiseAbs().maxCoeff() <
              1e-12);
    }
  }

  SUBCASE("k = n uses the global mean") {
    const Matrix y = random_matrix(7, 4, rng);
    const PrototypeSet refined = self_train_prototypes(ps, y, 7);
    const RowVector mean = y.colwise().mean();
    for (int j = 0; j < ps.count(); ++j)
      CHECK((refined.prototypes.row(j) - mean).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("k beyond the test count is rejected") {
    const Matrix y = random_matrix(3, 4, rng);
    CHECK_THROWS_AS(self_train_prototypes(ps, y, 4), validation_error);
    CHECK_THROWS_AS(self_train_prototypes(ps, y, 0), validation_error);
  }

  SUBCASE("idempotent when predictions equal the prototypes") {
    const PrototypeSet refined = self_train_prototypes(ps, ps.prototypes, 1);
    CHECK(refined.prototypes == ps.prototypes);
  }
}

TEST_CASE("self-training rejects a zero refined prototype") {
  PrototypeSet ps;
  ps.prototypes.resize(1, 2);
  ps.prototypes << 1, 0;
  ps.label_matrix.resize(1, 1);
  ps.label_matrix << 1;
  ps.subsets = {LabelSet({0})};

  Matrix y(2, 2);
  y << 1, 1,
       -1, -1;  // opposite vectors; their mean is zero
  CHECK_THROWS_WITH_AS(self_train_prototypes(ps, y, 2),
                       doctest::Contains("zero vector"), numeric_error);
}

TEST_CASE("rank_labels sorts by score with index tie break") {
  Matrix scores(2, 3);
  scores << 0.2, 0.9, 0.5,
            0.4, 0.4, 0.4;
  const Eigen::MatrixXi order = rank_labels(scores);
  CHECK(order(0, 0) == 1);
  CHECK(order(0, 1) == 2);
  CHECK(order(0, 2) == 0);
  CHECK(order(1, 0) == 0);
  CHECK(order(1, 1) == 1);
  CHECK(order(1, 2) == 2);
}

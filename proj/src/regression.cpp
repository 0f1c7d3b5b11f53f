#include "zsml/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace zsml {

std::string to_string(RegressorKind kind) {
  return kind == RegressorKind::joint ? "joint" : "independent";
}

RegressorKind regressor_kind_from_string(const std::string& s) {
  if (s == "joint") return RegressorKind::joint;
  if (s == "independent") return RegressorKind::independent;
  throw validation_error("unknown regressor kind '" + s + "'");
}

void TrainConfig::validate() const {
  if (hidden_units < 1) throw validation_error("TrainConfig: hidden_units must be >= 1");
  if (!(learning_rate > 0)) throw validation_error("TrainConfig: learning_rate must be positive");
  if (epochs < 1) throw validation_error("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw validation_error("TrainConfig: batch_size must be >= 1");
  if (!(l2_penalty >= 0)) throw validation_error("TrainConfig: l2_penalty must be >= 0");
}

namespace {

void check_training_data(const Matrix& x, const Matrix& y) {
  if (x.rows() < 1 || x.cols() < 1)
    throw validation_error("training features must be a nonempty matrix");
  if (x.rows() != y.rows())
    throw validation_error("feature/target row mismatch: " +
                           std::to_string(x.rows()) + " vs " +
                           std::to_string(y.rows()));
  if (y.cols() < 1) throw validation_error("targets must have at least one column");
  if (!x.allFinite()) throw validation_error("non-finite feature value");
  if (!y.allFinite()) throw validation_error("non-finite target value");
}

// Fill in a fixed element order so results are reproducible for a seed.
void fill_gaussian(Matrix& m, std::mt19937_64& rng, Scalar scale) {
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * gauss(rng);
}

struct Forward {
  Matrix z;     // pre-activation, joint only
  Matrix h;     // relu(z), joint only
  Matrix pred;
};

Forward forward_pass(const RegressionModel& model, const Matrix& x) {
  Forward f;
  if (model.kind == RegressorKind::joint) {
    f.z = (x * model.w1).rowwise() + model.b1.transpose();
    f.h = f.z.cwiseMax(Scalar(0));
    f.pred = (f.h * model.w2).rowwise() + model.b2.transpose();
  } else {
    f.pred = (x * model.w2).rowwise() + model.b2.transpose();
  }
  return f;
}

} // namespace

RegressionModel train_joint(const Matrix& x, const Matrix& y,
                            const TrainConfig& cfg) {
  cfg.validate();
  check_training_data(x, y);

  const Eigen::Index n = x.rows();
  const Eigen::Index in_dim = x.cols();
  const Eigen::Index out_dim = y.cols();
  const Eigen::Index hidden = cfg.hidden_units;

  RegressionModel model;
  model.kind = RegressorKind::joint;

  std::mt19937_64 rng(cfg.seed);
  model.w1.resize(in_dim, hidden);
  fill_gaussian(model.w1, rng, std::sqrt(Scalar(2) / Scalar(in_dim)));
  model.b1 = Vector::Zero(hidden);
  model.w2.resize(hidden, out_dim);
  fill_gaussian(model.w2, rng, std::sqrt(Scalar(2) / Scalar(hidden)));
  model.b2 = Vector::Zero(out_dim);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));

  const Scalar lr = cfg.learning_rate;
  const Scalar l2 = cfg.l2_penalty;
  model.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

  Matrix xb, yb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index nb = std::min<Eigen::Index>(cfg.batch_size, n - start);
      xb.resize(nb, in_dim);
      yb.resize(nb, out_dim);
      for (Eigen::Index r = 0; r < nb; ++r) {
        xb.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);
        yb.row(r) = y.row(order[static_cast<std::size_t>(start + r)]);
      }

      const Matrix z = (xb * model.w1).rowwise() + model.b1.transpose();
      const Matrix h = z.cwiseMax(Scalar(0));
      const Matrix pred = (h * model.w2).rowwise() + model.b2.transpose();

      const Matrix grad_pred =
          (pred - yb) * (Scalar(2) / static_cast<Scalar>(nb * out_dim));
      const Matrix grad_w2 = h.transpose() * grad_pred + Scalar(2) * l2 * model.w2;
      const Vector grad_b2 = grad_pred.colwise().sum().transpose();
      const Matrix grad_h = grad_pred * model.w2.transpose();
      const Matrix grad_z =
          (z.array() > Scalar(0)).select(grad_h, Matrix::Zero(nb, hidden));
      const Matrix grad_w1 = xb.transpose() * grad_z + Scalar(2) * l2 * model.w1;
      const Vector grad_b1 = grad_z.colwise().sum().transpose();

      model.w1 -= lr * grad_w1;
      model.b1 -= lr * grad_b1;
      model.w2 -= lr * grad_w2;
      model.b2 -= lr * grad_b2;
    }

    const Scalar objective =
        mse_loss(model, x, y) +
        l2 * (model.w1.squaredNorm() + model.w2.squaredNorm());
    if (!std::isfinite(objective))
      throw numeric_error("train_joint: loss diverged at epoch " +
                          std::to_string(epoch) +
                          "; reduce the learning rate");
    model.loss_history.push_back(objective);
  }
  return model;
}

RegressionModel train_independent(const Matrix& x, const Matrix& y,
                                  Scalar l2_penalty) {
  check_training_data(x, y);
  if (!(l2_penalty >= 0))
    throw validation_error("train_independent: l2_penalty must be >= 0");

  const Eigen::Index n = x.rows();
  const Eigen::Index c = x.cols();

  Matrix xa(n, c + 1);
  xa.leftCols(c) = x;
  xa.col(c).setOnes();

  Matrix gram = xa.transpose() * xa;
  gram.topLeftCorner(c, c).diagonal().array() += l2_penalty;  // intercept unpenalized

  Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible()) {
    if (l2_penalty == Scalar(0))
      throw numeric_error(
          "train_independent: singular normal equations; use a positive "
          "l2_penalty");
    throw numeric_error("train_independent: normal equations singular even "
                        "with l2_penalty " + std::to_string(l2_penalty));
  }
  const Matrix solution = lu.solve(xa.transpose() * y);

  RegressionModel model;
  model.kind = RegressorKind::independent;
  model.w2 = solution.topRows(c);
  model.b2 = solution.row(c).transpose();
  return model;
}

Matrix predict(const RegressionModel& model, const Matrix& x) {
  const Eigen::Index expected =
      model.kind == RegressorKind::joint ? model.w1.rows() : model.w2.rows();
  if (x.cols() != expected)
    throw validation_error("predict: input width " + std::to_string(x.cols()) +
                           " does not match model input " +
                           std::to_string(expected));
  return forward_pass(model, x).pred;
}

Scalar mse_loss(const RegressionModel& model, const Matrix& x, const Matrix& y) {
  check_training_data(x, y);
  const Matrix pred = predict(model, x);
  return (pred - y).squaredNorm() /
         static_cast<Scalar>(x.rows() * y.cols());
}

Gradients mse_gradients(const RegressionModel& model, const Matrix& x,
                        const Matrix& y) {
  check_training_data(x, y);
  const Eigen::Index n = x.rows();
  const Eigen::Index d = y.cols();
  const Forward f = forward_pass(model, x);
  const Matrix grad_pred = (f.pred - y) * (Scalar(2) / static_cast<Scalar>(n * d));

  Gradients g;
  if (model.kind == RegressorKind::joint) {
    g.w2 = f.h.transpose() * grad_pred;
    g.b2 = grad_pred.colwise().sum().transpose();
    const Matrix grad_h = grad_pred * model.w2.transpose();
    const Matrix grad_z = (f.z.array() > Scalar(0))
                              .select(grad_h, Matrix::Zero(n, f.z.cols()));
    g.w1 = x.transpose() * grad_z;
    g.b1 = grad_z.colwise().sum().transpose();
  } else {
    g.w2 = x.transpose() * grad_pred;
    g.b2 = grad_pred.colwise().sum().transpose();
  }
  return g;
}

namespace {

// Relative error floored at 1e-6: below that scale the finite-difference
// probe is dominated by rounding noise of the O(1) loss.
Scalar relative_err(Scalar analytic, Scalar numeric) {
  const Scalar denom = std::max(Scalar(1e-6), std::abs(analytic) + std::abs(numeric));
  return std::abs(analytic - numeric) / denom;
}

template <typename Param>
Scalar check_param(RegressionModel& model, Param& param, const Matrix& analytic,
                   const Matrix& x, const Matrix& y, Scalar epsilon) {
  Scalar worst = 0;
  for (Eigen::Index i = 0; i < param.rows(); ++i)
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const Scalar saved = param(i, j);
      param(i, j) = saved + epsilon;
      const Scalar up = mse_loss(model, x, y);
      param(i, j) = saved - epsilon;
      const Scalar down = mse_loss(model, x, y);
      param(i, j) = saved;
      const Scalar numeric = (up - down) / (2 * epsilon);
      worst = std::max(worst, relative_err(analytic(i, j), numeric));
    }
  return worst;
}

} // namespace

Scalar max_relative_gradient_error(const RegressionModel& model,
                                   const Gradients& analytic, const Matrix& x,
                                   const Matrix& y, Scalar epsilon) {
  if (!(epsilon > 0)) throw validation_error("epsilon must be positive");
  RegressionModel probe = model;
  Scalar worst = 0;
  if (model.kind == RegressorKind::joint) {
    worst = std::max(worst, check_param(probe, probe.w1, analytic.w1, x, y, epsilon));
    worst = std::max(worst, check_param(probe, probe.b1, Matrix(analytic.b1), x, y, epsilon));
  }
  worst = std::max(worst, check_param(probe, probe.w2, analytic.w2, x, y, epsilon));
  worst = std::max(worst, check_param(probe, probe.b2, Matrix(analytic.b2), x, y, epsilon));
  return worst;
}

Scalar gradient_check(const RegressionModel& model, const Matrix& x,
                      const Matrix& y, Scalar epsilon) {
  return max_relative_gradient_error(model, mse_gradients(model, x, y), x, y,
                                     epsilon);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Matrix matrix_from_json(const nlohmann::json& arr, Eigen::Index rows,
                        Eigen::Index cols, const std::string& name) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw validation_error("model file: '" + name + "' must hold " +
                           std::to_string(rows * cols) + " values");
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[k++].get<Scalar>();
  return m;
}

} // namespace

std::string model_to_json(const RegressionModel& model) {
  nlohmann::json j;
  j["kind"] = to_string(model.kind);
  j["input_dim"] = model.input_dim();
  j["hidden_units"] = model.hidden_units();
  j["output_dim"] = model.output_dim();
  if (model.kind == RegressorKind::joint) {
    j["w1"] = matrix_to_json(model.w1);
    j["b1"] = matrix_to_json(Matrix(model.b1));
  }
  j["w2"] = matrix_to_json(model.w2);
  j["b2"] = matrix_to_json(Matrix(model.b2));
  return j.dump(2);
}

RegressionModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error(std::string("model file: invalid JSON: ") + e.what());
  }
  RegressionModel model;
  try {
    model.kind = regressor_kind_from_string(j.at("kind").get<std::string>());
    const auto in_dim = j.at("input_dim").get<Eigen::Index>();
    const auto hidden = j.at("hidden_units").get<Eigen::Index>();
    const auto out_dim = j.at("output_dim").get<Eigen::Index>();
    if (model.kind == RegressorKind::joint) {
      model.w1 = matrix_from_json(j.at("w1"), in_dim, hidden, "w1");
      model.b1 = matrix_from_json(j.at("b1"), hidden, 1, "b1");
      model.w2 = matrix_from_json(j.at("w2"), hidden, out_dim, "w2");
    } else {
      model.w2 = matrix_from_json(j.at("w2"), in_dim, out_dim, "w2");
    }
    model.b2 = matrix_from_json(j.at("b2"), out_dim, 1, "b2");
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("model file: ") + e.what());
  }
  if (!model.w1.allFinite() || !model.b1.allFinite() ||
      !model.w2.allFinite() || !model.b2.allFinite())
    throw validation_error("model file: non-finite parameter");
  return model;
}

void save_model(const RegressionModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write model file: " + path);
  out << model_to_json(model) << "\n";
}

RegressionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

} // namespace zsml

#ifndef ZSML_REGRESSION_HPP
#define ZSML_REGRESSION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "zsml/errors.hpp"
#include "zsml/types.hpp"

namespace zsml {

enum class RegressorKind { joint, independent };

std::string to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(const std::string& s);

struct TrainConfig {
  int hidden_units = 1024;
  Scalar learning_rate = 1e-3;
  int epochs = 200;
  int batch_size = 64;
  Scalar l2_penalty = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

// Feature -> word-space map. joint: y = relu(x W1 + b1) W2 + b2, trained by
// mini-batch gradient descent on mean squared error. independent: y = x W2
// + b2, one closed-form ridge fit per output column.
struct RegressionModel {
  RegressorKind kind = RegressorKind::joint;
  Matrix w1;  // input_dim x hidden (empty for independent)
  Vector b1;  // hidden
  Matrix w2;  // hidden x output (input_dim x output for independent)
  Vector b2;  // output

  // Full-data objective (MSE + L2 term) after each epoch; training artifact,
  // not serialized.
  std::vector<Scalar> loss_history;

  int input_dim() const {
    return static_cast<int>(kind == RegressorKind::joint ? w1.rows() : w2.rows());
  }
  int output_dim() const { return static_cast<int>(w2.cols()); }
  int hidden_units() const {
    return kind == RegressorKind::joint ? static_cast<int>(w1.cols()) : 0;
  }
};

// Parameter gradients, same shapes as the model's parameters.
struct Gradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

RegressionModel train_joint(const Matrix& x, const Matrix& y,
                            const TrainConfig& cfg);

// Ridge regression per output column with an explicit, never-penalized
// intercept. l2_penalty = 0 requires full-rank normal equations.
RegressionModel train_independent(const Matrix& x, const Matrix& y,
                                  Scalar l2_penalty);

Matrix predict(const RegressionModel& model, const Matrix& x);

// Mean squared error over all entries (no L2 term).
Scalar mse_loss(const RegressionModel& model, const Matrix& x, const Matrix& y);
Gradients mse_gradients(const RegressionModel& model, const Matrix& x,
                        const Matrix& y);

// Worst relative discrepancy between `analytic` and central finite
// differences of the MSE loss. Exposed separately so tests can feed a
// corrupted gradient as a negative control.
Scalar max_relative_gradient_error(const RegressionModel& model,
                                   const Gradients& analytic, const Matrix& x,
                                   const Matrix& y, Scalar epsilon);

Scalar gradient_check(const RegressionModel& model, const Matrix& x,
                      const Matrix& y, Scalar epsilon);

// JSON model files: kind, shapes, row-major parameter arrays. The float
// representation is shortest-round-trip, so save/load is lossless.
std::string model_to_json(const RegressionModel& model);
RegressionModel model_from_json(const std::string& text);
void save_model(const RegressionModel& model, const std::string& path);
RegressionModel load_model(const std::string& path);

} // namespace zsml

#endif // ZSML_REGRESSION_HPP

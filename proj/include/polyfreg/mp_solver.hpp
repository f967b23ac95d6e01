#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "polyfreg/funcdata.hpp"

namespace polyfreg {

// One regularization weight per polynomial degree block: lambdas[l] weighs
// the squared norm of the degree-l component, l = 0..order.
struct LambdaVector {
  std::vector<double> lambdas;

  LambdaVector() = default;
  explicit LambdaVector(std::vector<double> ls) : lambdas(std::move(ls)) {}

  int order() const { return static_cast<int>(lambdas.size()) - 1; }
};

// Throws InvalidArgumentError on negative or non-finite entries or an empty
// vector.
void validate_lambda(const LambdaVector& lambda);

// A fitted polynomial functional regression model in representer form:
//   u_0 = intercept,  u_l = sum_i coeffs(l-1, i) * X_i^{(x)l},
// where X_i are the training samples. Prediction therefore only ever needs
// 1-D inner products with the training samples.
struct PolyModel {
  int order = 0;
  double intercept = 0.0;
  Eigen::MatrixXd coeffs;  // order x N; row l-1 holds the degree-l weights
  std::shared_ptr<const Dataset> training_ref;
  LambdaVector lambda;

  // Solve diagnostics recorded at fit time.
  double residual_norm = 0.0;     // ||A x - rhs||_2 of the assembled system
  double solver_tolerance = 0.0;  // residual bound the solve was held to
  double condition_estimate = 0.0;
  bool least_squares_fallback = false;

  int sample_count() const {
    return training_ref ? training_ref->size() : static_cast<int>(coeffs.cols());
  }
};

// Assembles the (pN+1)-dimensional linear system for the regularized
// representer coefficients, unknowns ordered [b0; b_{1,1..N}; ...; b_{p,1..N}].
//
// Row 0:      (lambda_0 + 1) b0 + (1/N) sum_i sum_l sum_s b_{l,s} c_{i,s}^l
//             = mean(Y)
// Row (k,i):  N lambda_k b_{k,i} + b0 + sum_l sum_s b_{l,s} c_{i,s}^l = Y_i
//
// The (k,i) rows are the per-sample stationarity conditions multiplied
// through by N, which keeps the matrix O(1) as N grows without changing the
// solution.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_system(
    const Dataset& data, const GramMatrix& gram, const LambdaVector& lambda);

// Fits the model: dense partial-pivoting LU with one step of iterative
// refinement; falls back to minimum-norm least squares (complete orthogonal
// decomposition) when the estimated condition number reaches 1e12 or the
// refined residual misses the 1e-8 * (1 + ||rhs||) bound. A direct solve is
// only deemed successful under that bound, so the stored residual_norm
// always satisfies it on the direct path.
PolyModel fit(std::shared_ptr<const Dataset> data, const GramMatrix& gram,
              const LambdaVector& lambda);
PolyModel fit(std::shared_ptr<const Dataset> data, const LambdaVector& lambda);

// predict = b0 + sum_l sum_i b_{l,i} <X_i, x_new>^l.
double predict(const PolyModel& model, const FunctionalSample& x_new);

// Predictions on the model's own training samples, computed from the Gram
// matrix (bitwise identical to predict() on each training sample).
Eigen::VectorXd predict_training(const PolyModel& model, const GramMatrix& gram);

// Extends a model to a higher order by appending zero coefficient rows
// (and zero regularization weights). The extended model is the same
// function; this lets lower-order fits be compared against higher-order
// targets.
PolyModel pad_model_order(const PolyModel& model, int order);

// Model serialization. The coefficient file holds rows `kind,degree,index,
// value` with 17-significant-digit values (bit-exact round-trip); the
// sidecar `<path>.meta` records order, lambda, sample count, grid spec and,
// when available, the path of the training dataset.
void save_model_csv(const PolyModel& model, const std::string& path,
                    const std::string& training_data_path = "");
PolyModel load_model_csv(const std::string& path,
                         std::shared_ptr<const Dataset> training);

// Reads just the sidecar. Returned pairs: (key, value), file order.
std::vector<std::pair<std::string, std::string>> read_model_sidecar(
    const std::string& model_path);

}  // namespace polyfreg

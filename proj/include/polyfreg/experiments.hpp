#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyfreg/aggregation.hpp"
#include "polyfreg/funcdata.hpp"
#include "polyfreg/model_eval.hpp"
#include "polyfreg/mp_solver.hpp"
#include "polyfreg/rng.hpp"

namespace polyfreg {

// Configuration of the built-in simulation study: predictors are random
// cosine series X(t) = sum_{k=0}^{5} xi_k cos(kt) on [0, 2pi] with
// xi_k ~ U[-1, 1], responses come from a fixed quadratic functional of X
// (see toy_truth), optionally plus Gaussian noise.
struct ToyConfig {
  std::uint64_t seed = 0;
  int n_max = 40;
  std::vector<LambdaVector> lambda_grid;  // empty -> default_toy_lambda_grid(order)
  int grid_nodes = 256;
  double noise_sigma = 0.0;
  int order = 2;
};

void validate_toy_config(const ToyConfig& config);

// Cartesian product of per-degree candidate lists, in row-major order with
// the last degree varying fastest.
std::vector<LambdaVector> cartesian_lambda_grid(
    const std::vector<std::vector<double>>& per_degree);

// The 27-point default: {1e-5, 1e-7, 1e-9} per degree for order 2 (3^(p+1)
// combinations in general).
std::vector<LambdaVector> default_toy_lambda_grid(int order = 2);

// The target functional of the simulation study:
//   u_0 = 2,  u_1 = 1 + 4 cos t + cos 5t,  u_2 = cos 3t + cos 2t cos 2tau.
// Its quadratic component has an antisymmetric part orthogonal to every
// rank-one symmetric tensor, so no model of this family can get closer than
// that part's norm (= pi); the error curves plateau there.
TruthPolynomial toy_truth(const Grid& grid);

// Builds the dataset for explicit coefficient rows (one sample per row of
// xi, columns = cosine orders 0..xi.cols()-1). Responses are computed by
// quadrature against toy_truth. Used by toy_sample and directly by tests.
Dataset toy_from_coefficients(const Eigen::MatrixXd& xi, const Grid& grid);

// n samples of the toy process. Sample i is fully determined by
// (config.seed, i): coefficient and noise streams are indexed per sample,
// so prefixes of a larger draw coincide with smaller draws.
Dataset toy_sample(const ToyConfig& config, int n);

// One cell of the error curve: the reconstruction error of either a single
// lambda-grid model (lambda_index >= 0) or the aggregate (lambda_index < 0)
// at sample count n. Failed solves record NaN.
struct ErrorCurveCell {
  int n = 0;
  int lambda_index = 0;
  double error = 0.0;
};

struct ErrorCurveResult {
  std::vector<LambdaVector> lambda_grid;
  std::vector<ErrorCurveCell> cells;  // grouped by n, lambda cells then AGG
  int failed_cells = 0;
  int total_cells = 0;
};

// For each N = 1..n_max: fit every lambda-grid model on the first N
// samples, record each model's L2 error against toy_truth, aggregate all of
// them, and record the aggregate's error (via its combined representer
// coefficients). Cells whose solve throws record NaN and the sweep
// continues. Parallel over N; output identical for any thread count.
ErrorCurveResult error_curve(const ToyConfig& config, int threads = 1);

// CSV layout: `N,lambda0,...,lambdap,error`, AGG sentinel in every lambda
// column for aggregate rows.
void save_error_curve_csv(const ErrorCurveResult& result,
                          const std::string& path);

// Binary classification quality of a thresholded continuous score.
struct BinaryMetrics {
  long tp = 0, tn = 0, fp = 0, fn = 0;
  std::optional<double> sensitivity;  // unset when there are no positives
  std::optional<double> specificity;  // unset when there are no negatives
  std::optional<double> auc;          // unset when either class is missing
  std::vector<std::pair<double, double>> roc_points;  // (1 - SP, SE)
};

// Mann-Whitney rank AUC with mid-rank tie handling; exactly the trapezoidal
// area under the ROC sweep of the scores.
double rank_auc(const std::vector<double>& scores,
                const std::vector<bool>& positive);

// Metrics of `scores` against ground truth `positive` at the given
// threshold; a sample is called positive when score > threshold (strict).
BinaryMetrics score_metrics(const std::vector<double>& scores,
                            const std::vector<bool>& positive,
                            double threshold);

struct ClassifyResult {
  std::vector<BinaryMetrics> per_model;
  BinaryMetrics aggregated;
};

// Fits one model per lambda vector on `train` (responses are the labels),
// aggregates them, scores `test`, and computes metrics for every model and
// for the aggregate. Ground-truth positive means label > 0.
ClassifyResult classify_eval(const Dataset& train, const Dataset& test,
                             const std::vector<LambdaVector>& lambda_grid,
                             int order, double threshold);

// Splits into (train, test): train gets exactly train_pos positives (label
// > 0) and train_neg negatives, drawn uniformly without replacement within
// each stratum; everything else is test. Order within each part follows the
// original dataset order.
std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset,
                                             int train_pos, int train_neg,
                                             Stream& stream);

// Synthetic vessel-diameter surrogate: `n_vessels` profiles on the grid
// interval, baseline ~5 mm with smooth low-frequency variation;
// `n_positive` of them get one localized narrowing whose depth encodes the
// severity label in {0.25, 0.5, 0.75, 1.0}; the rest are labeled 0. This is
// generated data for exercising the pipeline, not clinical data.
Dataset synthetic_surrogate(std::uint64_t seed, const Grid& grid,
                            int n_vessels = 40, int n_positive = 7);

}  // namespace polyfreg

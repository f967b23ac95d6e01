#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "polyfreg/funcdata.hpp"
#include "polyfreg/mp_solver.hpp"

namespace polyfreg {

// A least-squares combination of R fitted models. The combination weights
// solve the empirical normal equations over the span of the base models'
// prediction vectors, so on the aggregation data the combined model is the
// training-risk minimizer within that span.
struct AggregatedModel {
  std::vector<std::shared_ptr<const PolyModel>> base_models;
  Eigen::VectorXd coefficients;       // one weight per base model
  double gram_tilde_condition = 0.0;  // estimated condition of the R x R system
  double ridge_used = 0.0;            // 0 when the plain solve was accepted
};

// G = (1/N) P P^T for a prediction matrix P whose row r holds model r's
// predictions on the aggregation samples. Symmetric PSD by construction.
Eigen::MatrixXd build_gram_tilde(const Eigen::MatrixXd& base_predictions);

// g_r = (1/N) sum_i Y_i * P(r, i).
Eigen::VectorXd build_g_tilde(const Eigen::MatrixXd& base_predictions,
                              const Eigen::VectorXd& responses);

// Solves G c = g by symmetric factorization. When the estimated condition
// reaches 1e10 the system is re-solved with a ridge jitter G + eps I,
// eps = 1e-10 * trace(G) / R; near-duplicate models make G singular and the
// jitter pins down a representative of the (prediction-equivalent) solution
// set. `dataset` is the aggregation sample; by default callers pass the
// common training data, but any dataset on the same grid works (held-out
// aggregation).
AggregatedModel aggregate(
    const std::vector<std::shared_ptr<const PolyModel>>& models,
    const Dataset& dataset);

// sum_r c_r * predict(base_r, x_new).
double predict_aggregated(const AggregatedModel& agg,
                          const FunctionalSample& x_new);

// When all base models share one training dataset, the aggregate is itself
// a representer model with coefficient-wise combined parameters; this
// returns it (lambda is reported as all zeros: the combination has no
// single penalty vector).
PolyModel combine_representer(const AggregatedModel& agg);

// Report CSV: `model_index,lambda0,...,lambdap,c_tilde,train_risk` with one
// row per base model and an AGG footer row; a `<path>.meta` sidecar records
// the condition estimate and the ridge actually applied.
void save_aggregation_report_csv(const AggregatedModel& agg,
                                 const Eigen::MatrixXd& base_predictions,
                                 const Eigen::VectorXd& responses,
                                 const std::string& path);

}  // namespace polyfreg

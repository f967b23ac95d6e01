#include "polyfreg/aggregation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "polyfreg/errors.hpp"
#include "polyfreg/model_eval.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg {

Eigen::MatrixXd build_gram_tilde(const Eigen::MatrixXd& base_predictions) {
  if (base_predictions.rows() == 0 || base_predictions.cols() == 0) {
    throw InvalidArgumentError("build_gram_tilde: empty prediction matrix");
  }
  const double inv_n = 1.0 / static_cast<double>(base_predictions.cols());
  return inv_n * (base_predictions * base_predictions.transpose());
}

Eigen::VectorXd build_g_tilde(const Eigen::MatrixXd& base_predictions,
                              const Eigen::VectorXd& responses) {
  if (base_predictions.cols() != responses.size()) {
    throw DataShapeError("build_g_tilde: responses do not match predictions");
  }
  if (base_predictions.rows() == 0 || base_predictions.cols() == 0) {
    throw InvalidArgumentError("build_g_tilde: empty prediction matrix");
  }
  const double inv_n = 1.0 / static_cast<double>(base_predictions.cols());
  return inv_n * (base_predictions * responses);
}

namespace {

// Predictions of every base model on the aggregation samples. For models
// fitted on these very samples, predict() reproduces the training Gram
// entries bitwise, so this matches the Gram-based training predictions.
Eigen::MatrixXd base_prediction_matrix(
    const std::vector<std::shared_ptr<const PolyModel>>& models,
    const Dataset& dataset) {
  const int r_count = static_cast<int>(models.size());
  const int n = dataset.size();
  Eigen::MatrixXd p(r_count, n);
  for (int r = 0; r < r_count; ++r) {
    const PolyModel& m = *models[static_cast<size_t>(r)];
    if (!m.training_ref) {
      throw InvalidArgumentError("aggregate: base model lacks training data");
    }
    if (!same_grid(m.training_ref->grid, dataset.grid)) {
      throw DataShapeError("aggregate: base model grid differs from dataset grid");
    }
    for (int i = 0; i < n; ++i) {
      p(r, i) = predict(m, dataset.samples[static_cast<size_t>(i)]);
    }
  }
  return p;
}

}  // namespace

AggregatedModel aggregate(
    const std::vector<std::shared_ptr<const PolyModel>>& models,
    const Dataset& dataset) {
  if (models.empty()) {
    throw InvalidArgumentError("aggregate: need at least one model");
  }
  const Eigen::MatrixXd preds = base_prediction_matrix(models, dataset);
  const Eigen::MatrixXd g_tilde = build_gram_tilde(preds);
  const Eigen::VectorXd rhs = build_g_tilde(preds, dataset.responses);
  const int r_count = static_cast<int>(models.size());

  const double trace = g_tilde.trace();
  if (!(trace > 0.0)) {
    throw DegenerateAggregationError(
        "aggregate: all base predictions are zero; no combination is defined");
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(g_tilde);
  // Condition from the eigenvalue ratio: LDLT's own rcond() treats exactly
  // singular PSD systems as benign (it zeroes null-space components), which
  // would let rank-deficient duplicates slip past the ridge gate.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(g_tilde,
                                                      Eigen::EigenvaluesOnly);
  const double lambda_min = eigs.eigenvalues()[0];
  const double lambda_max = eigs.eigenvalues()[r_count - 1];
  const double cond = lambda_min > 0.0
                          ? lambda_max / lambda_min
                          : std::numeric_limits<double>::infinity();

  AggregatedModel agg;
  agg.base_models = models;
  agg.gram_tilde_condition = cond;

  Eigen::VectorXd c;
  bool plain_ok = false;
  if (ldlt.info() == Eigen::Success && cond < 1e10) {
    c = ldlt.solve(rhs);
    plain_ok = c.allFinite();
  }
  if (!plain_ok) {
    const double eps = 1e-10 * trace / static_cast<double>(r_count);
    Eigen::MatrixXd jittered = g_tilde;
    jittered.diagonal().array() += eps;
    c = jittered.ldlt().solve(rhs);
    if (!c.allFinite()) {
      throw SolverFailureError("aggregate: ridge-stabilized solve failed");
    }
    agg.ridge_used = eps;
  }
  agg.coefficients = c;
  return agg;
}

double predict_aggregated(const AggregatedModel& agg,
                          const FunctionalSample& x_new) {
  double acc = 0.0;
  for (size_t r = 0; r < agg.base_models.size(); ++r) {
    acc += agg.coefficients[static_cast<Eigen::Index>(r)] *
           predict(*agg.base_models[r], x_new);
  }
  return acc;
}

PolyModel combine_representer(const AggregatedModel& agg) {
  if (agg.base_models.empty()) {
    throw InvalidArgumentError("combine_representer: no base models");
  }
  const PolyModel& first = *agg.base_models.front();
  for (const auto& m : agg.base_models) {
    if (m->training_ref != first.training_ref) {
      throw InvalidArgumentError(
          "combine_representer: base models must share one training dataset");
    }
    if (m->order != first.order) {
      throw InvalidArgumentError("combine_representer: base model orders differ");
    }
  }

  PolyModel out;
  out.order = first.order;
  out.training_ref = first.training_ref;
  out.lambda.lambdas.assign(static_cast<size_t>(first.order) + 1, 0.0);
  out.intercept = 0.0;
  out.coeffs = Eigen::MatrixXd::Zero(first.order, first.coeffs.cols());
  for (size_t r = 0; r < agg.base_models.size(); ++r) {
    const double c = agg.coefficients[static_cast<Eigen::Index>(r)];
    out.intercept += c * agg.base_models[r]->intercept;
    out.coeffs += c * agg.base_models[r]->coeffs;
  }
  return out;
}

void save_aggregation_report_csv(const AggregatedModel& agg,
                                 const Eigen::MatrixXd& base_predictions,
                                 const Eigen::VectorXd& responses,
                                 const std::string& path) {
  const int r_count = static_cast<int>(agg.base_models.size());
  const int order = agg.base_models.empty() ? 0 : agg.base_models.front()->order;

  std::ostringstream out;
  out << "model_index";
  for (int l = 0; l <= order; ++l) out << ",lambda" << l;
  out << ",c_tilde,train_risk\n";

  for (int r = 0; r < r_count; ++r) {
    const PolyModel& m = *agg.base_models[static_cast<size_t>(r)];
    out << r;
    for (int l = 0; l <= order; ++l) {
      const auto& ls = m.lambda.lambdas;
      out << ",";
      if (l < static_cast<int>(ls.size())) out << format_label(ls[static_cast<size_t>(l)]);
    }
    out << "," << format_full(agg.coefficients[r]) << ","
        << format_full(empirical_risk(base_predictions.row(r).transpose(),
                                      responses))
        << "\n";
  }

  const Eigen::VectorXd agg_pred =
      base_predictions.transpose() * agg.coefficients;
  out << "AGG";
  for (int l = 0; l <= order; ++l) out << ",";
  out << ",," << format_full(empirical_risk(agg_pred, responses)) << "\n";
  write_file(path, out.str());

  std::ostringstream meta;
  meta << "gram_tilde_condition = " << format_full(agg.gram_tilde_condition)
       << "\n";
  meta << "ridge_used = " << format_full(agg.ridge_used) << "\n";
  meta << "models = " << r_count << "\n";
  write_file(path + ".meta", meta.str());
}

}  // namespace polyfreg

#include "polyfreg/mp_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "polyfreg/errors.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg {

void validate_lambda(const LambdaVector& lambda) {
  if (lambda.lambdas.empty()) {
    throw InvalidArgumentError("lambda vector must have at least one entry");
  }
  for (double l : lambda.lambdas) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw InvalidArgumentError("lambda entries must be finite and >= 0");
    }
  }
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_system(
    const Dataset& data, const GramMatrix& gram, const LambdaVector& lambda) {
  validate_lambda(lambda);
  const int n_samples = data.size();
  if (gram.size() != n_samples) {
    throw DataShapeError("gram matrix size does not match the dataset");
  }
  const int p = lambda.order();
  const int dim = p * n_samples + 1;
  const double inv_n = 1.0 / static_cast<double>(n_samples);

  // Entrywise Gram powers C^l, l = 1..p.
  std::vector<Eigen::MatrixXd> gram_pow;
  gram_pow.reserve(static_cast<size_t>(p));
  if (p >= 1) gram_pow.push_back(gram.entries);
  for (int l = 2; l <= p; ++l) {
    gram_pow.push_back(gram_pow.back().cwiseProduct(gram.entries));
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);

  a(0, 0) = lambda.lambdas[0] + 1.0;
  rhs(0) = data.responses.mean();
  for (int l = 1; l <= p; ++l) {
    const Eigen::MatrixXd& cl = gram_pow[static_cast<size_t>(l - 1)];
    for (int s = 0; s < n_samples; ++s) {
      a(0, 1 + (l - 1) * n_samples + s) = inv_n * cl.col(s).sum();
    }
  }

  for (int k = 1; k <= p; ++k) {
    for (int i = 0; i < n_samples; ++i) {
      const int row = 1 + (k - 1) * n_samples + i;
      a(row, 0) = 1.0;
      for (int l = 1; l <= p; ++l) {
        const Eigen::MatrixXd& cl = gram_pow[static_cast<size_t>(l - 1)];
        for (int s = 0; s < n_samples; ++s) {
          a(row, 1 + (l - 1) * n_samples + s) += cl(i, s);
        }
      }
      a(row, 1 + (k - 1) * n_samples + i) +=
          static_cast<double>(n_samples) * lambda.lambdas[static_cast<size_t>(k)];
      rhs(row) = data.responses(i);
    }
  }
  return {std::move(a), std::move(rhs)};
}

PolyModel fit(std::shared_ptr<const Dataset> data, const GramMatrix& gram,
              const LambdaVector& lambda) {
  if (!data || data->size() == 0) {
    throw InvalidArgumentError("fit needs a nonempty dataset");
  }
  auto [a, rhs] = assemble_system(*data, gram, lambda);
  if (!a.allFinite() || !rhs.allFinite()) {
    throw SolverFailureError("assembled system contains non-finite entries");
  }

  const int n_samples = data->size();
  const int p = lambda.order();
  const double tol = 1e-8 * (1.0 + rhs.norm());

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond
                                  : std::numeric_limits<double>::infinity();

  Eigen::VectorXd x = lu.solve(rhs);
  double residual = std::numeric_limits<double>::infinity();
  if (x.allFinite()) {
    // One step of iterative refinement tightens mildly ill-conditioned
    // solves to well below the acceptance tolerance.
    x += lu.solve(rhs - a * x);
    residual = (rhs - a * x).norm();
  }

  bool fallback = false;
  if (!x.allFinite() || cond >= 1e12 || residual > tol) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    Eigen::VectorXd y = cod.solve(rhs);
    if (!y.allFinite()) {
      throw SolverFailureError("representer system solve produced non-finite values");
    }
    x = y;
    residual = (rhs - a * x).norm();
    fallback = true;
  }

  PolyModel model;
  model.order = p;
  model.intercept = x(0);
  model.coeffs.resize(p, n_samples);
  for (int l = 1; l <= p; ++l) {
    for (int i = 0; i < n_samples; ++i) {
      model.coeffs(l - 1, i) = x(1 + (l - 1) * n_samples + i);
    }
  }
  model.training_ref = std::move(data);
  model.lambda = lambda;
  model.residual_norm = residual;
  // On the direct path the solve was held to tol; on the fallback path the
  // achieved least-squares residual is the best available bound.
  model.solver_tolerance = fallback ? std::max(tol, residual) : tol;
  model.condition_estimate = cond;
  model.least_squares_fallback = fallback;
  return model;
}

PolyModel fit(std::shared_ptr<const Dataset> data, const LambdaVector& lambda) {
  if (!data || data->size() == 0) {
    throw InvalidArgumentError("fit needs a nonempty dataset");
  }
  const GramMatrix g = gram(*data);
  return fit(std::move(data), g, lambda);
}

double predict(const PolyModel& model, const FunctionalSample& x_new) {
  const Dataset& train = *model.training_ref;
  if (x_new.values.size() != train.grid.nodes.size()) {
    throw DataShapeError("predict: input does not conform to the training grid");
  }
  double acc = model.intercept;
  for (int s = 0; s < train.size(); ++s) {
    const double base = inner_product(train.samples[static_cast<size_t>(s)],
                                      x_new, train.grid);
    double power = 1.0;
    for (int l = 1; l <= model.order; ++l) {
      power *= base;
      acc += model.coeffs(l - 1, s) * power;
    }
  }
  return acc;
}

Eigen::VectorXd predict_training(const PolyModel& model, const GramMatrix& gram) {
  const int n = gram.size();
  if (model.coeffs.cols() != n && model.order > 0) {
    throw DataShapeError("predict_training: gram does not match the model");
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double acc = model.intercept;
    for (int s = 0; s < n; ++s) {
      const double base = gram.entries(i, s);
      double power = 1.0;
      for (int l = 1; l <= model.order; ++l) {
        power *= base;
        acc += model.coeffs(l - 1, s) * power;
      }
    }
    out(i) = acc;
  }
  return out;
}

PolyModel pad_model_order(const PolyModel& model, int order) {
  if (order < model.order) {
    throw InvalidArgumentError("pad_model_order cannot reduce the order");
  }
  if (order == model.order) return model;
  PolyModel out = model;
  out.order = order;
  out.coeffs = Eigen::MatrixXd::Zero(order, model.coeffs.cols());
  out.coeffs.topRows(model.order) = model.coeffs;
  out.lambda.lambdas.resize(static_cast<size_t>(order) + 1, 0.0);
  return out;
}

void save_model_csv(const PolyModel& model, const std::string& path,
                    const std::string& training_data_path) {
  std::ostringstream csv;
  csv << "kind,degree,index,value\n";
  csv << "intercept,0,0," << format_full(model.intercept) << "\n";
  for (int l = 1; l <= model.order; ++l) {
    for (int i = 0; i < model.coeffs.cols(); ++i) {
      csv << "coeff," << l << "," << (i + 1) << ","
          << format_full(model.coeffs(l - 1, i)) << "\n";
    }
  }
  write_file(path, csv.str());

  std::ostringstream meta;
  meta << "order = " << model.order << "\n";
  meta << "n = " << model.sample_count() << "\n";
  meta << "lambda = ";
  for (size_t k = 0; k < model.lambda.lambdas.size(); ++k) {
    if (k) meta << ",";
    meta << format_full(model.lambda.lambdas[k]);
  }
  meta << "\n";
  if (model.training_ref) {
    const Grid& g = model.training_ref->grid;
    meta << "grid.lower = " << format_full(g.lower) << "\n";
    meta << "grid.upper = " << format_full(g.upper) << "\n";
    meta << "grid.nodes = " << g.size() << "\n";
  }
  meta << "residual_norm = " << format_full(model.residual_norm) << "\n";
  meta << "solver_tolerance = " << format_full(model.solver_tolerance) << "\n";
  meta << "condition_estimate = " << format_full(model.condition_estimate) << "\n";
  meta << "least_squares_fallback = " << (model.least_squares_fallback ? 1 : 0)
       << "\n";
  if (!training_data_path.empty()) {
    meta << "training_data = " << training_data_path << "\n";
  }
  write_file(path + ".meta", meta.str());
}

std::vector<std::pair<std::string, std::string>> read_model_sidecar(
    const std::string& model_path) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& line : read_lines(model_path + ".meta")) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw DataFormatError(model_path + ".meta: expected 'key = value', got '" +
                            t + "'");
    }
    out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

PolyModel load_model_csv(const std::string& path,
                         std::shared_ptr<const Dataset> training) {
  if (!training || training->size() == 0) {
    throw InvalidArgumentError("load_model_csv needs the training dataset");
  }

  int order = -1;
  int n = -1;
  LambdaVector lambda;
  PolyModel model;
  for (const auto& [key, value] : read_model_sidecar(path)) {
    const std::string ctx = path + ".meta:" + key;
    if (key == "order") {
      order = static_cast<int>(parse_long(value, ctx));
    } else if (key == "n") {
      n = static_cast<int>(parse_long(value, ctx));
    } else if (key == "lambda") {
      lambda.lambdas.clear();
      for (const auto& part : split_csv(value)) {
        lambda.lambdas.push_back(parse_double(part, ctx));
      }
    } else if (key == "grid.lower") {
      if (parse_double(value, ctx) != training->grid.lower) {
        throw DataShapeError(path + ": model grid.lower differs from dataset");
      }
    } else if (key == "grid.upper") {
      if (parse_double(value, ctx) != training->grid.upper) {
        throw DataShapeError(path + ": model grid.upper differs from dataset");
      }
    } else if (key == "grid.nodes") {
      if (parse_long(value, ctx) != training->grid.size()) {
        throw DataShapeError(path + ": model grid.nodes differs from dataset");
      }
    } else if (key == "residual_norm") {
      model.residual_norm = parse_double(value, ctx);
    } else if (key == "solver_tolerance") {
      model.solver_tolerance = parse_double(value, ctx);
    } else if (key == "condition_estimate") {
      model.condition_estimate = parse_double(value, ctx);
    } else if (key == "least_squares_fallback") {
      model.least_squares_fallback = parse_long(value, ctx) != 0;
    }
    // Unknown keys (e.g. training_data, aggregated) are deliberately ignored.
  }
  if (order < 0 || n <= 0) {
    throw DataFormatError(path + ".meta: missing order or n");
  }
  if (lambda.lambdas.empty()) {
    lambda.lambdas.assign(static_cast<size_t>(order) + 1, 0.0);
  }
  if (lambda.order() != order) {
    throw DataFormatError(path + ".meta: lambda length does not match order");
  }
  if (n != training->size()) {
    throw DataShapeError(path + ": model was fit on " + std::to_string(n) +
                         " samples, dataset has " +
                         std::to_string(training->size()));
  }

  model.order = order;
  model.lambda = lambda;
  model.coeffs = Eigen::MatrixXd::Zero(order, n);
  model.training_ref = std::move(training);

  const auto lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "kind,degree,index,value") {
    throw DataFormatError(path + ": expected header 'kind,degree,index,value'");
  }
  bool saw_intercept = false;
  for (size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto f = split_csv(lines[ln]);
    const std::string ctx = path + ":" + std::to_string(ln + 1);
    if (f.size() != 4) throw DataFormatError(ctx + ": expected 4 fields");
    const std::string kind = trim(f[0]);
    const long degree = parse_long(f[1], ctx);
    const long index = parse_long(f[2], ctx);
    const double value = parse_double(f[3], ctx);
    if (kind == "intercept") {
      model.intercept = value;
      saw_intercept = true;
    } else if (kind == "coeff") {
      if (degree < 1 || degree > order || index < 1 || index > n) {
        throw DataFormatError(ctx + ": coefficient out of range");
      }
      model.coeffs(degree - 1, index - 1) = value;
    } else {
      throw DataFormatError(ctx + ": unknown kind '" + kind + "'");
    }
  }
  if (!saw_intercept) throw DataFormatError(path + ": missing intercept row");
  return model;
}

}  // namespace polyfreg

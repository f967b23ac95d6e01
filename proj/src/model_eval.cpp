#include "polyfreg/model_eval.hpp"

#include <cmath>

#include "polyfreg/errors.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg {

void validate_truth(const TruthPolynomial& truth, const Grid& grid) {
  if (truth.order < 0) throw InvalidArgumentError("truth order must be >= 0");
  if (static_cast<int>(truth.terms.size()) != truth.order) {
    throw InvalidArgumentError("truth must carry one term list per degree");
  }
  for (int l = 1; l <= truth.order; ++l) {
    for (const auto& term : truth.degree_terms(l)) {
      if (term.degree() != l) {
        throw InvalidArgumentError("degree-" + std::to_string(l) +
                                   " term has " +
                                   std::to_string(term.degree()) + " factors");
      }
      for (const auto& f : term.factors) {
        if (f.size() != grid.nodes.size()) {
          throw DataShapeError("truth factor does not conform to the grid");
        }
      }
    }
  }
}

namespace {

double factor_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                    const Grid& grid) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < grid.nodes.size(); ++k) {
    acc += grid.weights[k] * f[k] * g[k];
  }
  return acc;
}

}  // namespace

double truth_inner_with_tensor(const std::vector<SeparableTerm>& degree_terms,
                               const FunctionalSample& x, const Grid& grid) {
  if (x.values.size() != grid.nodes.size()) {
    throw DataShapeError("truth_inner_with_tensor: input does not conform to grid");
  }
  double acc = 0.0;
  for (const auto& term : degree_terms) {
    double prod = term.coefficient;
    for (const auto& g : term.factors) {
      prod *= factor_inner(g, x.values, grid);
    }
    acc += prod;
  }
  return acc;
}

double truth_degree_norm_sq(const std::vector<SeparableTerm>& degree_terms,
                            const Grid& grid) {
  double acc = 0.0;
  for (const auto& ta : degree_terms) {
    for (const auto& tb : degree_terms) {
      double prod = ta.coefficient * tb.coefficient;
      for (size_t j = 0; j < ta.factors.size(); ++j) {
        prod *= factor_inner(ta.factors[j], tb.factors[j], grid);
      }
      acc += prod;
    }
  }
  return acc;
}

double l2_error(const PolyModel& model, const TruthPolynomial& truth,
                const GramMatrix& gram) {
  if (model.order != truth.order) {
    throw InvalidArgumentError("l2_error: model order " +
                               std::to_string(model.order) +
                               " does not match truth order " +
                               std::to_string(truth.order));
  }
  const Dataset& train = *model.training_ref;
  validate_truth(truth, train.grid);
  const int n = train.size();
  if (gram.size() != n) {
    throw DataShapeError("l2_error: gram does not match the training data");
  }

  const double d0 = truth.constant - model.intercept;
  double total = d0 * d0;
  Eigen::MatrixXd gram_pow;
  for (int l = 1; l <= model.order; ++l) {
    gram_pow = (l == 1) ? gram.entries : gram_pow.cwiseProduct(gram.entries).eval();
    const auto& terms = truth.degree_terms(l);
    double cross = 0.0;
    for (int i = 0; i < n; ++i) {
      cross += model.coeffs(l - 1, i) *
               truth_inner_with_tensor(terms, train.samples[static_cast<size_t>(i)],
                                       train.grid);
    }
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < n; ++s) {
        quad += model.coeffs(l - 1, i) * model.coeffs(l - 1, s) * gram_pow(i, s);
      }
    }
    total += truth_degree_norm_sq(terms, train.grid) - 2.0 * cross + quad;
  }
  return std::sqrt(std::max(0.0, total));
}

double model_l2_distance(const PolyModel& a, const PolyModel& b,
                         const GramMatrix& gram) {
  if (a.order != b.order) {
    throw InvalidArgumentError("model_l2_distance: order mismatch");
  }
  if (a.coeffs.cols() != b.coeffs.cols()) {
    throw DataShapeError("model_l2_distance: models use different sample counts");
  }
  const int n = static_cast<int>(a.coeffs.cols());
  const double d0 = a.intercept - b.intercept;
  double total = d0 * d0;
  Eigen::MatrixXd gram_pow;
  for (int l = 1; l <= a.order; ++l) {
    gram_pow = (l == 1) ? gram.entries : gram_pow.cwiseProduct(gram.entries).eval();
    double quad = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < n; ++s) {
        quad += (a.coeffs(l - 1, i) - b.coeffs(l - 1, i)) *
                (a.coeffs(l - 1, s) - b.coeffs(l - 1, s)) * gram_pow(i, s);
      }
    }
    total += quad;
  }
  return std::sqrt(std::max(0.0, total));
}

double empirical_risk(const Eigen::VectorXd& predictions,
                      const Eigen::VectorXd& responses) {
  if (predictions.size() != responses.size()) {
    throw DataShapeError("empirical_risk: length mismatch");
  }
  if (predictions.size() == 0) {
    throw InvalidArgumentError("empirical_risk: empty input");
  }
  return (responses - predictions).squaredNorm() /
         static_cast<double>(predictions.size());
}

namespace {

Eigen::VectorXd build_factor(const std::string& spec, const Grid& grid,
                             const std::string& ctx) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw DataFormatError(ctx + ": factor spec '" + spec +
                          "' is not of the form kind:value");
  }
  const std::string kind = trim(spec.substr(0, colon));
  const double v = parse_double(spec.substr(colon + 1), ctx);
  Eigen::VectorXd f(grid.nodes.size());
  if (kind == "cos") {
    for (Eigen::Index k = 0; k < grid.nodes.size(); ++k) {
      f[k] = std::cos(v * grid.nodes[k]);
    }
  } else if (kind == "const") {
    f.setConstant(v);
  } else {
    throw DataFormatError(ctx + ": unknown factor kind '" + kind + "'");
  }
  return f;
}

}  // namespace

TruthPolynomial load_truth_csv(const std::string& path, const Grid& grid) {
  TruthPolynomial truth;
  const auto lines = read_lines(path);
  for (size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string t = trim(lines[ln]);
    if (t.empty() || t[0] == '#') continue;
    if (ln == 0 && t.rfind("degree,", 0) == 0) continue;  // optional header
    const auto f = split_csv(t);
    const std::string ctx = path + ":" + std::to_string(ln + 1);
    if (f.size() < 2) throw DataFormatError(ctx + ": expected degree,coefficient");
    const long degree = parse_long(f[0], ctx);
    const double coeff = parse_double(f[1], ctx);
    if (degree == 0) {
      if (f.size() != 2) {
        throw DataFormatError(ctx + ": degree-0 rows take no factor specs");
      }
      truth.constant += coeff;
      continue;
    }
    if (degree < 1 || static_cast<long>(f.size()) != 2 + degree) {
      throw DataFormatError(ctx + ": degree-" + std::to_string(degree) +
                            " row needs exactly " + std::to_string(degree) +
                            " factor specs");
    }
    SeparableTerm term;
    term.coefficient = coeff;
    for (long j = 0; j < degree; ++j) {
      term.factors.push_back(build_factor(trim(f[2 + j]), grid, ctx));
    }
    if (static_cast<long>(truth.terms.size()) < degree) {
      truth.terms.resize(static_cast<size_t>(degree));
      truth.order = static_cast<int>(degree);
    }
    truth.terms[static_cast<size_t>(degree - 1)].push_back(std::move(term));
  }
  validate_truth(truth, grid);
  return truth;
}

}  // namespace polyfreg

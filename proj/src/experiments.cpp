#include "polyfreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "polyfreg/errors.hpp"
#include "polyfreg/parallel.hpp"
#include "polyfreg/textio.hpp"

namespace polyfreg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void validate_toy_config(const ToyConfig& config) {
  if (config.n_max < 1) throw InvalidArgumentError("toy n_max must be >= 1");
  if (config.grid_nodes < 2) {
    throw InvalidArgumentError("toy grid_nodes must be >= 2");
  }
  if (!(config.noise_sigma >= 0.0)) {
    throw InvalidArgumentError("toy noise_sigma must be >= 0");
  }
  if (config.order < 1) throw InvalidArgumentError("toy order must be >= 1");
  for (const auto& lv : config.lambda_grid) {
    validate_lambda(lv);
    if (lv.order() != config.order) {
      throw InvalidArgumentError(
          "lambda grid entry order does not match the configured order");
    }
  }
}

std::vector<LambdaVector> cartesian_lambda_grid(
    const std::vector<std::vector<double>>& per_degree) {
  if (per_degree.empty()) {
    throw InvalidArgumentError("lambda grid needs at least one degree list");
  }
  size_t total = 1;
  for (const auto& list : per_degree) {
    if (list.empty()) {
      throw InvalidArgumentError("lambda grid has an empty per-degree list");
    }
    total *= list.size();
  }
  std::vector<LambdaVector> out;
  out.reserve(total);
  std::vector<size_t> pick(per_degree.size(), 0);
  for (size_t c = 0; c < total; ++c) {
    LambdaVector lv;
    lv.lambdas.resize(per_degree.size());
    for (size_t d = 0; d < per_degree.size(); ++d) {
      lv.lambdas[d] = per_degree[d][pick[d]];
    }
    validate_lambda(lv);
    out.push_back(std::move(lv));
    // odometer increment, last degree fastest
    for (size_t d = per_degree.size(); d-- > 0;) {
      if (++pick[d] < per_degree[d].size()) break;
      pick[d] = 0;
    }
  }
  return out;
}

std::vector<LambdaVector> default_toy_lambda_grid(int order) {
  if (order < 0) throw InvalidArgumentError("order must be >= 0");
  const std::vector<double> values = {1e-5, 1e-7, 1e-9};
  return cartesian_lambda_grid(
      std::vector<std::vector<double>>(static_cast<size_t>(order) + 1, values));
}

TruthPolynomial toy_truth(const Grid& grid) {
  auto cosine = [&grid](double k) {
    Eigen::VectorXd f(grid.nodes.size());
    for (Eigen::Index j = 0; j < grid.nodes.size(); ++j) {
      f[j] = std::cos(k * grid.nodes[j]);
    }
    return f;
  };
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(grid.nodes.size());

  TruthPolynomial truth;
  truth.order = 2;
  truth.constant = 2.0;
  truth.terms.resize(2);
  truth.terms[0].push_back({1.0, {ones}});
  truth.terms[0].push_back({4.0, {cosine(1.0)}});
  truth.terms[0].push_back({1.0, {cosine(5.0)}});
  truth.terms[1].push_back({1.0, {cosine(3.0), ones}});
  truth.terms[1].push_back({1.0, {cosine(2.0), cosine(2.0)}});
  return truth;
}

Dataset toy_from_coefficients(const Eigen::MatrixXd& xi, const Grid& grid) {
  const int n = static_cast<int>(xi.rows());
  const int orders = static_cast<int>(xi.cols());
  if (n < 1 || orders < 1) {
    throw InvalidArgumentError("toy_from_coefficients: empty coefficient matrix");
  }
  const TruthPolynomial truth = toy_truth(grid);

  Dataset data;
  data.grid = grid;
  data.responses.resize(n);
  data.samples.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    FunctionalSample s;
    s.id = i + 1;
    s.values = Eigen::VectorXd::Zero(grid.nodes.size());
    for (int k = 0; k < orders; ++k) {
      for (Eigen::Index j = 0; j < grid.nodes.size(); ++j) {
        s.values[j] += xi(i, k) * std::cos(static_cast<double>(k) * grid.nodes[j]);
      }
    }
    double y = truth.constant;
    y += truth_inner_with_tensor(truth.degree_terms(1), s, grid);
    y += truth_inner_with_tensor(truth.degree_terms(2), s, grid);
    data.responses[i] = y;
    data.samples.push_back(std::move(s));
  }
  return data;
}

Dataset toy_sample(const ToyConfig& config, int n) {
  validate_toy_config(config);
  if (n < 1) throw InvalidArgumentError("toy_sample needs n >= 1");
  const Grid grid = build_grid(0.0, kTwoPi, config.grid_nodes);

  Eigen::MatrixXd xi(n, 6);
  for (int i = 0; i < n; ++i) {
    Stream stream(config.seed, rng_domain::kToyCoefficients,
                  static_cast<std::uint64_t>(i));
    for (int k = 0; k < 6; ++k) xi(i, k) = stream.uniform(-1.0, 1.0);
  }
  Dataset data = toy_from_coefficients(xi, grid);
  if (config.noise_sigma > 0.0) {
    for (int i = 0; i < n; ++i) {
      Stream stream(config.seed, rng_domain::kToyNoise,
                    static_cast<std::uint64_t>(i));
      data.responses[i] += config.noise_sigma * stream.normal();
    }
  }
  return data;
}

ErrorCurveResult error_curve(const ToyConfig& config, int threads) {
  validate_toy_config(config);
  ErrorCurveResult result;
  result.lambda_grid = config.lambda_grid.empty()
                           ? default_toy_lambda_grid(config.order)
                           : config.lambda_grid;
  for (const auto& lv : result.lambda_grid) {
    if (lv.order() != config.order) {
      throw InvalidArgumentError(
          "lambda grid entry order does not match the configured order");
    }
  }

  const int r_count = static_cast<int>(result.lambda_grid.size());
  const Dataset full = toy_sample(config, config.n_max);
  const GramMatrix full_gram = gram(full);
  const TruthPolynomial truth = toy_truth(full.grid);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // errors[n-1] = R single-model errors followed by the aggregate's.
  std::vector<std::vector<double>> errors(
      static_cast<size_t>(config.n_max),
      std::vector<double>(static_cast<size_t>(r_count) + 1, nan));

  parallel_for(config.n_max, threads, [&](int j) {
    const int n = j + 1;
    auto prefix = std::make_shared<Dataset>();
    prefix->grid = full.grid;
    prefix->samples.assign(full.samples.begin(), full.samples.begin() + n);
    prefix->responses = full.responses.head(n);
    GramMatrix pgram;
    pgram.entries = full_gram.entries.topLeftCorner(n, n);

    std::vector<std::shared_ptr<const PolyModel>> fitted;
    fitted.reserve(static_cast<size_t>(r_count));
    for (int r = 0; r < r_count; ++r) {
      try {
        PolyModel m = fit(prefix, pgram, result.lambda_grid[static_cast<size_t>(r)]);
        if (m.order < truth.order) m = pad_model_order(m, truth.order);
        errors[static_cast<size_t>(j)][static_cast<size_t>(r)] =
            l2_error(m, truth, pgram);
        fitted.push_back(std::make_shared<const PolyModel>(std::move(m)));
      } catch (const Error&) {
        // cell stays NaN; the sweep continues
      }
    }
    if (!fitted.empty()) {
      try {
        const AggregatedModel agg = aggregate(fitted, *prefix);
        const PolyModel combined = combine_representer(agg);
        errors[static_cast<size_t>(j)][static_cast<size_t>(r_count)] =
            l2_error(combined, truth, pgram);
      } catch (const Error&) {
        // aggregate cell stays NaN
      }
    }
  });

  result.total_cells = config.n_max * (r_count + 1);
  for (int j = 0; j < config.n_max; ++j) {
    for (int r = 0; r < r_count; ++r) {
      const double e = errors[static_cast<size_t>(j)][static_cast<size_t>(r)];
      result.cells.push_back({j + 1, r, e});
      if (std::isnan(e)) ++result.failed_cells;
    }
    const double e = errors[static_cast<size_t>(j)][static_cast<size_t>(r_count)];
    result.cells.push_back({j + 1, -1, e});
    if (std::isnan(e)) ++result.failed_cells;
  }
  return result;
}

void save_error_curve_csv(const ErrorCurveResult& result,
                          const std::string& path) {
  if (result.lambda_grid.empty()) {
    throw InvalidArgumentError("error curve has no lambda grid");
  }
  const int order = result.lambda_grid.front().order();
  std::ostringstream out;
  out << "N";
  for (int l = 0; l <= order; ++l) out << ",lambda" << l;
  out << ",error\n";
  for (const auto& cell : result.cells) {
    out << cell.n;
    if (cell.lambda_index >= 0) {
      const auto& ls =
          result.lambda_grid[static_cast<size_t>(cell.lambda_index)].lambdas;
      for (double l : ls) out << "," << format_label(l);
    } else {
      for (int l = 0; l <= order; ++l) out << ",AGG";
    }
    out << "," << format_full(cell.error) << "\n";
  }
  write_file(path, out.str());
}

double rank_auc(const std::vector<double>& scores,
                const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) {
    throw DataShapeError("rank_auc: scores and labels differ in length");
  }
  const size_t n = scores.size();
  std::uint64_t n_pos = 0;
  for (bool p : positive) n_pos += p ? 1 : 0;
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InvalidArgumentError("rank_auc needs both classes present");
  }

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Doubled mid-ranks keep everything in exact integer arithmetic: the tie
  // group occupying 0-based sorted slots [lo, hi) has doubled mid-rank
  // lo + hi + 1 (1-based ranks lo+1..hi averaged, times two).
  double sum_pos_rank2 = 0.0;
  size_t lo = 0;
  while (lo < n) {
    size_t hi = lo + 1;
    while (hi < n && scores[idx[hi]] == scores[idx[lo]]) ++hi;
    const double rank2 = static_cast<double>(lo + hi + 1);
    for (size_t k = lo; k < hi; ++k) {
      if (positive[idx[k]]) sum_pos_rank2 += rank2;
    }
    lo = hi;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (sum_pos_rank2 - np * (np + 1.0)) / (2.0 * np * nn);
}

BinaryMetrics score_metrics(const std::vector<double>& scores,
                            const std::vector<bool>& positive,
                            double threshold) {
  if (scores.size() != positive.size()) {
    throw DataShapeError("score_metrics: scores and labels differ in length");
  }
  BinaryMetrics m;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool called = scores[i] > threshold;
    if (positive[i]) {
      called ? ++m.tp : ++m.fn;
    } else {
      called ? ++m.fp : ++m.tn;
    }
  }
  if (m.tp + m.fn > 0) {
    m.sensitivity = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  }
  if (m.tn + m.fp > 0) {
    m.specificity = static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp);
  }
  const long n_pos = m.tp + m.fn;
  const long n_neg = m.tn + m.fp;
  if (n_pos > 0 && n_neg > 0) {
    m.auc = rank_auc(scores, positive);

    // ROC sweep: thresholds pass over the observed scores from high to low;
    // each tie group adds one point. Trapezoidal area equals the rank AUC.
    std::vector<size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    m.roc_points.emplace_back(0.0, 0.0);
    long tp_c = 0;
    long fp_c = 0;
    size_t lo = 0;
    while (lo < idx.size()) {
      size_t hi = lo + 1;
      while (hi < idx.size() && scores[idx[hi]] == scores[idx[lo]]) ++hi;
      for (size_t k = lo; k < hi; ++k) {
        positive[idx[k]] ? ++tp_c : ++fp_c;
      }
      m.roc_points.emplace_back(
          static_cast<double>(fp_c) / static_cast<double>(n_neg),
          static_cast<double>(tp_c) / static_cast<double>(n_pos));
      lo = hi;
    }
  }
  return m;
}

namespace {

std::vector<bool> positive_labels(const Dataset& data) {
  std::vector<bool> out(static_cast<size_t>(data.size()));
  for (int i = 0; i < data.size(); ++i) out[static_cast<size_t>(i)] = data.responses[i] > 0.0;
  return out;
}

void check_label_scale(const Dataset& data, const std::string& what) {
  static constexpr double kAllowed[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < data.size(); ++i) {
    bool ok = false;
    for (double a : kAllowed) {
      if (std::abs(data.responses[i] - a) <= 1e-9) ok = true;
    }
    if (!ok) {
      throw InvalidArgumentError(what + ": label " +
                                 format_label(data.responses[i]) +
                                 " is not on the scale {0, 0.25, 0.5, 0.75, 1}");
    }
  }
}

}  // namespace

ClassifyResult classify_eval(const Dataset& train, const Dataset& test,
                             const std::vector<LambdaVector>& lambda_grid,
                             int order, double threshold) {
  if (lambda_grid.empty()) {
    throw InvalidArgumentError("classify_eval needs a nonempty lambda grid");
  }
  for (const auto& lv : lambda_grid) {
    if (lv.order() != order) {
      throw InvalidArgumentError(
          "classify_eval: lambda grid entry does not match the order");
    }
  }
  check_label_scale(train, "train");
  check_label_scale(test, "test");
  if (!same_grid(train.grid, test.grid)) {
    throw DataShapeError("classify_eval: train and test grids differ");
  }

  auto train_ptr = std::make_shared<const Dataset>(train);
  const GramMatrix train_gram = gram(*train_ptr);
  std::vector<std::shared_ptr<const PolyModel>> models;
  models.reserve(lambda_grid.size());
  for (const auto& lv : lambda_grid) {
    models.push_back(
        std::make_shared<const PolyModel>(fit(train_ptr, train_gram, lv)));
  }
  const AggregatedModel agg = aggregate(models, *train_ptr);

  const std::vector<bool> truth = positive_labels(test);
  ClassifyResult result;
  result.per_model.reserve(models.size());
  std::vector<double> scores(static_cast<size_t>(test.size()));
  for (const auto& m : models) {
    for (int i = 0; i < test.size(); ++i) {
      scores[static_cast<size_t>(i)] = predict(*m, test.samples[static_cast<size_t>(i)]);
    }
    result.per_model.push_back(score_metrics(scores, truth, threshold));
  }
  for (int i = 0; i < test.size(); ++i) {
    scores[static_cast<size_t>(i)] =
        predict_aggregated(agg, test.samples[static_cast<size_t>(i)]);
  }
  result.aggregated = score_metrics(scores, truth, threshold);
  return result;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& dataset,
                                             int train_pos, int train_neg,
                                             Stream& stream) {
  if (train_pos < 0 || train_neg < 0) {
    throw InvalidArgumentError("stratified_split: negative stratum size");
  }
  std::vector<int> pos;
  std::vector<int> neg;
  for (int i = 0; i < dataset.size(); ++i) {
    (dataset.responses[i] > 0.0 ? pos : neg).push_back(i);
  }
  if (static_cast<int>(pos.size()) < train_pos ||
      static_cast<int>(neg.size()) < train_neg) {
    throw InsufficientStratumError(
        "stratified_split: asked for " + std::to_string(train_pos) + " of " +
        std::to_string(pos.size()) + " positives and " +
        std::to_string(train_neg) + " of " + std::to_string(neg.size()) +
        " negatives");
  }

  // Partial Fisher-Yates on each stratum; positives drawn first so the
  // consumed stream layout is fixed.
  auto draw = [&stream](std::vector<int>& bucket, int take) {
    for (int j = 0; j < take; ++j) {
      const auto remaining = static_cast<std::uint64_t>(bucket.size() - j);
      const auto pick = j + static_cast<int>(stream.uniform_index(remaining));
      std::swap(bucket[static_cast<size_t>(j)], bucket[static_cast<size_t>(pick)]);
    }
  };
  draw(pos, train_pos);
  draw(neg, train_neg);

  std::vector<bool> in_train(static_cast<size_t>(dataset.size()), false);
  for (int j = 0; j < train_pos; ++j) in_train[static_cast<size_t>(pos[j])] = true;
  for (int j = 0; j < train_neg; ++j) in_train[static_cast<size_t>(neg[j])] = true;

  Dataset train;
  Dataset test;
  train.grid = dataset.grid;
  test.grid = dataset.grid;
  std::vector<double> y_train;
  std::vector<double> y_test;
  for (int i = 0; i < dataset.size(); ++i) {
    Dataset& dst = in_train[static_cast<size_t>(i)] ? train : test;
    std::vector<double>& ys = in_train[static_cast<size_t>(i)] ? y_train : y_test;
    dst.samples.push_back(dataset.samples[static_cast<size_t>(i)]);
    ys.push_back(dataset.responses[i]);
  }
  train.responses = Eigen::Map<Eigen::VectorXd>(y_train.data(),
                                                static_cast<Eigen::Index>(y_train.size()));
  test.responses = Eigen::Map<Eigen::VectorXd>(y_test.data(),
                                               static_cast<Eigen::Index>(y_test.size()));
  return {std::move(train), std::move(test)};
}

Dataset synthetic_surrogate(std::uint64_t seed, const Grid& grid,
                            int n_vessels, int n_positive) {
  if (n_vessels < 1 || n_positive < 0 || n_positive > n_vessels) {
    throw InvalidArgumentError("synthetic_surrogate: bad vessel counts");
  }
  static constexpr double kSeverities[] = {1.0, 0.75, 0.5, 0.25};
  const double span = grid.upper - grid.lower;

  Dataset data;
  data.grid = grid;
  data.responses.resize(n_vessels);
  data.samples.reserve(static_cast<size_t>(n_vessels));
  for (int i = 0; i < n_vessels; ++i) {
    Stream stream(seed, rng_domain::kSurrogate, static_cast<std::uint64_t>(i));
    const double base = 5.0 + 0.3 * stream.normal();
    double amp[3];
    double phase[3];
    for (int j = 0; j < 3; ++j) {
      amp[j] = stream.uniform(-0.4, 0.4);
      phase[j] = stream.uniform(0.0, kTwoPi);
    }
    const bool is_positive = i < n_positive;
    const double severity = is_positive ? kSeverities[i % 4] : 0.0;
    double center = 0.0;
    double width = 1.0;
    if (is_positive) {
      center = grid.lower + span * stream.uniform(0.15, 0.85);
      width = span * stream.uniform(0.035, 0.11);
    }

    FunctionalSample s;
    s.id = i + 1;
    s.values.resize(grid.nodes.size());
    for (Eigen::Index k = 0; k < grid.nodes.size(); ++k) {
      const double t = grid.nodes[k];
      double d = base;
      for (int j = 0; j < 3; ++j) {
        d += amp[j] *
             std::cos(kTwoPi * static_cast<double>(j + 1) * (t - grid.lower) / span +
                      phase[j]);
      }
      if (is_positive) {
        const double z = (t - center) / width;
        d -= severity * 0.8 * base * std::exp(-0.5 * z * z);
      }
      s.values[k] = std::max(d, 0.3);
    }
    data.samples.push_back(std::move(s));
    data.responses[i] = severity;
  }
  return data;
}

}  // namespace polyfreg

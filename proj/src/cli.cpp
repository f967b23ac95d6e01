#include "polyfreg/cli.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyfreg/aggregation.hpp"
#include "polyfreg/errors.hpp"
#include "polyfreg/experiments.hpp"
#include "polyfreg/funcdata.hpp"
#include "polyfreg/mp_solver.hpp"
#include "polyfreg/parallel.hpp"
#include "polyfreg/runconfig.hpp"
#include "polyfreg/svg.hpp"
#include "polyfreg/textio.hpp"
#include "polyfreg/version.hpp"

namespace polyfreg::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const char* command_name(Command c) {
  switch (c) {
    case Command::kToyCurve: return "toy-curve";
    case Command::kFit: return "fit";
    case Command::kAggregate: return "aggregate";
    case Command::kEvaluate: return "evaluate";
    case Command::kPredict: return "predict";
  }
  return "?";
}

RunConfig resolve_config(const RunManifest& m) {
  RunConfig cfg;
  if (m.config_path) cfg = RunConfig::parse_file(*m.config_path);
  for (const auto& [key, value] : m.overrides) cfg.set(key, value);
  if (m.seed) cfg.set("seed", std::to_string(*m.seed));
  return cfg;
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
  const long seed = cfg.get_long("seed", 0);
  if (seed < 0) throw InvalidArgumentError("seed must be >= 0");
  return static_cast<std::uint64_t>(seed);
}

int resolve_threads(const RunConfig& cfg) {
  const long threads = cfg.get_long("threads", 0);
  if (threads < 0) throw InvalidArgumentError("threads must be >= 1");
  return threads > 0 ? static_cast<int>(threads) : default_thread_count();
}

int resolve_order(const RunConfig& cfg, const std::string& key) {
  const long order = cfg.get_long(key, 2);
  if (order < 1 || order > 2) {
    throw InvalidArgumentError(key + " must be 1 or 2");
  }
  return static_cast<int>(order);
}

// Per-degree candidate lists from a grid spec; a single list is replicated
// across all degrees.
std::vector<std::vector<double>> resolve_degree_lists(
    const RunConfig& cfg, const std::string& key, int order,
    const std::string& fallback_spec) {
  std::vector<std::vector<double>> lists =
      parse_lambda_grid_spec(cfg.get_string(key, fallback_spec));
  if (lists.size() == 1 && order > 0) {
    lists.assign(static_cast<size_t>(order) + 1, lists.front());
  }
  if (static_cast<int>(lists.size()) != order + 1) {
    throw InvalidArgumentError(
        key + ": expected " + std::to_string(order + 1) +
        " per-degree lists (or one list for all degrees), got " +
        std::to_string(lists.size()));
  }
  return lists;
}

// A single lambda vector for `fit`: either one value per degree
// ("1e-3,1e-4,1e-5"), one value for all degrees ("1e-3"), or per-degree
// singleton lists ("1e-3;1e-4;1e-5").
LambdaVector resolve_single_lambda(const RunConfig& cfg, const std::string& key,
                                   int order, const std::string& fallback_spec) {
  const std::vector<std::vector<double>> lists =
      parse_lambda_grid_spec(cfg.get_string(key, fallback_spec));
  std::vector<double> values;
  if (lists.size() == 1 &&
      static_cast<int>(lists.front().size()) == order + 1) {
    values = lists.front();
  } else if (lists.size() == 1 && lists.front().size() == 1) {
    values.assign(static_cast<size_t>(order) + 1, lists.front().front());
  } else if (static_cast<int>(lists.size()) == order + 1) {
    for (const auto& list : lists) {
      if (list.size() != 1) {
        throw InvalidArgumentError(key + ": needs exactly one value per degree");
      }
      values.push_back(list.front());
    }
  } else {
    throw InvalidArgumentError(key + ": needs exactly one value per degree");
  }
  LambdaVector lambda{values};
  validate_lambda(lambda);
  return lambda;
}

Grid resolve_data_grid(const RunConfig& cfg) {
  const double lower = cfg.get_double("data.lower", 0.0);
  const double upper = cfg.get_double("data.upper", 140.0);
  const long nodes = cfg.get_long("data.nodes", 256);
  return build_grid(lower, upper, static_cast<int>(nodes));
}

fs::path ensure_out_dir(const RunManifest& m) {
  fs::path dir(m.output_dir.empty() ? "." : m.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_run_record(const fs::path& dir, const RunManifest& m,
                      std::uint64_t seed, int threads,
                      const std::map<std::string, std::string>& resolved,
                      const std::vector<std::string>& outputs,
                      Clock::time_point started) {
  const double wall_ms =
      std::chrono::duration<double, std::milli>(Clock::now() - started).count();
  nlohmann::json record;
  record["command"] = command_name(m.command);
  record["version"] = kVersion;
  record["seed"] = seed;
  record["threads"] = threads;
  record["config"] = resolved;
  record["inputs"] = m.inputs;
  record["outputs"] = outputs;
  record["wall_time_ms"] = wall_ms;
  write_file((dir / "manifest.json").string(), record.dump(2) + "\n");
}

const char* series_color(size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                   "#bcbd22", "#17becf"};
  return kPalette[i % 10];
}

std::string model_label(const LambdaVector& lambda) {
  std::string label;
  for (size_t d = 0; d < lambda.lambdas.size(); ++d) {
    if (d) label += ';';
    label += "l" + std::to_string(d) + "=" + format_label(lambda.lambdas[d]);
  }
  return label;
}

}  // namespace

int run_toy_curve(const RunManifest& m) {
  const auto started = Clock::now();
  const RunConfig cfg = resolve_config(m);
  const std::uint64_t seed = resolve_seed(cfg);
  const int threads = resolve_threads(cfg);

  ToyConfig toy;
  toy.seed = seed;
  toy.n_max = static_cast<int>(cfg.get_long("toy.n_max", 40));
  toy.order = resolve_order(cfg, "toy.order");
  toy.grid_nodes = static_cast<int>(cfg.get_long("toy.grid_nodes", 256));
  toy.noise_sigma = cfg.get_double("toy.noise_sigma", 0.0);
  const std::string lambda_spec =
      cfg.get_string("toy.lambda_grid", "1e-5,1e-7,1e-9");
  toy.lambda_grid = cartesian_lambda_grid(
      resolve_degree_lists(cfg, "toy.lambda_grid", toy.order, "1e-5,1e-7,1e-9"));
  validate_toy_config(toy);

  const ErrorCurveResult result = error_curve(toy, threads);

  const fs::path dir = ensure_out_dir(m);
  save_error_curve_csv(result, (dir / "error_curve.csv").string());

  const size_t r_count = result.lambda_grid.size();
  svg::LineChart chart;
  chart.title = "Reconstruction error vs training sample count";
  chart.x_label = "N";
  chart.y_label = "L2 error";
  chart.series.resize(r_count + 1);
  for (size_t r = 0; r < r_count; ++r) {
    chart.series[r].color = series_color(r);
    chart.series[r].stroke_width = 1.0;
  }
  chart.series[r_count].color = "#000000";
  chart.series[r_count].stroke_width = 3.0;
  for (const auto& cell : result.cells) {
    const size_t idx =
        cell.lambda_index >= 0 ? static_cast<size_t>(cell.lambda_index) : r_count;
    chart.series[idx].points.emplace_back(static_cast<double>(cell.n),
                                          cell.error);
  }
  chart.reference_lines.push_back({std::numbers::pi, "3.14", "#c03030"});
  chart.save((dir / "error_curve.svg").string());

  const std::map<std::string, std::string> resolved = {
      {"toy.n_max", std::to_string(toy.n_max)},
      {"toy.order", std::to_string(toy.order)},
      {"toy.grid_nodes", std::to_string(toy.grid_nodes)},
      {"toy.noise_sigma", format_full(toy.noise_sigma)},
      {"toy.lambda_grid", lambda_spec},
  };
  write_run_record(dir, m, seed, threads, resolved,
                   {"error_curve.csv", "error_curve.svg"}, started);

  if (10 * result.failed_cells > result.total_cells) {
    std::cerr << "polyfreg: " << result.failed_cells << " of "
              << result.total_cells << " cells failed to solve\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int run_evaluate(const RunManifest& m) {
  const auto started = Clock::now();
  const RunConfig cfg = resolve_config(m);
  const std::uint64_t seed = resolve_seed(cfg);
  const int threads = resolve_threads(cfg);

  const int order = resolve_order(cfg, "eval.order");
  const int runs = static_cast<int>(cfg.get_long("eval.runs", 10));
  if (runs < 1) throw InvalidArgumentError("eval.runs must be >= 1");
  const double threshold = cfg.get_double("eval.threshold", 0.5);
  const std::string lambda_spec =
      cfg.get_string("eval.lambda_grid", "1e-2,1e-1,1");
  const std::vector<LambdaVector> lambda_grid = cartesian_lambda_grid(
      resolve_degree_lists(cfg, "eval.lambda_grid", order, "1e-2,1e-1,1"));
  const int train_pos = static_cast<int>(cfg.get_long("eval.train_pos", 4));
  const int train_neg = static_cast<int>(cfg.get_long("eval.train_neg", 16));

  const Grid grid = resolve_data_grid(cfg);
  const bool surrogate = cfg.get_bool("eval.synthetic_surrogate", false);
  Dataset data;
  std::string data_source;
  if (surrogate) {
    const int vessels =
        static_cast<int>(cfg.get_long("eval.surrogate_vessels", 40));
    const int positives =
        static_cast<int>(cfg.get_long("eval.surrogate_positives", 7));
    data = synthetic_surrogate(seed, grid, vessels, positives);
    data_source = "synthetic-surrogate";
  } else if (!m.inputs.empty()) {
    data = load_dataset_csv(m.inputs.front(), grid);
    data_source = m.inputs.front();
  } else {
    throw InvalidArgumentError(
        "evaluate needs a dataset CSV path or the synthetic-surrogate flag");
  }

  std::vector<ClassifyResult> results(static_cast<size_t>(runs));
  parallel_for(runs, threads, [&](int r) {
    Stream stream(seed, rng_domain::kSplit, static_cast<std::uint64_t>(r));
    auto [train, test] = stratified_split(data, train_pos, train_neg, stream);
    results[static_cast<size_t>(r)] =
        classify_eval(train, test, lambda_grid, order, threshold);
  });

  // SE / SP / AUC averaged over the runs in which they are defined.
  struct Acc {
    double sum[3] = {0.0, 0.0, 0.0};
    long count[3] = {0, 0, 0};
  };
  const size_t r_models = lambda_grid.size();
  std::vector<Acc> acc(r_models + 1);
  auto absorb = [](Acc& a, const BinaryMetrics& bm) {
    const std::optional<double> vals[3] = {bm.sensitivity, bm.specificity,
                                           bm.auc};
    for (int k = 0; k < 3; ++k) {
      if (vals[k]) {
        a.sum[k] += *vals[k];
        ++a.count[k];
      }
    }
  };
  for (const auto& res : results) {
    for (size_t i = 0; i < r_models; ++i) absorb(acc[i], res.per_model[i]);
    absorb(acc[r_models], res.aggregated);
  }

  std::ostringstream csv;
  csv << "model,SE,SP,AUC\n";
  auto emit_row = [&csv](const std::string& label, const Acc& a) {
    csv << label;
    for (int k = 0; k < 3; ++k) {
      const double mean = a.count[k] > 0
                              ? a.sum[k] / static_cast<double>(a.count[k])
                              : std::numeric_limits<double>::quiet_NaN();
      csv << "," << format_short(mean);
    }
    csv << "\n";
  };
  for (size_t i = 0; i < r_models; ++i) {
    emit_row(model_label(lambda_grid[i]), acc[i]);
  }
  emit_row("AGG", acc[r_models]);

  const fs::path dir = ensure_out_dir(m);
  write_file((dir / "metrics.csv").string(), csv.str());

  svg::LineChart roc;
  roc.title = "ROC, first split";
  roc.x_label = "1 - specificity";
  roc.y_label = "sensitivity";
  svg::Series diagonal;
  diagonal.points = {{0.0, 0.0}, {1.0, 1.0}};
  diagonal.color = "#a0a0a0";
  diagonal.dashed = true;
  roc.series.push_back(diagonal);
  const ClassifyResult& first = results.front();
  for (size_t i = 0; i < first.per_model.size(); ++i) {
    if (first.per_model[i].roc_points.empty()) continue;
    svg::Series s;
    s.points = first.per_model[i].roc_points;
    s.color = series_color(i);
    roc.series.push_back(std::move(s));
  }
  if (!first.aggregated.roc_points.empty()) {
    svg::Series s;
    s.points = first.aggregated.roc_points;
    s.color = "#000000";
    s.stroke_width = 3.0;
    roc.series.push_back(std::move(s));
  }
  roc.save((dir / "roc.svg").string());

  const std::map<std::string, std::string> resolved = {
      {"eval.order", std::to_string(order)},
      {"eval.runs", std::to_string(runs)},
      {"eval.threshold", format_full(threshold)},
      {"eval.lambda_grid", lambda_spec},
      {"eval.train_pos", std::to_string(train_pos)},
      {"eval.train_neg", std::to_string(train_neg)},
      {"eval.synthetic_surrogate", surrogate ? "true" : "false"},
      {"eval.data_source", data_source},
      {"data.lower", format_full(grid.lower)},
      {"data.upper", format_full(grid.upper)},
      {"data.nodes", std::to_string(grid.size())},
  };
  write_run_record(dir, m, seed, threads, resolved, {"metrics.csv", "roc.svg"},
                   started);
  return kExitOk;
}

int run_fit(const RunManifest& m) {
  const auto started = Clock::now();
  const RunConfig cfg = resolve_config(m);
  const std::uint64_t seed = resolve_seed(cfg);
  const int threads = resolve_threads(cfg);

  if (m.inputs.empty()) {
    throw InvalidArgumentError("fit needs a dataset CSV path");
  }
  const int order = resolve_order(cfg, "fit.order");
  const LambdaVector lambda =
      resolve_single_lambda(cfg, "fit.lambda", order, "1e-3");
  const Grid grid = resolve_data_grid(cfg);
  auto data =
      std::make_shared<const Dataset>(load_dataset_csv(m.inputs.front(), grid));

  const PolyModel model = fit(data, lambda);

  const fs::path dir = ensure_out_dir(m);
  save_model_csv(model, (dir / "model.csv").string(), m.inputs.front());

  const std::map<std::string, std::string> resolved = {
      {"fit.order", std::to_string(order)},
      {"fit.lambda", cfg.get_string("fit.lambda", "1e-3")},
      {"data.lower", format_full(grid.lower)},
      {"data.upper", format_full(grid.upper)},
      {"data.nodes", std::to_string(grid.size())},
  };
  write_run_record(dir, m, seed, threads, resolved,
                   {"model.csv", "model.csv.meta"}, started);
  return kExitOk;
}

int run_aggregate(const RunManifest& m) {
  const auto started = Clock::now();
  const RunConfig cfg = resolve_config(m);
  const std::uint64_t seed = resolve_seed(cfg);
  const int threads = resolve_threads(cfg);

  if (m.inputs.empty()) {
    throw InvalidArgumentError("aggregate needs a dataset CSV path");
  }
  const int order = resolve_order(cfg, "aggregate.order");
  const std::string lambda_spec =
      cfg.get_string("aggregate.lambda_grid", "1e-2,1e-1,1");
  const std::vector<LambdaVector> lambda_grid = cartesian_lambda_grid(
      resolve_degree_lists(cfg, "aggregate.lambda_grid", order, "1e-2,1e-1,1"));
  const Grid grid = resolve_data_grid(cfg);
  auto data =
      std::make_shared<const Dataset>(load_dataset_csv(m.inputs.front(), grid));
  const GramMatrix gram_matrix = gram(*data);

  std::vector<std::shared_ptr<const PolyModel>> models;
  models.reserve(lambda_grid.size());
  for (const auto& lambda : lambda_grid) {
    models.push_back(
        std::make_shared<const PolyModel>(fit(data, gram_matrix, lambda)));
  }
  const AggregatedModel agg = aggregate(models, *data);

  Eigen::MatrixXd base_predictions(static_cast<Eigen::Index>(models.size()),
                                   data->size());
  for (size_t r = 0; r < models.size(); ++r) {
    base_predictions.row(static_cast<Eigen::Index>(r)) =
        predict_training(*models[r], gram_matrix).transpose();
  }

  const fs::path dir = ensure_out_dir(m);
  save_aggregation_report_csv(agg, base_predictions, data->responses,
                              (dir / "aggregation_report.csv").string());
  const PolyModel combined = combine_representer(agg);
  save_model_csv(combined, (dir / "aggregated_model.csv").string(),
                 m.inputs.front());

  const std::map<std::string, std::string> resolved = {
      {"aggregate.order", std::to_string(order)},
      {"aggregate.lambda_grid", lambda_spec},
      {"data.lower", format_full(grid.lower)},
      {"data.upper", format_full(grid.upper)},
      {"data.nodes", std::to_string(grid.size())},
  };
  write_run_record(dir, m, seed, threads, resolved,
                   {"aggregation_report.csv", "aggregation_report.csv.meta",
                    "aggregated_model.csv", "aggregated_model.csv.meta"},
                   started);
  return kExitOk;
}

int run_predict(const RunManifest& m) {
  const auto started = Clock::now();
  const RunConfig cfg = resolve_config(m);
  const std::uint64_t seed = resolve_seed(cfg);
  const int threads = resolve_threads(cfg);

  if (m.inputs.size() < 2) {
    throw InvalidArgumentError("predict needs a model CSV and a dataset CSV");
  }
  const std::string& model_path = m.inputs[0];
  const std::string& data_path = m.inputs[1];

  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<long> nodes;
  std::string training_path;
  for (const auto& [key, value] : read_model_sidecar(model_path)) {
    const std::string ctx = model_path + ".meta:" + key;
    if (key == "grid.lower") lower = parse_double(value, ctx);
    if (key == "grid.upper") upper = parse_double(value, ctx);
    if (key == "grid.nodes") nodes = parse_long(value, ctx);
    if (key == "training_data") training_path = value;
  }
  if (!lower || !upper || !nodes) {
    throw DataFormatError(model_path + ".meta: missing grid specification");
  }
  if (training_path.empty()) {
    throw InvalidArgumentError(
        model_path +
        ".meta does not record a training dataset; refit with the dataset "
        "path available");
  }
  const Grid grid = build_grid(*lower, *upper, static_cast<int>(*nodes));
  auto training =
      std::make_shared<const Dataset>(load_dataset_csv(training_path, grid));
  const PolyModel model = load_model_csv(model_path, training);
  const Dataset fresh = load_dataset_csv(data_path, grid);

  std::ostringstream out;
  out << "id,score\n";
  for (const auto& sample : fresh.samples) {
    out << sample.id << "," << format_full(predict(model, sample)) << "\n";
  }
  const fs::path dir = ensure_out_dir(m);
  write_file((dir / "predictions.csv").string(), out.str());

  const std::map<std::string, std::string> resolved = {
      {"predict.model", model_path},
      {"predict.data", data_path},
  };
  write_run_record(dir, m, seed, threads, resolved, {"predictions.csv"},
                   started);
  return kExitOk;
}

int run_command(const RunManifest& m) {
  try {
    switch (m.command) {
      case Command::kToyCurve: return run_toy_curve(m);
      case Command::kFit: return run_fit(m);
      case Command::kAggregate: return run_aggregate(m);
      case Command::kEvaluate: return run_evaluate(m);
      case Command::kPredict: return run_predict(m);
    }
    return kExitConfig;
  } catch (const SolverFailureError& e) {
    std::cerr << "polyfreg: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DegenerateAggregationError& e) {
    std::cerr << "polyfreg: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataShapeError& e) {
    std::cerr << "polyfreg: data shape error: " << e.what() << "\n";
    return kExitDataShape;
  } catch (const std::exception& e) {
    std::cerr << "polyfreg: error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace polyfreg::cli

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyfreg/cli.hpp"
#include "polyfreg/textio.hpp"
#include "polyfreg/version.hpp"

namespace {

namespace pc = polyfreg::cli;

// Per-subcommand flag storage. Option pointers stay null for flags a
// subcommand does not expose.
struct SubOpts {
  CLI::App* sub = nullptr;

  std::string config;
  long long seed = 0;
  long threads = 0;
  std::string out = ".";
  long n_max = 40;
  long order = 2;
  std::string lambda_grid;
  long runs = 10;
  double threshold = 0.5;
  bool surrogate = false;
  long grid_nodes = 256;
  std::vector<std::string> inputs;
  std::string model_path;
  std::string data_path;

  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* n_max_opt = nullptr;
  CLI::Option* order_opt = nullptr;
  CLI::Option* lambda_grid_opt = nullptr;
  CLI::Option* runs_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* surrogate_opt = nullptr;
  CLI::Option* grid_nodes_opt = nullptr;
};

void add_common(SubOpts& o) {
  o.config_opt = o.sub->add_option("--config", o.config,
                                   "Config file with `key = value` lines")
                     ->check(CLI::ExistingFile);
  o.seed_opt = o.sub->add_option("--seed", o.seed, "RNG seed (default 0)");
  o.threads_opt =
      o.sub->add_option("--threads", o.threads,
                        "Worker threads (default: hardware parallelism)")
          ->envname("POLYFREG_THREADS");
  o.out_opt = o.sub->add_option("--out", o.out, "Output directory (default .)");
}

void add_order(SubOpts& o, const char* what) {
  o.order_opt = o.sub->add_option("--order", o.order, what)
                    ->check(CLI::IsMember({1, 2}));
}

void add_lambda_grid(SubOpts& o, const char* what) {
  o.lambda_grid_opt = o.sub->add_option("--lambda-grid", o.lambda_grid, what);
}

void add_grid_nodes(SubOpts& o) {
  o.grid_nodes_opt = o.sub->add_option("--grid-nodes", o.grid_nodes,
                                       "Quadrature nodes (default 256)");
}

pc::RunManifest build_manifest(const SubOpts& o, pc::Command cmd) {
  pc::RunManifest m;
  m.command = cmd;
  if (o.config_opt && *o.config_opt) m.config_path = o.config;
  if (o.seed_opt && *o.seed_opt) m.seed = o.seed;
  if (o.threads_opt && *o.threads_opt) {
    m.overrides["threads"] = std::to_string(o.threads);
  }
  if (o.out_opt && *o.out_opt) m.output_dir = o.out;
  m.inputs = o.inputs;

  auto put = [&m](CLI::Option* opt, const std::string& key,
                  const std::string& value) {
    if (opt && *opt) m.overrides[key] = value;
  };
  switch (cmd) {
    case pc::Command::kToyCurve:
      put(o.n_max_opt, "toy.n_max", std::to_string(o.n_max));
      put(o.order_opt, "toy.order", std::to_string(o.order));
      put(o.lambda_grid_opt, "toy.lambda_grid", o.lambda_grid);
      put(o.grid_nodes_opt, "toy.grid_nodes", std::to_string(o.grid_nodes));
      break;
    case pc::Command::kEvaluate:
      put(o.order_opt, "eval.order", std::to_string(o.order));
      put(o.lambda_grid_opt, "eval.lambda_grid", o.lambda_grid);
      put(o.runs_opt, "eval.runs", std::to_string(o.runs));
      put(o.threshold_opt, "eval.threshold", polyfreg::format_full(o.threshold));
      put(o.grid_nodes_opt, "data.nodes", std::to_string(o.grid_nodes));
      if (o.surrogate_opt && *o.surrogate_opt) {
        m.overrides["eval.synthetic_surrogate"] = "true";
      }
      break;
    case pc::Command::kFit:
      put(o.order_opt, "fit.order", std::to_string(o.order));
      put(o.lambda_grid_opt, "fit.lambda", o.lambda_grid);
      put(o.grid_nodes_opt, "data.nodes", std::to_string(o.grid_nodes));
      break;
    case pc::Command::kAggregate:
      put(o.order_opt, "aggregate.order", std::to_string(o.order));
      put(o.lambda_grid_opt, "aggregate.lambda_grid", o.lambda_grid);
      put(o.grid_nodes_opt, "data.nodes", std::to_string(o.grid_nodes));
      break;
    case pc::Command::kPredict:
      m.inputs = {o.model_path, o.data_path};
      break;
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "polyfreg: polynomial functional regression with multi-parameter "
      "Tikhonov regularization and least-squares model aggregation"};
  app.set_version_flag("--version", polyfreg::kVersion);
  app.require_subcommand(1);

  SubOpts toy;
  toy.sub = app.add_subcommand(
      "toy-curve",
      "Run the built-in simulation study and write its error curves");
  add_common(toy);
  toy.n_max_opt = toy.sub->add_option("--n-max", toy.n_max,
                                      "Largest sample count (default 40)")
                      ->check(CLI::PositiveNumber);
  add_order(toy, "Polynomial order of the fitted models (default 2)");
  add_lambda_grid(
      toy,
      "Per-degree lambda lists, `;`-separated, values `,`-separated "
      "(default 1e-5,1e-7,1e-9 for every degree; Cartesian product taken)");
  add_grid_nodes(toy);

  SubOpts fit;
  fit.sub = app.add_subcommand("fit", "Fit one model on a dataset CSV");
  add_common(fit);
  add_order(fit, "Polynomial order (default 2)");
  add_lambda_grid(fit,
                  "Regularization weights, one value per degree (default "
                  "1e-3 for every degree)");
  add_grid_nodes(fit);
  fit.sub->add_option("data", fit.inputs, "Dataset CSV")
      ->required()
      ->expected(1);

  SubOpts agg;
  agg.sub = app.add_subcommand(
      "aggregate", "Fit a lambda grid on a dataset CSV and aggregate it");
  add_common(agg);
  add_order(agg, "Polynomial order (default 2)");
  add_lambda_grid(agg,
                  "Per-degree lambda lists (default 1e-2,1e-1,1 for every "
                  "degree; Cartesian product taken)");
  add_grid_nodes(agg);
  agg.sub->add_option("data", agg.inputs, "Dataset CSV")
      ->required()
      ->expected(1);

  SubOpts eval;
  eval.sub = app.add_subcommand(
      "evaluate",
      "Repeated stratified train/test evaluation with SE/SP/AUC metrics");
  add_common(eval);
  add_order(eval, "Polynomial order of the model family (default 2)");
  add_lambda_grid(eval,
                  "Per-degree lambda lists (default 1e-2,1e-1,1 for every "
                  "degree; Cartesian product taken)");
  eval.runs_opt = eval.sub->add_option("--runs", eval.runs,
                                       "Number of random splits (default 10)")
                      ->check(CLI::PositiveNumber);
  eval.threshold_opt = eval.sub->add_option(
      "--threshold", eval.threshold,
      "Positive-call threshold on the score (default 0.5, strict >)");
  eval.surrogate_opt = eval.sub->add_flag(
      "--synthetic-surrogate", eval.surrogate,
      "Use the built-in synthetic vessel-profile surrogate dataset");
  add_grid_nodes(eval);
  eval.sub->add_option("data", eval.inputs,
                       "Dataset CSV (optional with --synthetic-surrogate)")
      ->expected(0, 1);

  SubOpts pred;
  pred.sub = app.add_subcommand(
      "predict", "Score a dataset CSV with a previously fitted model");
  add_common(pred);
  pred.sub->add_option("model", pred.model_path, "Model CSV written by fit")
      ->required();
  pred.sub
      ->add_option("data", pred.data_path, "Dataset CSV with the new samples")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pc::kExitOk : pc::kExitConfig;
  }

  if (toy.sub->parsed()) {
    return pc::run_command(build_manifest(toy, pc::Command::kToyCurve));
  }
  if (fit.sub->parsed()) {
    return pc::run_command(build_manifest(fit, pc::Command::kFit));
  }
  if (agg.sub->parsed()) {
    return pc::run_command(build_manifest(agg, pc::Command::kAggregate));
  }
  if (eval.sub->parsed()) {
    return pc::run_command(build_manifest(eval, pc::Command::kEvaluate));
  }
  if (pred.sub->parsed()) {
    return pc::run_command(build_manifest(pred, pc::Command::kPredict));
  }
  return pc::kExitConfig;
}

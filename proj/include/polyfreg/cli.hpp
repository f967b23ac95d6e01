#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace polyfreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitDataShape = 4;

enum class Command { kToyCurve, kFit, kAggregate, kEvaluate, kPredict };

// A fully parsed invocation. `overrides` holds canonical config keys (the
// same dotted names a config file would use); they win over the config
// file, and the explicit `seed` field wins over both.
struct RunManifest {
  Command command = Command::kToyCurve;
  std::optional<std::string> config_path;
  std::map<std::string, std::string> overrides;
  std::string output_dir = ".";
  std::optional<long long> seed;
  std::vector<std::string> inputs;  // positional dataset / model paths
};

// Dispatches to the per-command runner and maps every failure onto the
// documented exit codes: 2 config/format error, 3 numerical failure,
// 4 data-shape error. Never throws.
int run_command(const RunManifest& manifest);

int run_toy_curve(const RunManifest& manifest);
int run_fit(const RunManifest& manifest);
int run_aggregate(const RunManifest& manifest);
int run_evaluate(const RunManifest& manifest);
int run_predict(const RunManifest& manifest);

}  // namespace polyfreg::cli

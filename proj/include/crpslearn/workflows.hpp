#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace crpslearn {

enum class Workflow { simulate, combine, evaluate };

struct RunConfig {
  Workflow workflow = Workflow::simulate;
  std::filesystem::path output_dir = ".";
  std::size_t threads = 1;

  // simulate
  std::string dgp = "static";
  /// Empty: {32, 128, 512} for static, {512} for drifting.
  std::vector<std::size_t> horizons;
  /// Empty: 100 with desk_scale, 1000 without.
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  bool desk_scale = true;
  /// "auto" or a comma-separated list of forget rates.
  std::string forget_grid = "auto";
  /// Restrict to these study specifications; empty runs all.
  std::vector<std::string> specs;

  // combine
  std::filesystem::path experts_path;
  std::filesystem::path observations_path;
  std::vector<std::string> methods{"naive", "boa"};
  std::string basis = "pointwise";
  std::vector<double> knot_distances{0.1};
  int degree = 3;
  bool add_constant_basis = false;
  std::vector<double> lambdas{0.0};
  double alpha = 0.5;
  std::vector<double> forgets{0.0};
  std::vector<double> fixed_shares{0.0};
  std::vector<double> soft_thresholds{0.0};
  std::vector<double> hard_thresholds{0.0};
  /// Empty: 2^{-3, -2.8, ..., 9}.
  std::vector<double> etas;
  bool ewa_gradient = true;

  // evaluate
  /// (method name, quantile forecast CSV).
  std::vector<std::pair<std::string, std::filesystem::path>> forecasts;
  /// Reference method for differences; empty uses the first forecast.
  std::string baseline;
  std::size_t dm_lag = 0;
  bool dm_small_sample = false;
};

/// Overlays the keys of a JSON object file onto `config`. Unknown keys and
/// type mismatches raise InputError.
void apply_json_config(RunConfig& config, const std::filesystem::path& path);

Workflow parse_workflow(const std::string& name);

/// Each returns the process exit code (0 ok, 1 computational error, 2 usage
/// or IO error) and reports failures on `err`.
int cmd_simulate(const RunConfig& config, std::ostream& err);
int cmd_combine(const RunConfig& config, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& err);
int run_workflow(const RunConfig& config, std::ostream& err);

}  // namespace crpslearn

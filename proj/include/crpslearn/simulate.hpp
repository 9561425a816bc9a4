#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "crpslearn/combiner.hpp"

namespace crpslearn {

using Rng = std::mt19937_64;

/// SplitMix64 mix of (master, stream): independent substream seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct GaussianExpert {
  double mu = 0.0;
  double sigma = 1.0;
};

/// The two fixed experts of both simulation designs: N(-1, 1) and N(3, 2^2).
std::vector<GaussianExpert> simulation_experts();

/// mu + sigma * Phi^{-1}(p) on every grid point.
Vector expert_quantiles(const GaussianExpert& expert, const ProbGrid& grid);
/// M x K slab with one column of quantiles per expert.
Matrix expert_slab(std::span<const GaussianExpert> experts, const ProbGrid& grid);

/// T iid draws from N(0,1).
ObservationStream dgp_static_sample(std::size_t horizon, Rng& rng);

struct DriftingSample {
  ObservationStream obs;
  /// Latent AR(1) state mu_t.
  std::vector<double> latent;
  /// Observation mean 0.15 asinh(mu_t).
  std::vector<double> location;
};

/// mu_t = 0.99 mu_{t-1} + e_t (mu_0 = 0), Y_t ~ N(0.15 asinh(mu_t), 1).
DriftingSample dgp_drifting_sample(std::size_t horizon, Rng& rng);
/// Same recursion driven by explicit latent and observation innovations.
DriftingSample dgp_drifting_from_innovations(std::span<const double> latent_noise, std::span<const double> obs_noise);

/// Weight on expert 1 for which the combined p-quantile of the two simulation
/// experts equals the standard normal p-quantile: (3 + z) / (4 + z).
double optimal_weight_static(double p);
/// Same for a standard normal shifted by `location`: (3 + z - location) / (4 + z).
double optimal_weight_shifted(double p, double location);

/// Monte-Carlo estimate of E[QL_p(Phi^{-1}(p), Y)], Y ~ N(0,1).
double best_attainable_ql(double p, std::size_t n_mc, Rng& rng);

// ---------------------------------------------------------------------------
// Repetition harness

enum class Dgp { static_normal, drifting };

/// A named combiner specification. `make` builds a fresh combiner for a run
/// of the given maximum horizon.
struct StudySpec {
  std::string name;
  std::function<std::unique_ptr<OnlineCombiner>(const ProbGrid&, std::size_t k, std::size_t horizon)> make;
};

struct SimSpec {
  Dgp dgp = Dgp::static_normal;
  /// Evaluation horizons. One stream of the largest horizon is simulated per
  /// repetition; smaller horizons are its prefixes (online learners never look
  /// ahead, so a prefix equals a shorter run on the same data).
  std::vector<std::size_t> horizons{512};
  std::size_t reps = 100;
  std::uint64_t seed = 0;
  std::vector<StudySpec> specs;
  std::size_t threads = 1;
};

struct StudyRow {
  std::string spec;
  std::size_t horizon = 0;
  std::size_t reps = 0;
  /// Mean over repetitions of the per-run mean grid CRPS (2/M weight).
  double mean_crps = 0.0;
  double se_crps = 0.0;
  /// Mean pinball loss over the grid (crps / 2).
  double mean_ql = 0.0;
  double se_ql = 0.0;
  /// Mean over t and p of QL(combined) - QL(true quantile).
  double mean_distance = 0.0;
  double se_distance = 0.0;
};

struct StudyResult {
  ProbGrid grid = ProbGrid::percentiles();
  std::vector<StudyRow> rows;
  /// profiles[row] is the per-probability mean distance for rows[row].
  std::vector<Vector> profiles;
  /// For tuning-grid combiners: mean over repetitions of each configuration's
  /// own mean CRPS, with matching labels. Empty for other combiners.
  std::vector<std::vector<double>> config_crps;
  std::vector<std::vector<std::string>> config_labels;

  const StudyRow& row(const std::string& spec, std::size_t horizon) const;
  const Vector& profile(const std::string& spec, std::size_t horizon) const;
};

StudyResult run_study(const SimSpec& spec);

/// Pointwise, B-Constant, P-Constant, P-Smooth, B-Smooth and EWAG.
std::vector<StudySpec> static_study_specs();
/// Pointwise / P-Smooth, each with and without a forget grid. An empty
/// `forgets` selects the horizon-dependent default grid.
std::vector<StudySpec> drifting_study_specs(const std::vector<double>& forgets = {});

/// Spec names used by drifting_study_specs, in table column order.
inline const std::vector<std::string>& table1_columns() {
  static const std::vector<std::string> cols{"Pointwise/NoForget", "P-Smooth/NoForget", "Pointwise/Forget",
                                             "P-Smooth/Forget"};
  return cols;
}

}  // namespace crpslearn

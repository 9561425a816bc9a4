#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crpslearn/grid_types.hpp"

namespace crpslearn {

struct LossSeries {
  std::vector<double> values;
  std::string label;

  std::size_t size() const noexcept { return values.size(); }
  double mean() const;
};

/// Per-time grid CRPS of T x M quantile forecasts.
LossSeries crps_series(const Matrix& forecasts, const ObservationStream& obs, const ProbGrid& grid,
                       std::string label = {});

/// Per-probability mean pinball loss over time.
Vector ql_profile(const Matrix& forecasts, const ObservationStream& obs, const ProbGrid& grid);

struct DmOptions {
  /// Newey-West truncation lag for the long-run variance; 0 uses the lag-0
  /// sample variance.
  std::size_t newey_west_lag = 0;
  /// Harvey-Leybourne-Newbold small-sample correction of the statistic.
  bool small_sample_correction = false;
};

struct DmResult {
  double statistic = 0.0;
  /// One-sided P(Z < statistic): small values favour "A has lower loss".
  double p_value = 0.0;
};

/// Diebold-Mariano test on d_t = a_t - b_t. Throws InputError for unequal
/// lengths or T < 2 and NumericalError("degenerate loss differential") when
/// the differential has zero variance.
DmResult dm_test(const LossSeries& a, const LossSeries& b, const DmOptions& options = {});

/// Running sum of a_t - b_t.
std::vector<double> cumulative_difference(const LossSeries& a, const LossSeries& b);

}  // namespace crpslearn

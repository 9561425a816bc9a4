#pragma once

#include <span>

#include "crpslearn/grid_types.hpp"

namespace crpslearn {

/// Quantile (pinball) loss (1{y<q} - p)(q - y). Throws InputError unless p in (0,1).
double pinball(double q, double y, double p);

/// Subgradient of the pinball loss in q: 1{y<q} - p. At the kink y == q the
/// indicator is 0, so the value is -p.
double pinball_subgrad(double q, double y, double p);

/// Grid approximation (2/M) sum_m pinball(quantiles[m], y, p_m) of the CRPS.
/// The 2/M weight is used for every grid, equidistant or not.
double crps_grid(std::span<const double> quantiles, double y, const ProbGrid& grid);
double crps_grid(const Vector& quantiles, double y, const ProbGrid& grid);

/// Mean pinball loss over the grid, (1/M) sum_m pinball(...) = crps_grid / 2.
double mean_pinball(const Vector& quantiles, double y, const ProbGrid& grid);

/// Per-point linearized instantaneous regret of the combined forecast against
/// each expert: entry (m,k) = pinball_subgrad(combined[m], y, p_m) *
/// (combined[m] - experts(m,k)).
Matrix linearized_instant_regret(const Vector& combined, const Matrix& experts, double y, const ProbGrid& grid);

}  // namespace crpslearn

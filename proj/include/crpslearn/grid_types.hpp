#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crpslearn/errors.hpp"

namespace crpslearn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Strictly increasing probabilities inside (0,1) on which every quantile
/// forecast and every loss lives.
class ProbGrid {
 public:
  /// Throws InputError if the list is empty, leaves (0,1) or is not strictly
  /// increasing.
  explicit ProbGrid(std::vector<double> probs);

  /// The percentile grid (0.01, 0.02, ..., 0.99).
  static ProbGrid percentiles();
  /// M equidistant points i/(M+1), i = 1..M.
  static ProbGrid equidistant(std::size_t m);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  bool operator==(const ProbGrid&) const = default;

 private:
  std::vector<double> probs_;
};

/// Expert quantile predictions indexed (time, grid point, expert). Each time
/// step is an M x K slab. Slabs may be non-monotone in the grid direction.
struct ExpertPanel {
  std::vector<Matrix> slabs;
  std::vector<std::string> expert_names;

  std::size_t times() const noexcept { return slabs.size(); }
  std::size_t grid_size() const noexcept { return slabs.empty() ? 0 : static_cast<std::size_t>(slabs.front().rows()); }
  std::size_t experts() const noexcept { return expert_names.size(); }
};

/// Combination weights, one row per grid point and one column per expert.
struct WeightSurface {
  Matrix weights;
  /// Convex surfaces have rows on the probability simplex; unconstrained
  /// surfaces (linear quantile regression) drop that requirement.
  bool convex = true;

  /// Rows sum to one within `tol`; entries are additionally checked to be
  /// nonnegative when `require_nonnegative` is set.
  bool on_simplex(double tol = 1e-10, bool require_nonnegative = true) const;
};

struct ObservationStream {
  std::vector<double> y;
  /// Empty, or one label per observation.
  std::vector<std::string> timestamps;

  std::size_t size() const noexcept { return y.size(); }
};

/// A panel, its grid and its observations after all consistency checks.
struct CheckedInputs {
  ExpertPanel panel;
  ProbGrid grid;
  ObservationStream obs;
};

/// Checks dimensions and finiteness of a (panel, grid, observations) triple
/// and returns it unchanged. Errors name the offending axis or index.
CheckedInputs validate_panel(ExpertPanel panel, ProbGrid grid, ObservationStream obs);

/// Throws InputError unless `slab` is grid.size() x k with finite entries.
void check_slab(const Matrix& slab, std::size_t grid_size, std::size_t k);

}  // namespace crpslearn

#include "crpslearn/grid_types.hpp"

#include <cmath>
#include <sstream>

namespace crpslearn {

ProbGrid::ProbGrid(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InputError("grid must contain at least one probability");
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!(p > 0.0 && p < 1.0)) {
      std::ostringstream msg;
      msg << "grid probability " << p << " at index " << i << " is outside (0,1)";
      throw InputError(msg.str());
    }
    if (i > 0 && !(probs_[i - 1] < p)) {
      std::ostringstream msg;
      msg << "grid not strictly increasing at index " << i;
      throw InputError(msg.str());
    }
  }
}

ProbGrid ProbGrid::percentiles() {
  std::vector<double> p(99);
  for (int i = 0; i < 99; ++i) p[i] = (i + 1) / 100.0;
  return ProbGrid(std::move(p));
}

ProbGrid ProbGrid::equidistant(std::size_t m) {
  std::vector<double> p(m);
  for (std::size_t i = 0; i < m; ++i) p[i] = static_cast<double>(i + 1) / static_cast<double>(m + 1);
  return ProbGrid(std::move(p));
}

bool WeightSurface::on_simplex(double tol, bool require_nonnegative) const {
  for (Eigen::Index m = 0; m < weights.rows(); ++m) {
    if (std::abs(weights.row(m).sum() - 1.0) > tol) return false;
    if (require_nonnegative && weights.row(m).minCoeff() < 0.0) return false;
  }
  return true;
}

void check_slab(const Matrix& slab, std::size_t grid_size, std::size_t k) {
  if (static_cast<std::size_t>(slab.rows()) != grid_size) {
    std::ostringstream msg;
    msg << "grid axis mismatch: slab has " << slab.rows() << " rows, grid has " << grid_size;
    throw InputError(msg.str());
  }
  if (static_cast<std::size_t>(slab.cols()) != k) {
    std::ostringstream msg;
    msg << "expert axis mismatch: slab has " << slab.cols() << " columns, expected " << k;
    throw InputError(msg.str());
  }
  if (!slab.allFinite()) throw InputError("non-finite expert prediction in slab");
}

CheckedInputs validate_panel(ExpertPanel panel, ProbGrid grid, ObservationStream obs) {
  const std::size_t k = panel.experts();
  if (k == 0) throw InputError("expert axis mismatch: panel has no experts");
  if (panel.times() != obs.size()) {
    std::ostringstream msg;
    msg << "time axis mismatch: panel has " << panel.times() << " steps, observations have " << obs.size();
    throw InputError(msg.str());
  }
  if (!obs.timestamps.empty() && obs.timestamps.size() != obs.y.size()) {
    throw InputError("time axis mismatch: timestamp count differs from observation count");
  }
  for (std::size_t t = 0; t < panel.times(); ++t) {
    const Matrix& slab = panel.slabs[t];
    if (static_cast<std::size_t>(slab.rows()) != grid.size()) {
      std::ostringstream msg;
      msg << "grid axis mismatch at t=" << t << ": " << slab.rows() << " rows vs grid size " << grid.size();
      throw InputError(msg.str());
    }
    if (static_cast<std::size_t>(slab.cols()) != k) {
      std::ostringstream msg;
      msg << "expert axis mismatch at t=" << t << ": " << slab.cols() << " columns vs " << k << " names";
      throw InputError(msg.str());
    }
    for (Eigen::Index m = 0; m < slab.rows(); ++m) {
      for (Eigen::Index j = 0; j < slab.cols(); ++j) {
        if (!std::isfinite(slab(m, j))) {
          std::ostringstream msg;
          msg << "non-finite expert value at (t=" << t << ", m=" << m << ", k=" << j << ")";
          throw InputError(msg.str());
        }
      }
    }
    if (!std::isfinite(obs.y[t])) {
      std::ostringstream msg;
      msg << "non-finite observation at t=" << t;
      throw InputError(msg.str());
    }
  }
  return CheckedInputs{std::move(panel), std::move(grid), std::move(obs)};
}

}  // namespace crpslearn

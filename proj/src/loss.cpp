#include "crpslearn/loss.hpp"

#include <sstream>

namespace crpslearn {
namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "probability " << p << " outside (0,1)";
    throw InputError(msg.str());
  }
}

inline double pinball_unchecked(double q, double y, double p) { return ((y < q ? 1.0 : 0.0) - p) * (q - y); }

}  // namespace

double pinball(double q, double y, double p) {
  check_probability(p);
  return pinball_unchecked(q, y, p);
}

double pinball_subgrad(double q, double y, double p) {
  check_probability(p);
  return (y < q ? 1.0 : 0.0) - p;
}

double crps_grid(std::span<const double> quantiles, double y, const ProbGrid& grid) {
  if (quantiles.size() != grid.size()) {
    std::ostringstream msg;
    msg << "length mismatch: " << quantiles.size() << " quantiles for a grid of " << grid.size();
    throw InputError(msg.str());
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < quantiles.size(); ++m) sum += pinball_unchecked(quantiles[m], y, grid[m]);
  return 2.0 * sum / static_cast<double>(grid.size());
}

double crps_grid(const Vector& quantiles, double y, const ProbGrid& grid) {
  return crps_grid(std::span<const double>(quantiles.data(), static_cast<std::size_t>(quantiles.size())), y, grid);
}

double mean_pinball(const Vector& quantiles, double y, const ProbGrid& grid) { return 0.5 * crps_grid(quantiles, y, grid); }

Matrix linearized_instant_regret(const Vector& combined, const Matrix& experts, double y, const ProbGrid& grid) {
  const auto m_size = static_cast<Eigen::Index>(grid.size());
  if (combined.size() != m_size || experts.rows() != m_size) {
    std::ostringstream msg;
    msg << "shape mismatch: combined " << combined.size() << ", experts " << experts.rows() << "x" << experts.cols()
        << ", grid " << grid.size();
    throw InputError(msg.str());
  }
  Matrix r(experts.rows(), experts.cols());
  for (Eigen::Index m = 0; m < m_size; ++m) {
    const double g = (y < combined[m] ? 1.0 : 0.0) - grid[static_cast<std::size_t>(m)];
    r.row(m) = g * (combined[m] - experts.row(m).array());
  }
  return r;
}

}  // namespace crpslearn

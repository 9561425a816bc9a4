#include "crpslearn/evaluate.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "crpslearn/loss.hpp"
#include "crpslearn/normal.hpp"

namespace crpslearn {
namespace {

void check_forecast_shape(const Matrix& forecasts, const ObservationStream& obs, const ProbGrid& grid) {
  if (static_cast<std::size_t>(forecasts.rows()) != obs.size() ||
      static_cast<std::size_t>(forecasts.cols()) != grid.size()) {
    std::ostringstream msg;
    msg << "shape mismatch: forecasts " << forecasts.rows() << "x" << forecasts.cols() << ", " << obs.size()
        << " observations, grid of " << grid.size();
    throw InputError(msg.str());
  }
}

}  // namespace

double LossSeries::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

LossSeries crps_series(const Matrix& forecasts, const ObservationStream& obs, const ProbGrid& grid, std::string label) {
  check_forecast_shape(forecasts, obs, grid);
  LossSeries out;
  out.label = std::move(label);
  out.values.reserve(obs.size());
  for (Eigen::Index t = 0; t < forecasts.rows(); ++t) {
    const Vector row = forecasts.row(t).transpose();
    out.values.push_back(crps_grid(row, obs.y[static_cast<std::size_t>(t)], grid));
  }
  return out;
}

Vector ql_profile(const Matrix& forecasts, const ObservationStream& obs, const ProbGrid& grid) {
  check_forecast_shape(forecasts, obs, grid);
  Vector profile = Vector::Zero(forecasts.cols());
  for (Eigen::Index t = 0; t < forecasts.rows(); ++t) {
    for (Eigen::Index m = 0; m < forecasts.cols(); ++m) {
      profile[m] += pinball(forecasts(t, m), obs.y[static_cast<std::size_t>(t)], grid[static_cast<std::size_t>(m)]);
    }
  }
  if (forecasts.rows() > 0) profile /= static_cast<double>(forecasts.rows());
  return profile;
}

DmResult dm_test(const LossSeries& a, const LossSeries& b, const DmOptions& options) {
  if (a.size() != b.size()) throw InputError("loss series differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw InputError("DM test needs at least two observations");
  std::vector<double> d(n);
  for (std::size_t t = 0; t < n; ++t) d[t] = a.values[t] - b.values[t];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = lag; t < n; ++t) s += (d[t] - mean) * (d[t - lag] - mean);
    return s / static_cast<double>(n);
  };
  double lrv = autocov(0);
  const std::size_t max_lag = std::min(options.newey_west_lag, n - 1);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const double bartlett = 1.0 - static_cast<double>(lag) / static_cast<double>(max_lag + 1);
    lrv += 2.0 * bartlett * autocov(lag);
  }
  const double scale = std::abs(mean) + 1.0;
  if (!(lrv > 1e-28 * scale * scale)) throw NumericalError("degenerate loss differential");

  DmResult r;
  r.statistic = mean / std::sqrt(lrv / static_cast<double>(n));
  if (options.small_sample_correction) {
    const double nn = static_cast<double>(n);
    const double h = static_cast<double>(max_lag + 1);
    r.statistic *= std::sqrt((nn + 1.0 - 2.0 * h + h * (h - 1.0) / nn) / nn);
  }
  r.p_value = normal_cdf(r.statistic);
  return r;
}

std::vector<double> cumulative_difference(const LossSeries& a, const LossSeries& b) {
  if (a.size() != b.size()) throw InputError("length mismatch between loss series");
  std::vector<double> out(a.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    acc += a.values[t] - b.values[t];
    out[t] = acc;
  }
  return out;
}

}  // namespace crpslearn

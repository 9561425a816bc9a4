#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>

#include "crpslearn/combiner.hpp"
#include "crpslearn/spline.hpp"

namespace crpslearn {

// ---------------------------------------------------------------------------
// Exponentially weighted average (EWA / EWAG)

struct EwaConfig {
  double eta = 1.0;
  /// Linearized (gradient-trick) loss instead of the raw pinball loss.
  bool gradient = true;
  /// Basis for the weight functions; nullptr means pointwise (identity).
  std::shared_ptr<const BasisSystem> basis;
  /// M x K prior; empty means uniform.
  Matrix prior;
};

struct EwaState {
  /// Accumulated log-weights log(w0) - eta * sum of losses, L x K.
  Matrix log_weights;
  /// Per-basis-row weights softmax(log_weights), L x K.
  Matrix coefficients;
  std::size_t t = 0;
};

class EwaLearner final : public OnlineCombiner {
 public:
  EwaLearner(EwaConfig config, ProbGrid grid, std::size_t k);

  Vector predict(const Matrix& experts) const override;
  void update(const Matrix& experts, double y) override;
  const WeightSurface& weights() const override { return weights_; }
  const EwaState& state() const noexcept { return state_; }

 private:
  EwaConfig config_;
  ProbGrid grid_;
  std::size_t k_;
  EwaState state_;
  WeightSurface weights_;
};

/// Per-row softmax(log_w - eta * loss); the recursive EWA update.
Matrix ewa_step(const Matrix& weights, const Matrix& loss, double eta);

/// {2^x : x = -3, -2.8, ..., 9}.
std::vector<double> ewa_eta_grid_default();
/// {1 - sqrt(x) : x = 0, 0.05, ..., 0.95}.
std::vector<double> ewa_eta_grid_simulation();

// ---------------------------------------------------------------------------
// Bayesian model averaging with a quantile-loss BIC

struct BicInput {
  /// M x K in-sample mean pinball residuals; must be > 0.
  Matrix residual_means;
  /// M x K effective degrees of freedom; empty means 0.
  Matrix df;
  /// Calibration window length.
  double window = 1.0;
};

/// 2 log(mean residual) + log(T) df / T, elementwise.
Matrix quantile_bic(const BicInput& input);

/// Per grid row softmax(-eta * BIC). eta = +inf gives the one-hot argmin
/// (ties to the lowest expert index).
WeightSurface bma_weights(const Matrix& bic, double eta);

// ---------------------------------------------------------------------------
// Batch pointwise quantile regression

enum class QrConstraint { linear, convex };

struct QrOptions {
  std::size_t max_iterations = 20000;
  /// Stop once the best objective improves by less than this over `window`.
  double tolerance = 1e-9;
  std::size_t window = 100;
  /// Step size scale; the step at iteration i is step_scale / sqrt(i).
  /// Non-positive means automatic (1 / mean squared regressor norm).
  double step_scale = 0.0;
};

struct QrResult {
  Vector weights;
  /// Mean pinball loss over the window.
  double objective = 0.0;
  std::size_t iterations = 0;
};

class QrNonConvergence : public NumericalError {
 public:
  QrNonConvergence(const std::string& what, Vector last, double gap)
      : NumericalError(what), last_iterate(std::move(last)), gap_estimate(gap) {}
  Vector last_iterate;
  double gap_estimate;
};

/// Mean over i of rho_p(y_i - x_i' w).
double qr_objective(const Matrix& x, std::span<const double> y, double p, const Vector& w);

/// Weights minimizing sum_i rho_p(y_i - sum_k w_k x(i,k)) for one probability.
/// x is n x K (window x experts). Convex mode restricts w to the simplex.
QrResult batch_qr_pointwise(const Matrix& x, std::span<const double> y, double p, QrConstraint constraint,
                            const QrOptions& options = {});

/// Same, reading the window from a panel at grid index m.
QrResult batch_qr_pointwise(const ExpertPanel& panel, const ObservationStream& obs, const ProbGrid& grid,
                            std::size_t m, QrConstraint constraint, const QrOptions& options = {});

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& v);

}  // namespace crpslearn

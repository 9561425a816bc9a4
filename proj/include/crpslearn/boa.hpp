#pragma once

#include <cstddef>
#include <memory>

#include "crpslearn/combiner.hpp"
#include "crpslearn/spline.hpp"

namespace crpslearn {

/// Hyperparameters of the smoothed, fully adaptive gradient BOA learner.
struct BoaConfig {
  /// P-spline roughness penalty; 0 disables smoothing (w = B beta).
  double lambda = 0.0;
  /// Mix between first (alpha) and second (1-alpha) difference penalties.
  double alpha = 0.5;
  /// Exponential forgetting xi in [0,1) applied to R, E and V.
  double forget = 0.0;
  /// Fixed-share phi in [0,1].
  double fixed_share = 0.0;
  double soft_threshold = 0.0;
  double hard_threshold = 0.0;
  std::shared_ptr<const BasisSystem> basis;
  /// M x K prior weight surface w0; empty means uniform 1/K.
  Matrix prior;
};

/// Hidden state of the learner. All arrays are L x K (basis functions x experts).
struct LearnerState {
  Matrix beta;
  Matrix regret;    // R, accumulated adjusted linearized excess loss
  Matrix range;     // E
  Matrix variance;  // V
  Matrix eta;
  Matrix beta0;
  std::size_t t = 0;
};

/// Learning rate used when both the variance and the range bound are still
/// infinite (no regret observed at that entry).
inline constexpr double kEtaCap = 1e6;
/// Floor applied to prior coefficients before taking their logarithm.
inline constexpr double kPriorFloor = 1e-12;

/// Initial state: beta = beta0 = pinv(B) w0 (floored and row-normalized),
/// R = E = V = 0. Throws InputError for priors with non-positive mass or rows
/// not summing to one.
LearnerState init_state(const BoaConfig& config, const ProbGrid& grid, std::size_t k);

double apply_soft_threshold(double x, double nu);
double apply_hard_threshold(double x, double kappa);
Vector apply_fixed_share(const Vector& row, double phi);

/// Applies fixed share, soft and hard thresholding to every row of beta. Rows
/// changed by thresholding are projected back onto the simplex (negatives
/// clipped, renormalized, an all-zero row becomes uniform).
void apply_shrinkage(Matrix& beta, double phi, double nu, double kappa);

class BoaLearner final : public OnlineCombiner {
 public:
  BoaLearner(BoaConfig config, ProbGrid grid, std::size_t k);

  Vector predict(const Matrix& experts) const override;
  void update(const Matrix& experts, double y) override;
  const WeightSurface& weights() const override { return weights_; }

  const LearnerState& state() const noexcept { return state_; }
  const BoaConfig& config() const noexcept { return config_; }

 private:
  void refresh_weights();

  BoaConfig config_;
  ProbGrid grid_;
  std::size_t k_;
  LearnerState state_;
  /// S B when smoothing, null otherwise.
  std::shared_ptr<const Matrix> smooth_basis_;
  /// -log(beta0), fixed after construction.
  Matrix neg_log_prior_;
  Matrix scratch_;
  WeightSurface weights_;
};

}  // namespace crpslearn

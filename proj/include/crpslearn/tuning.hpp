#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "crpslearn/boa.hpp"
#include "crpslearn/combiner.hpp"

namespace crpslearn {

/// Runs a set of learners side by side and emits, at every step, the forecast
/// of the learner with the lowest cumulative CRPS up to the previous step.
/// Ties go to the lowest index.
class TuningGrid final : public OnlineCombiner {
 public:
  TuningGrid(ProbGrid grid, std::vector<std::unique_ptr<OnlineCombiner>> learners, std::vector<std::string> labels = {});

  /// Emits the active learner's forecast for `experts` (computed before y is
  /// used), then updates every learner with y and reselects.
  Vector step(const Matrix& experts, double y);

  Vector predict(const Matrix& experts) const override;
  void update(const Matrix& experts, double y) override { step(experts, y); }
  const WeightSurface& weights() const override;

  std::size_t size() const noexcept { return learners_.size(); }
  std::size_t active_index() const noexcept { return active_; }
  const std::vector<double>& cumulative_loss() const noexcept { return cum_loss_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const OnlineCombiner& learner(std::size_t i) const { return *learners_.at(i); }

 private:
  ProbGrid grid_;
  std::vector<std::unique_ptr<OnlineCombiner>> learners_;
  std::vector<std::string> labels_;
  std::vector<double> cum_loss_;
  std::size_t active_ = 0;
};

enum class BasisChoice { pointwise, constant, bspline };

/// Cartesian grid of BOA configurations. Every combination of the listed
/// values becomes one learner.
struct BoaGridSpec {
  BasisChoice basis = BasisChoice::pointwise;
  /// Used when basis == bspline.
  std::vector<double> knot_distances{0.1};
  int degree = 3;
  /// Adds the constant basis as one more candidate in bspline mode.
  bool add_constant_basis = false;
  std::vector<double> lambdas{0.0};
  double alpha = 0.5;
  std::vector<double> forgets{0.0};
  std::vector<double> fixed_shares{0.0};
  std::vector<double> soft_thresholds{0.0};
  std::vector<double> hard_thresholds{0.0};
};

/// Builds one BoaLearner per configuration, sharing bases and smoother
/// matrices between learners that use the same (basis, lambda, alpha).
TuningGrid make_boa_grid(const ProbGrid& grid, std::size_t k, const BoaGridSpec& spec);

/// One EwaLearner per learning rate.
TuningGrid make_ewa_grid(const ProbGrid& grid, std::size_t k, const std::vector<double>& etas, bool gradient);

/// {0} U {2^x : x = -4..13} U {2^30}.
std::vector<double> default_lambda_grid();
/// {2^x : x = lo..hi}.
std::vector<double> power_of_two_grid(int lo, int hi);
/// {2^x : x = -ceil(log2 T)..-1} U {0}.
std::vector<double> default_forget_grid(std::size_t horizon);
/// {0.005, 0.02, 0.035, ..., 0.485, 0.5}.
std::vector<double> default_knot_distances();

}  // namespace crpslearn

#pragma once

#include "crpslearn/grid_types.hpp"

namespace crpslearn {

/// An online combiner of expert quantile slabs. predict() uses only what was
/// seen through the previous update(); update() incorporates one observation.
class OnlineCombiner {
 public:
  virtual ~OnlineCombiner() = default;

  /// Combined, ascending-sorted quantiles for an M x K expert slab.
  virtual Vector predict(const Matrix& experts) const = 0;
  virtual void update(const Matrix& experts, double y) = 0;
  /// Weight surface that the next predict() will use.
  virtual const WeightSurface& weights() const = 0;
};

/// Row-wise weighted sum of an expert slab followed by an ascending sort.
Vector combine_sorted(const Matrix& weights, const Matrix& experts);

/// Weight surface with all entries 1/K.
WeightSurface naive_weights(Eigen::Index m, Eigen::Index k);

/// Fixed uniform weights; the baseline every other combiner is compared with.
class NaiveCombiner final : public OnlineCombiner {
 public:
  NaiveCombiner(Eigen::Index m, Eigen::Index k) : w_(naive_weights(m, k)) {}
  Vector predict(const Matrix& experts) const override { return combine_sorted(w_.weights, experts); }
  void update(const Matrix&, double) override {}
  const WeightSurface& weights() const override { return w_; }

 private:
  WeightSurface w_;
};

}  // namespace crpslearn

#include "crpslearn/combiner.hpp"

#include <algorithm>

namespace crpslearn {

Vector combine_sorted(const Matrix& weights, const Matrix& experts) {
  Vector combined = weights.cwiseProduct(experts).rowwise().sum();
  std::sort(combined.data(), combined.data() + combined.size());
  return combined;
}

WeightSurface naive_weights(Eigen::Index m, Eigen::Index k) {
  if (k < 1) throw InputError("naive weights need at least one expert");
  return WeightSurface{Matrix::Constant(m, k, 1.0 / static_cast<double>(k)), true};
}

}  // namespace crpslearn

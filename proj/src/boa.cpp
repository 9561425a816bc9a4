#include "crpslearn/boa.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "crpslearn/loss.hpp"

namespace crpslearn {
namespace {

void require_finite(const Matrix& m, const char* step) {
  if (!m.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite learner state after step '" << step << "'";
    throw NumericalError(msg.str());
  }
}

void check_config(const BoaConfig& c) {
  if (!c.basis) throw InputError("BOA config has no basis");
  if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw InputError("lambda must be finite and >= 0");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw InputError("alpha must lie in [0,1]");
  if (!(c.forget >= 0.0 && c.forget < 1.0)) throw InputError("forget must lie in [0,1)");
  if (!(c.fixed_share >= 0.0 && c.fixed_share <= 1.0)) throw InputError("fixed share must lie in [0,1]");
  if (!(c.soft_threshold >= 0.0)) throw InputError("soft threshold must be >= 0");
  if (!(c.hard_threshold >= 0.0)) throw InputError("hard threshold must be >= 0");
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index l = 0; l < m.rows(); ++l) m.row(l) /= m.row(l).sum();
}

}  // namespace

LearnerState init_state(const BoaConfig& config, const ProbGrid& grid, std::size_t k) {
  check_config(config);
  if (k < 1) throw InputError("learner needs at least one expert");
  const auto m_size = static_cast<Eigen::Index>(grid.size());
  const auto k_size = static_cast<Eigen::Index>(k);
  if (config.basis->grid_size() != m_size) throw InputError("basis was built for a different grid size");

  Matrix prior = config.prior.size() == 0 ? naive_weights(m_size, k_size).weights : config.prior;
  if (prior.rows() != m_size || prior.cols() != k_size) throw InputError("prior must be an M x K weight surface");
  for (Eigen::Index m = 0; m < m_size; ++m) {
    if (prior.row(m).minCoeff() <= 0.0) {
      std::ostringstream msg;
      msg << "prior has non-positive mass at grid row " << m << "; log(beta0) must be finite";
      throw InputError(msg.str());
    }
    if (std::abs(prior.row(m).sum() - 1.0) > 1e-10) {
      std::ostringstream msg;
      msg << "prior row " << m << " does not sum to 1";
      throw InputError(msg.str());
    }
  }

  LearnerState s;
  s.beta0 = pinv_init(*config.basis, prior).cwiseMax(kPriorFloor);
  normalize_rows(s.beta0);
  s.beta = s.beta0;
  const Eigen::Index l_size = config.basis->size();
  s.regret = Matrix::Zero(l_size, k_size);
  s.range = Matrix::Zero(l_size, k_size);
  s.variance = Matrix::Zero(l_size, k_size);
  s.eta = Matrix::Constant(l_size, k_size, kEtaCap);
  s.t = 0;
  return s;
}

double apply_soft_threshold(double x, double nu) {
  const double mag = std::abs(x) - nu;
  if (mag <= 0.0) return 0.0;
  return x < 0.0 ? -mag : mag;
}

double apply_hard_threshold(double x, double kappa) { return std::abs(x) > kappa ? x : 0.0; }

Vector apply_fixed_share(const Vector& row, double phi) {
  const double k = static_cast<double>(row.size());
  return (phi / k + (1.0 - phi) * row.array()).matrix();
}

void apply_shrinkage(Matrix& beta, double phi, double nu, double kappa) {
  const Eigen::Index k = beta.cols();
  for (Eigen::Index l = 0; l < beta.rows(); ++l) {
    if (phi > 0.0) beta.row(l) = apply_fixed_share(beta.row(l).transpose(), phi).transpose();
    if (nu <= 0.0 && kappa <= 0.0) continue;
    bool changed = false;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double before = beta(l, j);
      double x = apply_soft_threshold(before, nu);
      x = apply_hard_threshold(x, kappa);
      if (x != before) changed = true;
      beta(l, j) = x;
    }
    if (!changed) continue;
    beta.row(l) = beta.row(l).cwiseMax(0.0);
    const double sum = beta.row(l).sum();
    if (sum > 0.0) {
      beta.row(l) /= sum;
    } else {
      beta.row(l).setConstant(1.0 / static_cast<double>(k));
    }
  }
}

BoaLearner::BoaLearner(BoaConfig config, ProbGrid grid, std::size_t k)
    : config_(std::move(config)), grid_(std::move(grid)), k_(k), state_(init_state(config_, grid_, k)) {
  if (config_.lambda > 0.0) {
    const Matrix* cached = config_.basis->find_smoother(config_.lambda, config_.alpha);
    if (cached != nullptr && config_.basis->kind == BasisKind::identity) {
      // S B = S: alias the shared smoother instead of copying it
      smooth_basis_ = std::shared_ptr<const Matrix>(config_.basis, cached);
    } else if (cached != nullptr) {
      smooth_basis_ = std::make_shared<const Matrix>(*cached * config_.basis->basis);
    } else {
      smooth_basis_ =
          std::make_shared<const Matrix>(smoother(*config_.basis, config_.lambda, config_.alpha) * config_.basis->basis);
    }
  }
  neg_log_prior_ = state_.beta0.unaryExpr([](double b) { return -std::log(b); });
  refresh_weights();
}

Vector BoaLearner::predict(const Matrix& experts) const {
  check_slab(experts, grid_.size(), k_);
  return combine_sorted(weights_.weights, experts);
}

void BoaLearner::update(const Matrix& experts, double y) {
  if (!std::isfinite(y)) throw InputError("non-finite observation");
  const BasisSystem& sys = *config_.basis;
  LearnerState& s = state_;

  // (1) combined forecast with the current weights
  const Vector combined = predict(experts);

  // (2) instantaneous regret projected onto the basis
  const Matrix inst = linearized_instant_regret(combined, experts, y, grid_);
  Matrix r;
  if (sys.kind == BasisKind::identity) {
    r = inst;
  } else {
    const double scale = static_cast<double>(sys.size()) / static_cast<double>(sys.grid_size());
    r = scale * (sys.basis.transpose() * inst);
  }
  require_finite(r, "instantaneous regret");

  // (3) forgetting of every recursive state variable
  if (config_.forget > 0.0) {
    const double keep = 1.0 - config_.forget;
    s.regret *= keep;
    s.variance *= keep;
    s.range *= keep;
  }

  // (4) range and (5) variance
  s.range = s.range.cwiseMax(r.cwiseAbs());
  s.variance += r.cwiseProduct(r);

  // (6) learning rates
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index l = 0; l < r.rows(); ++l) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const double v = s.variance(l, j);
      const double e = s.range(l, j);
      const double by_variance = v > 0.0 ? std::sqrt(neg_log_prior_(l, j) / v) : inf;
      const double by_range = e > 0.0 ? 1.0 / (2.0 * e) : inf;
      const double eta = std::min(by_variance, by_range);
      s.eta(l, j) = std::isinf(eta) ? kEtaCap : eta;
    }
  }

  // (7) adjusted cumulative excess loss (loss orientation: -r is the expert's
  // linearized excess loss over the combination)
  for (Eigen::Index l = 0; l < r.rows(); ++l) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const double rj = r(l, j);
      const double eta = s.eta(l, j);
      s.regret(l, j) += -rj * (1.0 - eta * rj) / 2.0 + (-2.0 * eta * rj > 1.0 ? s.range(l, j) : 0.0);
    }
  }
  require_finite(s.regret, "regret");

  // (8) exponential weights per basis function, scaled by the prior
  if (k_ == 1) {
    s.beta.setOnes();
  } else {
    Matrix& x = scratch_;
    x = s.eta.unaryExpr([](double e) { return std::log(e); }) - s.eta.cwiseProduct(s.regret);
    for (Eigen::Index l = 0; l < r.rows(); ++l) {
      x.row(l).array() -= x.row(l).maxCoeff();
      s.beta.row(l) = s.beta0.row(l).cwiseProduct(x.row(l).unaryExpr([](double v) { return std::exp(v); }));
      s.beta.row(l) /= s.beta.row(l).sum();
    }
  }
  require_finite(s.beta, "softmax");

  // (9) shrinkage
  apply_shrinkage(s.beta, config_.fixed_share, config_.soft_threshold, config_.hard_threshold);

  // (10) weight surface for the next prediction
  refresh_weights();
  require_finite(weights_.weights, "smoothing");

  ++s.t;
}

void BoaLearner::refresh_weights() {
  const BasisSystem& sys = *config_.basis;
  if (smooth_basis_) {
    // column-wise products: K is small, so matrix-vector beats a packed GEMM
    weights_.weights.resize(smooth_basis_->rows(), state_.beta.cols());
    for (Eigen::Index j = 0; j < state_.beta.cols(); ++j) {
      weights_.weights.col(j).noalias() = *smooth_basis_ * state_.beta.col(j);
    }
  } else if (sys.kind == BasisKind::identity) {
    weights_.weights = state_.beta;
  } else {
    weights_.weights = sys.basis * state_.beta;
  }
  weights_.convex = true;
}

}  // namespace crpslearn

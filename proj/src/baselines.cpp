#include "crpslearn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "crpslearn/loss.hpp"

namespace crpslearn {
namespace {

Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index l = 0; l < x.rows(); ++l) {
    const double mx = x.row(l).maxCoeff();
    Eigen::RowVectorXd e = (x.row(l).array() - mx).exp().matrix();
    out.row(l) = e / e.sum();
  }
  return out;
}

Matrix project_losses(const BasisSystem* sys, const Matrix& loss) {
  if (sys == nullptr || sys->kind == BasisKind::identity) return loss;
  const double scale = static_cast<double>(sys->size()) / static_cast<double>(sys->grid_size());
  return scale * (sys->basis.transpose() * loss);
}

double rho(double u, double p) { return u * (p - (u < 0.0 ? 1.0 : 0.0)); }

// Exact minimizer over s in [lo, hi] of sum_i rho_p(c_i - s b_i).
double line_search(const Vector& c, const Vector& b, double p, double lo, double hi) {
  std::vector<std::pair<double, double>> kinks;  // (breakpoint, |b|)
  double slope = 0.0;                            // slope as s -> -inf
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (b[i] > 0.0) {
      slope -= b[i] * p;
    } else if (b[i] < 0.0) {
      slope -= b[i] * (p - 1.0);
    } else {
      continue;
    }
    kinks.emplace_back(c[i] / b[i], std::abs(b[i]));
  }
  if (kinks.empty()) return std::clamp(0.0, lo, hi);
  std::sort(kinks.begin(), kinks.end());
  double s = kinks.back().first;
  for (const auto& [point, weight] : kinks) {
    slope += weight;
    if (slope >= 0.0) {
      s = point;
      break;
    }
  }
  return std::clamp(s, lo, hi);
}

}  // namespace

// ---------------------------------------------------------------------------

Matrix ewa_step(const Matrix& weights, const Matrix& loss, double eta) {
  return softmax_rows(weights.array().log().matrix() - eta * loss);
}

std::vector<double> ewa_eta_grid_default() {
  std::vector<double> etas;
  for (int i = 0; i <= 60; ++i) etas.push_back(std::exp2(-3.0 + 0.2 * i));
  return etas;
}

std::vector<double> ewa_eta_grid_simulation() {
  std::vector<double> etas;
  for (int i = 0; i < 20; ++i) etas.push_back(1.0 - std::sqrt(0.05 * i));
  return etas;
}

EwaLearner::EwaLearner(EwaConfig config, ProbGrid grid, std::size_t k)
    : config_(std::move(config)), grid_(std::move(grid)), k_(k) {
  if (!(config_.eta >= 0.0) || !std::isfinite(config_.eta)) throw InputError("EWA learning rate must be finite and >= 0");
  if (k < 1) throw InputError("EWA needs at least one expert");
  const auto m_size = static_cast<Eigen::Index>(grid_.size());
  const auto k_size = static_cast<Eigen::Index>(k);
  if (!config_.basis) config_.basis = std::make_shared<const BasisSystem>(identity_basis(grid_));
  if (config_.basis->grid_size() != m_size) throw InputError("basis was built for a different grid size");
  Matrix prior = config_.prior.size() == 0 ? naive_weights(m_size, k_size).weights : config_.prior;
  if (prior.rows() != m_size || prior.cols() != k_size) throw InputError("prior must be an M x K weight surface");
  if (prior.minCoeff() <= 0.0) throw InputError("EWA prior must be strictly positive");
  Matrix coef = pinv_init(*config_.basis, prior).cwiseMax(1e-12);
  for (Eigen::Index l = 0; l < coef.rows(); ++l) coef.row(l) /= coef.row(l).sum();
  state_.coefficients = coef;
  state_.log_weights = coef.array().log().matrix();
  weights_.weights = config_.basis->kind == BasisKind::identity ? coef : Matrix(config_.basis->basis * coef);
}

Vector EwaLearner::predict(const Matrix& experts) const {
  check_slab(experts, grid_.size(), k_);
  return combine_sorted(weights_.weights, experts);
}

void EwaLearner::update(const Matrix& experts, double y) {
  if (!std::isfinite(y)) throw InputError("non-finite observation");
  const Vector combined = predict(experts);
  Matrix loss(experts.rows(), experts.cols());
  for (Eigen::Index m = 0; m < experts.rows(); ++m) {
    const double p = grid_[static_cast<std::size_t>(m)];
    if (config_.gradient) {
      const double g = pinball_subgrad(combined[m], y, p);
      loss.row(m) = g * experts.row(m);
    } else {
      for (Eigen::Index j = 0; j < experts.cols(); ++j) loss(m, j) = pinball(experts(m, j), y, p);
    }
  }
  state_.log_weights -= config_.eta * project_losses(config_.basis.get(), loss);
  // Keep the accumulator bounded; softmax is shift invariant per row.
  for (Eigen::Index l = 0; l < state_.log_weights.rows(); ++l) {
    state_.log_weights.row(l).array() -= state_.log_weights.row(l).maxCoeff();
  }
  state_.coefficients = softmax_rows(state_.log_weights);
  if (!state_.coefficients.allFinite()) throw NumericalError("non-finite EWA weights");
  weights_.weights = config_.basis->kind == BasisKind::identity ? state_.coefficients
                                                                 : Matrix(config_.basis->basis * state_.coefficients);
  ++state_.t;
}

// ---------------------------------------------------------------------------

Matrix quantile_bic(const BicInput& input) {
  if (!(input.window >= 1.0)) throw InputError("BIC window length must be >= 1");
  if (input.residual_means.size() == 0) throw InputError("BIC needs residual means");
  if (input.residual_means.minCoeff() <= 0.0) {
    throw InputError("BIC residual means must be > 0 (a perfect in-sample fit has no finite BIC)");
  }
  Matrix bic = 2.0 * input.residual_means.array().log().matrix();
  if (input.df.size() > 0) {
    if (input.df.rows() != bic.rows() || input.df.cols() != bic.cols()) throw InputError("df shape mismatch");
    bic += (std::log(input.window) / input.window) * input.df;
  }
  return bic;
}

WeightSurface bma_weights(const Matrix& bic, double eta) {
  if (!(eta > 0.0)) throw InputError("BMA learning rate must be > 0");
  if (std::isinf(eta)) {
    Matrix w = Matrix::Zero(bic.rows(), bic.cols());
    for (Eigen::Index m = 0; m < bic.rows(); ++m) {
      Eigen::Index best = 0;
      for (Eigen::Index j = 1; j < bic.cols(); ++j) {
        if (bic(m, j) < bic(m, best)) best = j;
      }
      w(m, best) = 1.0;
    }
    return WeightSurface{w, true};
  }
  return WeightSurface{softmax_rows(-eta * bic), true};
}

// ---------------------------------------------------------------------------

Vector project_to_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    cumulative += u[static_cast<std::size_t>(i)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

double qr_objective(const Matrix& x, std::span<const double> y, double p, const Vector& w) {
  const Vector fitted = x * w;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum += rho(y[static_cast<std::size_t>(i)] - fitted[i], p);
  return sum / static_cast<double>(x.rows());
}

QrResult batch_qr_pointwise(const Matrix& x, std::span<const double> y, double p, QrConstraint constraint,
                            const QrOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("quantile regression probability outside (0,1)");
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (k < 1 || n < 1) throw InputError("quantile regression needs a non-empty window");
  if (static_cast<std::size_t>(n) != y.size()) throw InputError("window length mismatch between experts and observations");
  if (constraint == QrConstraint::linear && n < k) throw InputError("linear quantile regression needs window length >= K");

  const bool convex = constraint == QrConstraint::convex;
  const double mean_sq_norm = x.rowwise().squaredNorm().mean();
  const double step_scale = options.step_scale > 0.0 ? options.step_scale
                                                     : 1.0 / std::sqrt(std::max(mean_sq_norm, 1e-300));
  const Eigen::Map<const Vector> yv(y.data(), n);

  Vector w = Vector::Constant(k, 1.0 / static_cast<double>(k));
  Vector best = w;
  double best_obj = qr_objective(x, y, p, w);
  std::deque<double> history{best_obj};
  bool converged = false;
  std::size_t iter = 0;
  double gap = std::numeric_limits<double>::infinity();

  while (iter < options.max_iterations) {
    ++iter;
    const Vector resid = yv - x * w;
    Vector grad = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) grad -= (p - (resid[i] < 0.0 ? 1.0 : 0.0)) * x.row(i).transpose();
    grad /= static_cast<double>(n);
    const double gnorm = grad.norm();
    if (gnorm == 0.0) {
      converged = true;
      break;
    }
    w -= (step_scale / std::sqrt(static_cast<double>(iter))) * grad;
    if (convex) w = project_to_simplex(w);
    const double obj = qr_objective(x, y, p, w);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
    history.push_back(best_obj);
    if (history.size() > options.window + 1) history.pop_front();
    if (history.size() == options.window + 1) {
      gap = history.front() - history.back();
      if (gap < options.tolerance) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "quantile regression did not converge in " << options.max_iterations << " iterations (last improvement "
        << gap << ")";
    throw QrNonConvergence(msg.str(), best, gap);
  }

  // Polish with exact line searches along simplex edges or coordinate axes.
  w = best;
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double start = best_obj;
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = convex ? i + 1 : i; j < (convex ? k : i + 1); ++j) {
        Vector dir = Vector::Zero(k);
        dir[i] = 1.0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        if (convex) {
          dir[j] = -1.0;
          lo = -w[i];
          hi = w[j];
        }
        const Vector c = yv - x * w;
        const Vector b = x * dir;
        const double s = line_search(c, b, p, lo, hi);
        Vector candidate = w + s * dir;
        if (convex) {
          candidate = candidate.cwiseMax(0.0);
          candidate /= candidate.sum();
        }
        const double obj = qr_objective(x, y, p, candidate);
        if (obj < best_obj) {
          best_obj = obj;
          w = candidate;
        }
      }
    }
    if (start - best_obj <= 1e-15 * std::max(1.0, std::abs(start))) break;
  }
  return QrResult{w, best_obj, iter};
}

QrResult batch_qr_pointwise(const ExpertPanel& panel, const ObservationStream& obs, const ProbGrid& grid,
                            std::size_t m, QrConstraint constraint, const QrOptions& options) {
  if (m >= grid.size()) throw InputError("grid index out of range");
  if (panel.times() != obs.size()) throw InputError("time axis mismatch");
  const auto n = static_cast<Eigen::Index>(panel.times());
  const auto k = static_cast<Eigen::Index>(panel.experts());
  Matrix x(n, k);
  for (Eigen::Index t = 0; t < n; ++t) x.row(t) = panel.slabs[static_cast<std::size_t>(t)].row(static_cast<Eigen::Index>(m));
  return batch_qr_pointwise(x, obs.y, grid[m], constraint, options);
}

}  // namespace crpslearn

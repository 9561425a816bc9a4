#include "crpslearn/tuning.hpp"

#include <cmath>
#include <sstream>

#include "crpslearn/baselines.hpp"
#include "crpslearn/loss.hpp"

namespace crpslearn {

TuningGrid::TuningGrid(ProbGrid grid, std::vector<std::unique_ptr<OnlineCombiner>> learners,
                       std::vector<std::string> labels)
    : grid_(std::move(grid)), learners_(std::move(learners)), labels_(std::move(labels)) {
  if (learners_.empty()) throw InputError("tuning grid is empty");
  if (labels_.empty()) {
    for (std::size_t i = 0; i < learners_.size(); ++i) labels_.push_back("config" + std::to_string(i));
  }
  if (labels_.size() != learners_.size()) throw InputError("one label per tuning configuration required");
  cum_loss_.assign(learners_.size(), 0.0);
}

Vector TuningGrid::predict(const Matrix& experts) const { return learners_[active_]->predict(experts); }

const WeightSurface& TuningGrid::weights() const { return learners_[active_]->weights(); }

Vector TuningGrid::step(const Matrix& experts, double y) {
  Vector emitted;
  for (std::size_t i = 0; i < learners_.size(); ++i) {
    const Vector forecast = learners_[i]->predict(experts);
    if (i == active_) emitted = forecast;
    cum_loss_[i] += crps_grid(forecast, y, grid_);
    learners_[i]->update(experts, y);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < cum_loss_.size(); ++i) {
    if (cum_loss_[i] < cum_loss_[best]) best = i;
  }
  active_ = best;
  return emitted;
}

TuningGrid make_boa_grid(const ProbGrid& grid, std::size_t k, const BoaGridSpec& spec) {
  std::vector<std::shared_ptr<const BasisSystem>> bases;
  std::vector<std::string> basis_labels;
  auto finish_basis = [&](BasisSystem sys, std::string label) {
    for (double lambda : spec.lambdas) {
      if (lambda > 0.0) add_smoother(sys, lambda, spec.alpha);
    }
    bases.push_back(std::make_shared<const BasisSystem>(std::move(sys)));
    basis_labels.push_back(std::move(label));
  };
  switch (spec.basis) {
    case BasisChoice::pointwise:
      finish_basis(identity_basis(grid), "pointwise");
      break;
    case BasisChoice::constant:
      finish_basis(constant_basis(grid), "constant");
      break;
    case BasisChoice::bspline:
      for (double d : spec.knot_distances) {
        std::ostringstream label;
        label << "bspline(d=" << d << ")";
        finish_basis(bspline_basis(grid, d, spec.degree), label.str());
      }
      if (spec.add_constant_basis) finish_basis(constant_basis(grid), "constant");
      break;
  }

  std::vector<std::unique_ptr<OnlineCombiner>> learners;
  std::vector<std::string> labels;
  for (std::size_t b = 0; b < bases.size(); ++b) {
    for (double lambda : spec.lambdas) {
      for (double forget : spec.forgets) {
        for (double phi : spec.fixed_shares) {
          for (double nu : spec.soft_thresholds) {
            for (double kappa : spec.hard_thresholds) {
              BoaConfig cfg;
              cfg.lambda = lambda;
              cfg.alpha = spec.alpha;
              cfg.forget = forget;
              cfg.fixed_share = phi;
              cfg.soft_threshold = nu;
              cfg.hard_threshold = kappa;
              cfg.basis = bases[b];
              learners.push_back(std::make_unique<BoaLearner>(std::move(cfg), grid, k));
              std::ostringstream label;
              label << basis_labels[b] << ";lambda=" << lambda << ";forget=" << forget << ";phi=" << phi
                    << ";nu=" << nu << ";kappa=" << kappa;
              labels.push_back(label.str());
            }
          }
        }
      }
    }
  }
  return TuningGrid(grid, std::move(learners), std::move(labels));
}

TuningGrid make_ewa_grid(const ProbGrid& grid, std::size_t k, const std::vector<double>& etas, bool gradient) {
  std::vector<std::unique_ptr<OnlineCombiner>> learners;
  std::vector<std::string> labels;
  for (double eta : etas) {
    EwaConfig cfg;
    cfg.eta = eta;
    cfg.gradient = gradient;
    learners.push_back(std::make_unique<EwaLearner>(std::move(cfg), grid, k));
    std::ostringstream label;
    label << (gradient ? "ewag" : "ewa") << ";eta=" << eta;
    labels.push_back(label.str());
  }
  return TuningGrid(grid, std::move(learners), std::move(labels));
}

std::vector<double> power_of_two_grid(int lo, int hi) {
  std::vector<double> out;
  for (int x = lo; x <= hi; ++x) out.push_back(std::ldexp(1.0, x));
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> out{0.0};
  for (double v : power_of_two_grid(-4, 13)) out.push_back(v);
  out.push_back(std::ldexp(1.0, 30));
  return out;
}

std::vector<double> default_forget_grid(std::size_t horizon) {
  const int top = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(horizon, 2)))));
  std::vector<double> out = power_of_two_grid(-top, -1);
  out.push_back(0.0);
  return out;
}

std::vector<double> default_knot_distances() {
  std::vector<double> out;
  for (int i = 0; i <= 33; ++i) {
    const double d = 0.005 + 0.015 * i;
    if (d > 0.5 + 1e-12) break;
    out.push_back(d);
  }
  return out;
}

}  // namespace crpslearn

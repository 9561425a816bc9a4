#include "crpslearn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "crpslearn/loss.hpp"
#include "crpslearn/normal.hpp"
#include "crpslearn/tuning.hpp"
#include "crpslearn/baselines.hpp"

namespace crpslearn {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<GaussianExpert> simulation_experts() { return {{-1.0, 1.0}, {3.0, 2.0}}; }

Vector expert_quantiles(const GaussianExpert& expert, const ProbGrid& grid) {
  if (!(expert.sigma > 0.0)) throw InputError("expert sigma must be > 0");
  Vector q(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t m = 0; m < grid.size(); ++m) q[static_cast<Eigen::Index>(m)] = expert.mu + expert.sigma * normal_quantile(grid[m]);
  return q;
}

Matrix expert_slab(std::span<const GaussianExpert> experts, const ProbGrid& grid) {
  Matrix slab(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(experts.size()));
  for (std::size_t j = 0; j < experts.size(); ++j) slab.col(static_cast<Eigen::Index>(j)) = expert_quantiles(experts[j], grid);
  return slab;
}

ObservationStream dgp_static_sample(std::size_t horizon, Rng& rng) {
  std::normal_distribution<double> normal;
  ObservationStream obs;
  obs.y.resize(horizon);
  for (double& y : obs.y) y = normal(rng);
  return obs;
}

DriftingSample dgp_drifting_from_innovations(std::span<const double> latent_noise, std::span<const double> obs_noise) {
  if (latent_noise.size() != obs_noise.size()) throw InputError("innovation sequences differ in length");
  DriftingSample s;
  const std::size_t n = latent_noise.size();
  s.latent.resize(n);
  s.location.resize(n);
  s.obs.y.resize(n);
  double mu = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mu = 0.99 * mu + latent_noise[t];
    s.latent[t] = mu;
    s.location[t] = 0.15 * std::asinh(mu);
    s.obs.y[t] = s.location[t] + obs_noise[t];
  }
  return s;
}

DriftingSample dgp_drifting_sample(std::size_t horizon, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> latent(horizon), noise(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    latent[t] = normal(rng);
    noise[t] = normal(rng);
  }
  return dgp_drifting_from_innovations(latent, noise);
}

double optimal_weight_shifted(double p, double location) {
  const double z = normal_quantile(p);
  return (3.0 + z - location) / (4.0 + z);
}

double optimal_weight_static(double p) { return optimal_weight_shifted(p, 0.0); }

double best_attainable_ql(double p, std::size_t n_mc, Rng& rng) {
  if (n_mc < 1) throw InputError("best_attainable_ql needs at least one draw");
  const double q = normal_quantile(p);
  std::normal_distribution<double> normal;
  double sum = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) sum += pinball(q, normal(rng), p);
  return sum / static_cast<double>(n_mc);
}

// ---------------------------------------------------------------------------

const StudyRow& StudyResult::row(const std::string& spec, std::size_t horizon) const {
  for (const auto& r : rows) {
    if (r.spec == spec && r.horizon == horizon) return r;
  }
  throw InputError("no study row for spec '" + spec + "' at horizon " + std::to_string(horizon));
}

const Vector& StudyResult::profile(const std::string& spec, std::size_t horizon) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].spec == spec && rows[i].horizon == horizon) return profiles[i];
  }
  throw InputError("no study profile for spec '" + spec + "' at horizon " + std::to_string(horizon));
}

namespace {

// Per-repetition statistics for every (spec, horizon).
struct RepOutcome {
  std::vector<double> crps;      // [spec * H + h]
  std::vector<double> distance;  // [spec * H + h]
  std::vector<Vector> profile;   // [spec * H + h]
  std::vector<std::vector<double>> config_crps;  // [spec * H + h][config]
  std::vector<std::vector<std::string>> config_labels;  // [spec]
};

RepOutcome run_rep(const SimSpec& sim, const ProbGrid& grid, std::size_t rep) {
  const std::size_t horizon = *std::max_element(sim.horizons.begin(), sim.horizons.end());
  Rng rng(derive_seed(sim.seed, rep));
  std::vector<double> location(horizon, 0.0);
  ObservationStream obs;
  if (sim.dgp == Dgp::static_normal) {
    obs = dgp_static_sample(horizon, rng);
  } else {
    DriftingSample d = dgp_drifting_sample(horizon, rng);
    obs = std::move(d.obs);
    location = std::move(d.location);
  }
  const auto experts = simulation_experts();
  const Matrix slab = expert_slab(experts, grid);
  const auto m_size = static_cast<Eigen::Index>(grid.size());
  Vector z(m_size);
  for (Eigen::Index m = 0; m < m_size; ++m) z[m] = normal_quantile(grid[static_cast<std::size_t>(m)]);

  const std::size_t n_h = sim.horizons.size();
  RepOutcome out;
  out.crps.assign(sim.specs.size() * n_h, 0.0);
  out.distance.assign(sim.specs.size() * n_h, 0.0);
  out.profile.assign(sim.specs.size() * n_h, Vector::Zero(m_size));
  out.config_crps.assign(sim.specs.size() * n_h, {});
  out.config_labels.assign(sim.specs.size(), {});

  for (std::size_t s = 0; s < sim.specs.size(); ++s) {
    auto combiner = sim.specs[s].make(grid, experts.size(), horizon);
    const auto* tuner = dynamic_cast<const TuningGrid*>(combiner.get());
    if (tuner != nullptr) out.config_labels[s] = tuner->labels();
    double crps_sum = 0.0;
    Vector dist_sum = Vector::Zero(m_size);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double y = obs.y[t];
      const Vector forecast = combiner->predict(slab);
      combiner->update(slab, y);
      crps_sum += crps_grid(forecast, y, grid);
      for (Eigen::Index m = 0; m < m_size; ++m) {
        const double p = grid[static_cast<std::size_t>(m)];
        dist_sum[m] += pinball(forecast[m], y, p) - pinball(location[t] + z[m], y, p);
      }
      for (std::size_t h = 0; h < n_h; ++h) {
        if (sim.horizons[h] != t + 1) continue;
        const double n = static_cast<double>(t + 1);
        out.crps[s * n_h + h] = crps_sum / n;
        out.profile[s * n_h + h] = dist_sum / n;
        out.distance[s * n_h + h] = dist_sum.mean() / n;
        if (tuner != nullptr) {
          auto& cfg = out.config_crps[s * n_h + h];
          cfg = tuner->cumulative_loss();
          for (double& c : cfg) c /= n;
        }
      }
    }
  }
  return out;
}

void mean_and_se(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

StudyResult run_study(const SimSpec& sim) {
  if (sim.horizons.empty() || sim.reps < 1) throw InputError("study needs at least one horizon and one repetition");
  for (std::size_t h : sim.horizons) {
    if (h < 1) throw InputError("study horizons must be >= 1");
  }
  if (sim.specs.empty()) throw InputError("study has no combiner specifications");

  StudyResult result;
  const ProbGrid& grid = result.grid;
  std::vector<RepOutcome> outcomes(sim.reps);
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(sim.threads, sim.reps));
  if (n_threads == 1) {
    for (std::size_t r = 0; r < sim.reps; ++r) outcomes[r] = run_rep(sim, grid, r);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < sim.reps; r += n_threads) outcomes[r] = run_rep(sim, grid, r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const std::size_t n_h = sim.horizons.size();
  for (std::size_t s = 0; s < sim.specs.size(); ++s) {
    for (std::size_t h = 0; h < n_h; ++h) {
      const std::size_t idx = s * n_h + h;
      std::vector<double> crps, ql, dist;
      Vector profile = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
      for (const auto& o : outcomes) {
        crps.push_back(o.crps[idx]);
        ql.push_back(0.5 * o.crps[idx]);
        dist.push_back(o.distance[idx]);
        profile += o.profile[idx];
      }
      StudyRow row;
      row.spec = sim.specs[s].name;
      row.horizon = sim.horizons[h];
      row.reps = sim.reps;
      mean_and_se(crps, row.mean_crps, row.se_crps);
      mean_and_se(ql, row.mean_ql, row.se_ql);
      mean_and_se(dist, row.mean_distance, row.se_distance);
      result.rows.push_back(row);
      result.profiles.push_back(profile / static_cast<double>(sim.reps));
      std::vector<double> cfg(outcomes.front().config_crps[idx].size(), 0.0);
      for (const auto& o : outcomes) {
        for (std::size_t c = 0; c < cfg.size(); ++c) cfg[c] += o.config_crps[idx][c];
      }
      for (double& c : cfg) c /= static_cast<double>(sim.reps);
      result.config_crps.push_back(std::move(cfg));
      result.config_labels.push_back(outcomes.front().config_labels[s]);
    }
  }
  return result;
}

namespace {

StudySpec boa_spec(std::string name, BoaGridSpec grid_spec, bool forget_grid = false,
                   std::vector<double> forgets = {}) {
  return StudySpec{std::move(name), [grid_spec, forget_grid, forgets](const ProbGrid& grid, std::size_t k,
                                                                      std::size_t horizon) {
                     BoaGridSpec g = grid_spec;
                     if (forget_grid) g.forgets = forgets.empty() ? default_forget_grid(horizon) : forgets;
                     return std::unique_ptr<OnlineCombiner>(std::make_unique<TuningGrid>(make_boa_grid(grid, k, g)));
                   }};
}

}  // namespace

std::vector<StudySpec> static_study_specs() {
  std::vector<StudySpec> specs;
  BoaGridSpec pointwise;
  specs.push_back(boa_spec("Pointwise", pointwise));

  BoaGridSpec b_smooth;
  b_smooth.basis = BasisChoice::bspline;
  b_smooth.knot_distances = default_knot_distances();
  b_smooth.degree = 3;
  b_smooth.add_constant_basis = true;
  specs.push_back(boa_spec("B-Smooth", b_smooth));

  BoaGridSpec p_smooth;
  p_smooth.lambdas = power_of_two_grid(-15, 25);
  specs.push_back(boa_spec("P-Smooth", p_smooth));

  BoaGridSpec b_constant;
  b_constant.basis = BasisChoice::constant;
  specs.push_back(boa_spec("B-Constant", b_constant));

  BoaGridSpec p_constant;
  p_constant.lambdas = {std::ldexp(1.0, 30)};
  specs.push_back(boa_spec("P-Constant", p_constant));

  specs.push_back(StudySpec{"EWAG", [](const ProbGrid& grid, std::size_t k, std::size_t) {
                              return std::unique_ptr<OnlineCombiner>(
                                  std::make_unique<TuningGrid>(make_ewa_grid(grid, k, ewa_eta_grid_simulation(), true)));
                            }});
  return specs;
}

std::vector<StudySpec> drifting_study_specs(const std::vector<double>& forgets) {
  std::vector<StudySpec> specs;
  BoaGridSpec pointwise;
  BoaGridSpec p_smooth;
  p_smooth.lambdas = default_lambda_grid();
  const auto& cols = table1_columns();
  specs.push_back(boa_spec(cols[0], pointwise));
  specs.push_back(boa_spec(cols[1], p_smooth));
  specs.push_back(boa_spec(cols[2], pointwise, true, forgets));
  specs.push_back(boa_spec(cols[3], p_smooth, true, forgets));
  return specs;
}

}  // namespace crpslearn

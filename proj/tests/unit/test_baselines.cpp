#include <doctest.h>

#include <random>

#include "crpslearn/baselines.hpp"
#include "crpslearn/errors.hpp"
#include "crpslearn/loss.hpp"
#include "crpslearn/simulate.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace crpslearn;

TEST_CASE("naive weights") {
  CHECK((naive_weights(99, 2).weights.array() == 0.5).all());
  CHECK(naive_weights(99, 1).weights.isOnes());
  CHECK(naive_weights(5, 7).on_simplex(1e-14));
}

TEST_CASE("EWA with zero learning rate keeps the prior") {
  const ProbGrid g = ProbGrid::percentiles();
  EwaConfig c;
  c.eta = 0.0;
  EwaLearner l(c, g, 3);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) l.update(testutil::random_slab(rng, 99, 3), 0.3);
  CHECK((l.weights().weights.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("equal expert losses leave EWA weights unchanged") {
  Matrix w(1, 3);
  w << 0.2, 0.3, 0.5;
  const Matrix loss = Matrix::Constant(1, 3, 1.7);
  CHECK((ewa_step(w, loss, 2.0) - w).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("recursive EWA equals the batch softmax of cumulative losses") {
  const ProbGrid g = ProbGrid::percentiles();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (bool gradient : {false, true}) {
    EwaConfig c;
    c.eta = 0.7;
    c.gradient = gradient;
    EwaLearner l(c, g, 3);
    Matrix cumulative = Matrix::Zero(99, 3);
    for (int t = 0; t < 5; ++t) {
      const Matrix x = testutil::random_slab(rng, 99, 3);
      const double y = n(rng);
      const Vector combined = l.predict(x);
      for (Eigen::Index m = 0; m < 99; ++m) {
        const double p = g[static_cast<std::size_t>(m)];
        for (Eigen::Index k = 0; k < 3; ++k) {
          cumulative(m, k) += gradient ? pinball_subgrad(combined[m], y, p) * x(m, k) : pinball(x(m, k), y, p);
        }
      }
      l.update(x, y);
    }
    Matrix batch = (-0.7 * cumulative).array().exp().matrix();
    batch.array().colwise() /= batch.rowwise().sum().array();
    CHECK((l.weights().weights - batch).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("EWA gradient mode is never worse than the worst expert on the static design") {
  const ProbGrid g = ProbGrid::percentiles();
  const Matrix slab = expert_slab(simulation_experts(), g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(derive_seed(77, seed));
    const auto obs = dgp_static_sample(500, rng);
    for (double eta : {0.05, 0.5, 2.0}) {
      EwaConfig c;
      c.eta = eta;
      EwaLearner l(c, g, 2);
      double learner = 0.0, e1 = 0.0, e2 = 0.0;
      for (double y : obs.y) {
        learner += crps_grid(l.predict(slab), y, g);
        e1 += crps_grid(Vector(slab.col(0)), y, g);
        e2 += crps_grid(Vector(slab.col(1)), y, g);
        l.update(slab, y);
      }
      CHECK(learner <= std::max(e1, e2));
    }
  }
}

TEST_CASE("EWA weights stay on the simplex") {
  const ProbGrid g = ProbGrid::percentiles();
  std::mt19937_64 rng(3);
  EwaConfig c;
  c.eta = 4.0;
  EwaLearner l(c, g, 4);
  for (int t = 0; t < 100; ++t) {
    l.update(testutil::random_slab(rng, 99, 4), 0.1 * t - 5);
    CHECK(l.weights().on_simplex(1e-12));
  }
}

TEST_CASE("learning-rate grids") {
  const auto d = ewa_eta_grid_default();
  REQUIRE(d.size() == 61);
  CHECK(d.front() == doctest::Approx(0.125));
  CHECK(d.back() == doctest::Approx(512.0));
  const auto s = ewa_eta_grid_simulation();
  REQUIRE(s.size() == 20);
  CHECK(s.front() == 1.0);
  CHECK(s.back() == doctest::Approx(1 - std::sqrt(0.95)));
}

TEST_CASE("quantile BIC") {
  BicInput in;
  in.residual_means = Matrix::Ones(2, 2);
  in.window = 100;
  CHECK(quantile_bic(in).isZero());
  in.residual_means.setConstant(std::exp(1.0));
  CHECK((quantile_bic(in).array() - 2.0).abs().maxCoeff() < 1e-14);
  in.df = Matrix::Constant(2, 2, 3.0);
  const double expected = 2.0 + std::log(100.0) * 3.0 / 100.0;
  CHECK((quantile_bic(in).array() - expected).abs().maxCoeff() < 1e-14);
  in.residual_means(0, 0) = 0.0;
  CHECK_THROWS_AS(quantile_bic(in), InputError);
}

TEST_CASE("BMA weights") {
  CHECK((bma_weights(Matrix::Constant(3, 4, 1.3), 0.5).weights.array() - 0.25).abs().maxCoeff() < 1e-15);

  Matrix bic(1, 2);
  const double d = 1.4;
  bic << 0.0, d;
  const auto w = bma_weights(bic, 0.5).weights;
  CHECK(w(0, 0) == doctest::Approx(std::exp(d / 2) / (1 + std::exp(d / 2))));

  Matrix tie(2, 3);
  tie << 1, 0, 0, 2, 5, 1;
  const auto hard = bma_weights(tie, std::numeric_limits<double>::infinity()).weights;
  CHECK(hard.row(0) == Eigen::RowVector3d(0, 1, 0));
  CHECK(hard.row(1) == Eigen::RowVector3d(0, 0, 1));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Matrix r(5, 3);
  for (auto& v : r.reshaped()) v = n(rng);
  const auto base = bma_weights(r, 1.3).weights;
  const auto shifted = bma_weights(r.array() + 7.25, 1.3).weights;
  CHECK((base - shifted).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(bma_weights(r, 1.3).on_simplex(1e-14));
}

TEST_CASE("simplex projection") {
  Vector v(3);
  v << 0.2, 0.3, 0.5;
  CHECK((project_to_simplex(v) - v).cwiseAbs().maxCoeff() < 1e-15);
  v << 2, 0, 0;
  CHECK(project_to_simplex(v) == Eigen::Vector3d(1, 0, 0));
  v << -1, 0.5, 0.5;
  CHECK((project_to_simplex(v) - Eigen::Vector3d(0, 0.5, 0.5)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("batch QR recovers an exact convex mixture") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  Matrix x(200, 2);
  std::vector<double> y(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    x(i, 0) = n(rng);
    x(i, 1) = 2 + n(rng);
    y[static_cast<std::size_t>(i)] = 0.3 * x(i, 0) + 0.7 * x(i, 1);
  }
  const auto r = batch_qr_pointwise(x, y, 0.4, QrConstraint::convex);
  CHECK(r.weights[0] == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(r.weights[1] == doctest::Approx(0.7).epsilon(1e-3));
  CHECK(r.objective < 1e-6);
}

TEST_CASE("batch QR with one expert puts all weight on it") {
  Matrix x(20, 1);
  std::vector<double> y(20);
  for (int i = 0; i < 20; ++i) x(i, 0) = y[static_cast<std::size_t>(i)] = i * 0.1;
  const auto r = batch_qr_pointwise(x, y, 0.7, QrConstraint::convex);
  CHECK(r.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("batch QR beats every vertex and matches the brute-force scan") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> up(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t len = 150;
    const double p = up(rng);
    Matrix x(len, 2);
    std::vector<double> y(len), x1(len), x2(len);
    for (std::size_t i = 0; i < len; ++i) {
      x1[i] = x(static_cast<Eigen::Index>(i), 0) = n(rng) - 1;
      x2[i] = x(static_cast<Eigen::Index>(i), 1) = 2 * n(rng) + 3;
      y[i] = n(rng);
    }
    const auto r = batch_qr_pointwise(x, y, p, QrConstraint::convex);
    CHECK(r.weights.minCoeff() >= 0.0);
    CHECK(r.weights.sum() == doctest::Approx(1.0));
    CHECK(r.objective <= qr_objective(x, y, p, Eigen::Vector2d(1, 0)) + 1e-12);
    CHECK(r.objective <= qr_objective(x, y, p, Eigen::Vector2d(0, 1)) + 1e-12);
    const double w = oracle::brute_force_convex_weight(x1, x2, y, p, 1e-4);
    CHECK(std::abs(r.objective - oracle::convex_objective(x1, x2, y, p, w)) < 1e-3);
  }
}

TEST_CASE("linear QR is at least as good as convex QR") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  Matrix x(100, 2);
  std::vector<double> y(100);
  for (Eigen::Index i = 0; i < 100; ++i) {
    x(i, 0) = n(rng);
    x(i, 1) = n(rng);
    y[static_cast<std::size_t>(i)] = 1.5 * x(i, 0) - 0.2 * x(i, 1) + 0.1 * n(rng);
  }
  const auto lin = batch_qr_pointwise(x, y, 0.5, QrConstraint::linear);
  const auto cvx = batch_qr_pointwise(x, y, 0.5, QrConstraint::convex);
  CHECK(lin.objective <= cvx.objective + 1e-9);
  CHECK(lin.weights[0] == doctest::Approx(1.5).epsilon(0.05));
}

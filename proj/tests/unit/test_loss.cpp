#include <doctest.h>

#include <cmath>
#include <random>

#include "crpslearn/errors.hpp"
#include "crpslearn/loss.hpp"
#include "crpslearn/normal.hpp"

using namespace crpslearn;

TEST_CASE("pinball loss hand values") {
  CHECK(pinball(0, 0, 0.3) == 0.0);
  CHECK(pinball(0, 1, 0.5) == doctest::Approx(0.5));
  CHECK(pinball(2, 0, 0.1) == doctest::Approx(1.8));
  CHECK_THROWS_AS(pinball(0, 0, 1.0), InputError);
  CHECK_THROWS_AS(pinball(0, 0, 0.0), InputError);
}

TEST_CASE("pinball subgradient including the kink convention") {
  CHECK(pinball_subgrad(1, 0, 0.5) == doctest::Approx(0.5));
  CHECK(pinball_subgrad(0, 1, 0.5) == doctest::Approx(-0.5));
  CHECK(pinball_subgrad(1, 1, 0.3) == doctest::Approx(-0.3));
}

TEST_CASE("grid CRPS examples") {
  const ProbGrid g = ProbGrid::percentiles();
  CHECK(crps_grid(Vector::Constant(99, 1.7), 1.7, g) == 0.0);

  Vector q(99);
  for (Eigen::Index m = 0; m < 99; ++m) q[m] = normal_quantile(g[static_cast<std::size_t>(m)]);
  // reference: closed-form Gaussian CRPS 2 phi(0) - 1/sqrt(pi) = 0.2336950
  CHECK(std::abs(crps_grid(q, 0.0, g) - 0.23369497725510907) < 0.01);
  // the grid approximation itself, evaluated independently in high precision
  CHECK(crps_grid(q, 0.0, g) == doctest::Approx(0.2359119878133653).epsilon(1e-12));

  const ProbGrid single({0.5});
  CHECK(crps_grid(Vector::Constant(1, 1.0), 0.0, single) == doctest::Approx(1.0));
  CHECK_THROWS_WITH_AS(crps_grid(Vector::Zero(3), 0.0, single), doctest::Contains("length mismatch"), InputError);
  CHECK(mean_pinball(q, 0.0, g) == doctest::Approx(crps_grid(q, 0.0, g) / 2));
}

TEST_CASE("linearized instantaneous regret") {
  const ProbGrid one({0.5});
  Matrix same = Matrix::Constant(1, 3, 2.0);
  CHECK(linearized_instant_regret(Vector::Constant(1, 2.0), same, 0.3, one).isZero());
  CHECK(linearized_instant_regret(Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 0.0), 0.0, one)(0, 0) ==
        doctest::Approx(0.5));
  CHECK(linearized_instant_regret(Vector::Constant(1, 0.0), Matrix::Constant(1, 1, 1.0), 0.5, one)(0, 0) ==
        doctest::Approx(0.5));
}

TEST_CASE("pinball properties on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5), up(0.001, 0.999), ul(0, 1);
  for (int i = 0; i < 20000; ++i) {
    const double q1 = u(rng), q2 = u(rng), y = u(rng), p = up(rng), l = ul(rng);
    CHECK(pinball(q1, y, p) >= 0.0);
    CHECK(pinball(y, y, p) == 0.0);
    CHECK(pinball(l * q1 + (1 - l) * q2, y, p) <= l * pinball(q1, y, p) + (1 - l) * pinball(q2, y, p) + 1e-12);
    CHECK(pinball(q2, y, p) >= pinball(q1, y, p) + pinball_subgrad(q1, y, p) * (q2 - q1) - 1e-12);
    CHECK(pinball(q1, y, 0.5) == doctest::Approx(std::abs(q1 - y) / 2));
  }
}

TEST_CASE("grid CRPS is shift invariant") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0, 2);
  const ProbGrid g = ProbGrid::percentiles();
  for (int trial = 0; trial < 200; ++trial) {
    Vector q(99);
    for (auto& v : q) v = n(rng);
    std::sort(q.begin(), q.end());
    const double y = n(rng);
    const double c = std::ldexp(static_cast<double>(trial % 9) - 4.0, 0);  // exact shifts
    CHECK(crps_grid(q.array() + c, y + c, g) == doctest::Approx(crps_grid(q, y, g)).epsilon(1e-12));
  }
}

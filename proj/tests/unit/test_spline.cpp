#include <doctest.h>

#include <random>

#include "crpslearn/errors.hpp"
#include "crpslearn/spline.hpp"

using namespace crpslearn;

namespace {

Vector random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Difference-penalty roughness of a curve on the grid.
double roughness(const Vector& f, double alpha) {
  const Matrix d1 = difference_matrix(f.size(), 1), d2 = difference_matrix(f.size(), 2);
  return alpha * (d1 * f).squaredNorm() + (1 - alpha) * (d2 * f).squaredNorm();
}

}  // namespace

TEST_CASE("degree 0 with a single interval is the constant basis") {
  const auto sys = bspline_basis(ProbGrid::percentiles(), 1.0, 0);
  CHECK(sys.size() == 1);
  CHECK(sys.basis.isOnes());
}

TEST_CASE("partition of unity for every generated basis") {
  const ProbGrid grids[] = {ProbGrid::percentiles(), ProbGrid::equidistant(13), ProbGrid({0.001, 0.3, 0.999})};
  for (const auto& g : grids) {
    for (int degree = 0; degree <= 3; ++degree) {
      for (double d : {0.005, 0.02, 0.1, 0.125, 1.0 / 3.0, 0.5, 1.0}) {
        const auto sys = bspline_basis(g, d, degree);
        CHECK((sys.basis.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
        CHECK(sys.basis.minCoeff() >= 0.0);
      }
    }
  }
}

TEST_CASE("degree 1 with knots at the grid points is the identity") {
  const ProbGrid g = ProbGrid::equidistant(9);
  std::vector<double> knots{g[0]};
  for (std::size_t i = 0; i < g.size(); ++i) knots.push_back(g[i]);
  knots.push_back(g[g.size() - 1]);
  const auto sys = bspline_basis_on_knots(g, knots, 1);
  REQUIRE(sys.size() == 9);
  CHECK((sys.basis - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invalid knot distances and degrees are rejected") {
  CHECK_THROWS_AS(bspline_basis(ProbGrid::percentiles(), 0.0, 3), InputError);
  CHECK_THROWS_AS(bspline_basis(ProbGrid::percentiles(), 1.5, 3), InputError);
  CHECK_THROWS_AS(bspline_basis(ProbGrid::percentiles(), 0.1, 4), InputError);
}

TEST_CASE("identity basis") {
  const auto sys = identity_basis(ProbGrid({0.2, 0.5, 0.8}));
  CHECK(sys.basis == Matrix::Identity(3, 3));
  CHECK(sys.basis.rowwise().sum().isOnes());
  CHECK(smoother(sys, 0.0, 0.5).isIdentity(1e-14));
}

TEST_CASE("difference matrices") {
  Matrix d1(2, 3);
  d1 << -1, 1, 0, 0, -1, 1;
  Matrix d2(1, 3);
  d2 << 1, -2, 1;
  CHECK(difference_matrix(3, 1) == d1);
  CHECK(difference_matrix(3, 2) == d2);
  for (Eigen::Index l = 3; l < 12; ++l) {
    CHECK(difference_matrix(l, 2) == difference_matrix(l - 1, 1) * difference_matrix(l, 1));
  }
  CHECK_THROWS_AS(difference_matrix(2, 2), InputError);
}

TEST_CASE("large penalty shrinks toward constants") {
  std::mt19937_64 rng(3);
  const ProbGrid g = ProbGrid::percentiles();
  for (double d : {0.05, 0.1, 0.25}) {
    const auto sys = bspline_basis(g, d, 3);
    const Matrix s = smoother(sys, std::ldexp(1.0, 30), 0.5);
    for (int i = 0; i < 10; ++i) {
      const Vector sv = s * random_vector(rng, 99);
      CHECK(sv.maxCoeff() - sv.minCoeff() < 1e-3);
    }
  }
  const auto id = identity_basis(g);
  const Vector sv = smoother(id, std::ldexp(1.0, 30), 0.5) * random_vector(rng, 99);
  CHECK(sv.maxCoeff() - sv.minCoeff() < 1e-3);
}

TEST_CASE("smoother preserves constants and is symmetric") {
  const ProbGrid g = ProbGrid::percentiles();
  const BasisSystem systems[] = {identity_basis(g), bspline_basis(g, 0.1, 3), bspline_basis(g, 0.02, 2),
                                 bspline_basis(g, 0.25, 1)};
  for (const auto& sys : systems) {
    for (double lambda : {0.0, 1e-3, 1.0, 64.0, 4096.0, std::ldexp(1.0, 30)}) {
      if (lambda == 0.0 && !sys.has_full_column_rank()) continue;
      for (double alpha : {0.0, 0.5, 1.0}) {
        const Matrix s = smoother(sys, lambda, alpha);
        CHECK(((s * Vector::Constant(99, 2.5)).array() - 2.5).abs().maxCoeff() < 1e-8);
        CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("unpenalized smoother reproduces the basis span") {
  std::mt19937_64 rng(5);
  const auto sys = bspline_basis(ProbGrid::percentiles(), 0.1, 3);
  REQUIRE(sys.has_full_column_rank());
  const Matrix s = smoother(sys, 0.0, 0.5);
  const Vector bb = sys.basis * random_vector(rng, sys.size());
  CHECK((s * bb - bb).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("penalized roughness is non-increasing in lambda") {
  std::mt19937_64 rng(9);
  const auto sys = identity_basis(ProbGrid::percentiles());
  for (int trial = 0; trial < 5; ++trial) {
    const Vector v = random_vector(rng, 99);
    double prev = std::numeric_limits<double>::infinity();
    for (int x = -4; x <= 20; x += 2) {
      const double lambda = std::ldexp(1.0, x);
      const Matrix s = smoother(sys, lambda, 0.5);
      const double r = roughness(s * v, 0.5);
      CHECK(r <= prev * (1 + 1e-10));
      prev = r;
    }
  }
}

TEST_CASE("pseudo-inverse initialization") {
  const ProbGrid g = ProbGrid::percentiles();
  const Matrix uniform = Matrix::Constant(99, 3, 1.0 / 3.0);
  CHECK(pinv_init(identity_basis(g), uniform) == uniform);
  const Matrix c = pinv_init(constant_basis(g), uniform);
  REQUIRE(c.rows() == 1);
  CHECK((c.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-12);

  const auto sys = bspline_basis(g, 0.1, 3);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  Matrix beta(sys.size(), 2);
  for (Eigen::Index l = 0; l < beta.rows(); ++l) {
    beta(l, 0) = u(rng);
    beta(l, 1) = 1 - beta(l, 0);
  }
  const Matrix w0 = sys.basis * beta;
  CHECK((sys.basis * pinv_init(sys, w0) - w0).cwiseAbs().maxCoeff() < 1e-10);
}

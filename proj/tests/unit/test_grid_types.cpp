#include <doctest.h>

#include "crpslearn/csv_io.hpp"
#include "crpslearn/errors.hpp"
#include "crpslearn/grid_types.hpp"

using namespace crpslearn;

namespace {

ExpertPanel small_panel(std::size_t t, Eigen::Index m, Eigen::Index k) {
  ExpertPanel panel;
  for (std::size_t i = 0; i < t; ++i) panel.slabs.push_back(Matrix::Zero(m, k));
  for (Eigen::Index j = 0; j < k; ++j) panel.expert_names.push_back("e" + std::to_string(j));
  return panel;
}

ObservationStream zeros(std::size_t t) {
  ObservationStream obs;
  obs.y.assign(t, 0.0);
  return obs;
}

}  // namespace

TEST_CASE("percentile grid is the default 0.01..0.99") {
  const ProbGrid g = ProbGrid::percentiles();
  CHECK(g.size() == 99);
  CHECK(g[0] == doctest::Approx(0.01));
  CHECK(g[98] == doctest::Approx(0.99));
}

TEST_CASE("consistent dimensions validate") {
  const auto in = validate_panel(small_panel(2, 3, 2), ProbGrid({0.25, 0.5, 0.75}), zeros(2));
  CHECK(in.panel.times() == 2);
  CHECK(in.grid.size() == 3);
}

TEST_CASE("time axis mismatch is rejected") {
  CHECK_THROWS_WITH_AS(validate_panel(small_panel(2, 3, 2), ProbGrid({0.25, 0.5, 0.75}), zeros(5)),
                       doctest::Contains("time axis mismatch"), InputError);
}

TEST_CASE("grid axis and expert axis mismatches are rejected") {
  CHECK_THROWS_WITH_AS(validate_panel(small_panel(2, 4, 2), ProbGrid({0.25, 0.5, 0.75}), zeros(2)),
                       doctest::Contains("grid axis mismatch"), InputError);
  auto panel = small_panel(2, 3, 2);
  panel.slabs[1] = Matrix::Zero(3, 3);
  CHECK_THROWS_WITH_AS(validate_panel(panel, ProbGrid({0.25, 0.5, 0.75}), zeros(2)),
                       doctest::Contains("expert axis mismatch"), InputError);
}

TEST_CASE("non-increasing or out-of-range grids are rejected") {
  CHECK_THROWS_WITH_AS(ProbGrid({0.5, 0.5}), doctest::Contains("grid not strictly increasing"), InputError);
  CHECK_THROWS_AS(ProbGrid({0.0, 0.5}), InputError);
  CHECK_THROWS_AS(ProbGrid({0.5, 1.0}), InputError);
  CHECK_THROWS_AS(ProbGrid(std::vector<double>{}), InputError);
}

TEST_CASE("non-finite values are rejected with their position") {
  auto panel = small_panel(2, 3, 2);
  panel.slabs[1](2, 1) = std::nan("");
  CHECK_THROWS_AS(validate_panel(panel, ProbGrid({0.25, 0.5, 0.75}), zeros(2)), InputError);
  auto obs = zeros(2);
  obs.y[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate_panel(small_panel(2, 3, 2), ProbGrid({0.25, 0.5, 0.75}), obs), InputError);
}

TEST_CASE("validation is idempotent") {
  auto panel = small_panel(3, 3, 2);
  panel.slabs[2](1, 0) = 1.5;
  const auto once = validate_panel(panel, ProbGrid({0.25, 0.5, 0.75}), zeros(3));
  const auto twice = validate_panel(once.panel, once.grid, once.obs);
  CHECK(twice.grid == once.grid);
  CHECK(twice.obs.y == once.obs.y);
  for (std::size_t t = 0; t < 3; ++t) CHECK(twice.panel.slabs[t] == once.panel.slabs[t]);
}

TEST_CASE("grid serialization round-trips bit-exactly") {
  const ProbGrid grids[] = {ProbGrid::percentiles(), ProbGrid::equidistant(7), ProbGrid({0.1, 1.0 / 3.0, 0.9})};
  for (const auto& g : grids) {
    const ProbGrid back = grid_from_string(grid_to_string(g));
    REQUIRE(back.size() == g.size());
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == g[i]);
  }
}

TEST_CASE("weight surface simplex check") {
  WeightSurface w{Matrix::Constant(3, 2, 0.5), true};
  CHECK(w.on_simplex());
  w.weights(1, 0) = -0.1;
  w.weights(1, 1) = 1.1;
  CHECK_FALSE(w.on_simplex());
  CHECK(w.on_simplex(1e-10, false));
}

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <cstring>
#include <random>
#include <unistd.h>

#include "crpslearn/csv_io.hpp"
#include "crpslearn/errors.hpp"

using namespace crpslearn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / ("crpslearn_csv_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("doubles round-trip through their shortest form") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 100000; ++i) {
    std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    CHECK(parse_double(format_double(x), "t") == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(parse_double(" 3.25\r", "t") == 3.25);
  CHECK_THROWS_WITH_AS(parse_double("1.2.3", "file.csv row 4 column 'value'"),
                       doctest::Contains("row 4 column 'value'"), InputError);
  CHECK_THROWS_AS(parse_double("", "t"), InputError);
}

TEST_CASE("expert CSV round-trips bit-exactly") {
  ExpertData d;
  d.grid = ProbGrid({0.1, 0.5, 0.9});
  d.times = {"2020-01-01", "2020-01-02"};
  d.panel.expert_names = {"a", "b,c"};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 2; ++t) {
    Matrix s(3, 2);
    for (auto& v : s.reshaped()) v = n(rng);
    d.panel.slabs.push_back(s);
  }
  const fs::path p = temp_dir() / "experts.csv";
  write_expert_csv(p, d);
  const ExpertData back = read_expert_csv(p);
  CHECK(back.times == d.times);
  CHECK(back.panel.expert_names == d.panel.expert_names);
  CHECK(back.grid == d.grid);
  for (int t = 0; t < 2; ++t) CHECK(back.panel.slabs[static_cast<std::size_t>(t)] == d.panel.slabs[static_cast<std::size_t>(t)]);
}

TEST_CASE("expert CSV rows may come in any order") {
  const auto p = write_text("shuffled.csv",
                            "time,expert,probability,value\n"
                            "2,B,0.75,8\n1,A,0.25,1\n2,A,0.25,5\n1,B,0.75,4\n1,A,0.75,2\n"
                            "2,B,0.25,7\n1,B,0.25,3\n2,A,0.75,6\n");
  const auto d = read_expert_csv(p);
  CHECK(d.times == std::vector<std::string>{"2", "1"});
  CHECK(d.panel.expert_names == std::vector<std::string>{"B", "A"});
  CHECK(d.panel.slabs[1](0, 1) == 1.0);
  CHECK(d.panel.slabs[0](1, 0) == 8.0);
}

TEST_CASE("schema violations name the row and column") {
  const auto bad_value = write_text("bad_value.csv", "time,expert,probability,value\n1,A,0.5,1\n1,B,0.5,x\n");
  CHECK_THROWS_WITH_AS(read_expert_csv(bad_value), doctest::Contains("row 3 column 'value'"), InputError);
  const auto bad_prob = write_text("bad_prob.csv", "time,expert,probability,value\n1,A,1.5,1\n");
  CHECK_THROWS_WITH_AS(read_expert_csv(bad_prob), doctest::Contains("row 2 column 'probability'"), InputError);
  const auto short_row = write_text("short.csv", "time,expert,probability,value\n1,A,0.5\n");
  CHECK_THROWS_WITH_AS(read_expert_csv(short_row), doctest::Contains("row 2"), InputError);
  const auto no_col = write_text("nocol.csv", "time,expert,value\n1,A,0.5\n");
  CHECK_THROWS_WITH_AS(read_expert_csv(no_col), doctest::Contains("missing column 'probability'"), InputError);
  const auto nan = write_text("nan.csv", "time,expert,probability,value\n1,A,0.5,nan\n");
  CHECK_THROWS_AS(read_expert_csv(nan), InputError);
}

TEST_CASE("missing and duplicate expert cells are rejected") {
  const auto missing = write_text("missing.csv", "time,expert,probability,value\n1,A,0.25,1\n1,A,0.75,2\n1,B,0.25,3\n");
  CHECK_THROWS_WITH_AS(read_expert_csv(missing), doctest::Contains("missing expert value"), InputError);
  const auto dup = write_text("dup.csv", "time,expert,probability,value\n1,A,0.5,1\n1,A,0.5,2\n");
  CHECK_THROWS_WITH_AS(read_expert_csv(dup), doctest::Contains("duplicate"), InputError);
  CHECK_THROWS_AS(read_expert_csv(temp_dir() / "does_not_exist.csv"), InputError);
}

TEST_CASE("observations and quantile forecasts round-trip") {
  ObservationStream obs;
  obs.timestamps = {"1", "2", "3"};
  obs.y = {0.1, -1.0 / 3.0, 1e-300};
  const fs::path po = temp_dir() / "obs.csv";
  write_observation_csv(po, obs);
  const auto back = read_observation_csv(po);
  CHECK(back.y == obs.y);
  CHECK(back.timestamps == obs.timestamps);

  QuantileForecasts f;
  f.times = {"a", "b"};
  f.grid = ProbGrid({0.2, 0.8});
  f.values.resize(2, 2);
  f.values << 1.0 / 7.0, 2, 3, 4.0 / 9.0;
  const fs::path pq = temp_dir() / "q.csv";
  write_quantiles_csv(pq, f);
  const auto fb = read_quantiles_csv(pq);
  CHECK(fb.values == f.values);
  CHECK(fb.times == f.times);
  CHECK(fb.grid == f.grid);
}

TEST_CASE("observation alignment") {
  ObservationStream obs;
  obs.timestamps = {"b", "a"};
  obs.y = {2, 1};
  const auto aligned = align_observations(obs, {"a", "b"});
  CHECK(aligned.y == std::vector<double>{1, 2});
  CHECK_THROWS_WITH_AS(align_observations(obs, {"a", "c"}), doctest::Contains("time-axis misalignment"), InputError);
  CHECK_THROWS_WITH_AS(align_observations(obs, {"a"}), doctest::Contains("time-axis misalignment"), InputError);
  obs.timestamps = {"a", "a"};
  CHECK_THROWS_AS(align_observations(obs, {"a", "b"}), InputError);
}

TEST_CASE("generic tables handle quoting") {
  CsvTable t;
  t.header = {"x", "y"};
  t.rows = {{"plain", "with,comma"}, {"with \"quote\"", ""}};
  const fs::path p = temp_dir() / "quoted.csv";
  write_csv(p, t);
  const auto back = read_csv(p);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
}
